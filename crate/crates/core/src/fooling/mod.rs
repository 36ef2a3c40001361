//! The fooling-function adversary.
//!
//! Given sample points `P_n` inside a body `K`, the function
//! `f(x) = p_δ(dist(x, conv P_n))` vanishes on every sample point, equals 1
//! at distance `>= δ√d` from the hull and is `C^1` with
//! `Lip(f) <= 2/(δ√d)` and `Lip(∇f) <= 40/(δ²d)`. Its integral over the
//! volume-one body is at least `1 - vol(K ∩ (conv P_n + δ√d B_2))`, and the
//! covering argument bounds that volume by `n vol(K ∩ r_d√d B_2)` with
//! `r_d = rad(K)/(2√d) + δ`.

pub mod hull;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use hull::{classify, distance_to_hull, HullDistance, HullSolver, Proximity};

use crate::concentration::{dot, euclidean_norm, intersection_volume, McEstimate};
use crate::error::{invalid, Error, Result};
use crate::geometry::{IsotropicBody, PBallBody, MIN_ISOTROPIC_CONSTANT};
use crate::io::{fmt_f64, Table};
use crate::parallel::{chunk_rng, derive_seed, merge_tallies, Tally};
use crate::sampling::{map_sample_chunks, sample_uniform, Measure, PointSampler};

/// `δ = 1/42`, admissible for `l_p` balls in high dimension.
pub const LP_DELTA: f64 = 1.0 / 42.0;

/// Slack on `||x||_p <= α` when checking that sample points lie in the body.
pub const BODY_SLACK: f64 = 1e-9;

/// Relative rounding floor of hull distances, `1e3 ε`.
const ROUNDING_FLOOR: f64 = 1e3 * f64::EPSILON;

/// Constant in the gradient Lipschitz bound `40/(δ²d)`.
pub const GRADIENT_LIPSCHITZ_FACTOR: f64 = 40.0;

/// `(1/sqrt(2πe)) (1 - sqrt(3)/2)`: a lower bound for the admissible
/// window of any isotropic body with `L >= 1/sqrt(2πe)` and ratio `<= sqrt(3)`.
pub fn reference_delta_bound() -> f64 {
    MIN_ISOTROPIC_CONSTANT * (1.0 - 3f64.sqrt() / 2.0)
}

/// `p_δ(t)` for the scale `s = δ√d`: `2t²/s²` up to `s/2`, then
/// `-2t²/s² + 4t/s - 1` up to `s`, then 1.
pub fn smoothing_profile(t: f64, delta: f64, d: usize) -> f64 {
    profile(t, delta * (d as f64).sqrt())
}

/// `p_δ'(t)`.
pub fn smoothing_profile_derivative(t: f64, delta: f64, d: usize) -> f64 {
    profile_derivative(t, delta * (d as f64).sqrt())
}

fn profile(t: f64, s: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 0.5 * s {
        2.0 * (t / s) * (t / s)
    } else if t < s {
        let u = t / s;
        -2.0 * u * u + 4.0 * u - 1.0
    } else {
        1.0
    }
}

fn profile_derivative(t: f64, s: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t <= 0.5 * s {
        4.0 * t / (s * s)
    } else if t < s {
        4.0 * (s - t) / (s * s)
    } else {
        0.0
    }
}

/// Admissible `δ` window `0 < δ < L (1 - rad/(2√d L))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaWindow {
    /// `rad / (√d L)`.
    pub ratio: f64,
    pub upper: f64,
    /// `min(1/42, upper/2)`.
    pub default: f64,
}

impl DeltaWindow {
    pub fn admits(&self, delta: f64) -> bool {
        delta > 0.0 && delta < self.upper
    }
}

pub fn admissible_delta<B: IsotropicBody + ?Sized>(body: &B) -> Result<DeltaWindow> {
    let ratio = body.diameter_ratio();
    if !(ratio < 2.0) {
        return Err(Error::EmptyDeltaWindow { ratio });
    }
    let upper = body.isotropic_constant() * (1.0 - ratio / 2.0);
    Ok(DeltaWindow {
        ratio,
        upper,
        default: LP_DELTA.min(upper / 2.0),
    })
}

/// `r_d = rad(K)/(2√d) + δ`.
pub fn covering_radius<B: IsotropicBody + ?Sized>(body: &B, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(body.radius() / (2.0 * (body.dim() as f64).sqrt()) + delta)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be positive and finite, got {delta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoolingValue {
    pub value: f64,
    pub distance: f64,
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoolingGradient {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub distance: f64,
    pub approximate: bool,
}

/// `f_{δ,P_n}` over a fixed point set inside a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoolingFunction {
    body: PBallBody,
    points: Vec<f64>,
    delta: f64,
    solver: HullSolver,
}

impl FoolingFunction {
    /// `points` is row-major with `body.d()` columns; each must satisfy
    /// `||p||_p <= α + BODY_SLACK`.
    pub fn new(body: PBallBody, points: Vec<f64>, delta: f64, solver: HullSolver) -> Result<Self> {
        check_delta(delta)?;
        solver.validate()?;
        let d = body.d();
        if points.is_empty() {
            return Err(invalid("points", "need at least one point"));
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: points.len() % d,
            });
        }
        for (index, p) in points.chunks_exact(d).enumerate() {
            if !body.contains(p, BODY_SLACK) {
                return Err(Error::PointOutsideBody {
                    index,
                    norm: body.norm(p),
                    bound: body.alpha() + BODY_SLACK,
                });
            }
        }
        Ok(Self {
            body,
            points,
            delta,
            solver,
        })
    }

    pub fn body(&self) -> &PBallBody {
        &self.body
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len() / self.body.d()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn solver(&self) -> &HullSolver {
        &self.solver
    }

    /// `δ√d`, beyond which `f = 1`.
    pub fn scale(&self) -> f64 {
        self.delta * (self.body.d() as f64).sqrt()
    }

    /// Distances at or below this count as membership in the hull.
    ///
    /// Never below `1e3 ε max_i ||p_i||`: the rounding floor of a hull
    /// solve at an interior point grows with the size of the points.
    pub fn membership_threshold(&self) -> f64 {
        let d = self.body.d();
        let reach = self.points.chunks_exact(d).map(euclidean_norm).fold(0.0, f64::max);
        (self.solver.tolerance * self.scale() * 1e-3).max(ROUNDING_FLOOR * reach)
    }

    /// `(2/(δ√d), 40/(δ²d))`.
    pub fn lipschitz_bounds(&self) -> (f64, f64) {
        let s = self.scale();
        (2.0 / s, GRADIENT_LIPSCHITZ_FACTOR / (s * s))
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.body.d() {
            return Err(Error::DimensionMismatch {
                expected: self.body.d(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn distance(&self, x: &[f64]) -> Result<HullDistance> {
        self.check_point(x)?;
        hull::solve(x, &self.points, &self.solver)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<FoolingValue> {
        self.check_point(x)?;
        match classify(x, &self.points, &self.solver, self.scale())? {
            Proximity::Beyond { lower_bound } => Ok(FoolingValue {
                value: 1.0,
                distance: lower_bound,
                approximate: false,
            }),
            Proximity::Within(h) => Ok(FoolingValue {
                value: self.value_at(h.dist),
                distance: h.dist,
                approximate: h.approximate,
            }),
        }
    }

    pub fn evaluate_gradient(&self, x: &[f64]) -> Result<FoolingGradient> {
        let h = self.distance(x)?;
        let d = self.body.d();
        let value = self.value_at(h.dist);
        let slope = if h.dist <= self.membership_threshold() {
            0.0
        } else {
            profile_derivative(h.dist, self.scale())
        };
        let gradient = if slope == 0.0 {
            vec![0.0; d]
        } else {
            x.iter()
                .zip(&h.projection)
                .map(|(a, b)| slope * (a - b) / h.dist)
                .collect()
        };
        Ok(FoolingGradient {
            value,
            gradient,
            distance: h.dist,
            approximate: h.approximate,
        })
    }

    fn value_at(&self, dist: f64) -> f64 {
        if dist <= self.membership_threshold() {
            0.0
        } else {
            profile(dist, self.scale())
        }
    }

    /// CSV rows `x_1..x_d, value, gradient_norm, approximate`.
    pub fn evaluation_table(&self, xs: &[f64]) -> Result<Table> {
        let d = self.body.d();
        if !xs.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: xs.len() % d,
            });
        }
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.extend(["value", "gradient_norm", "approximate"].map(String::from));
        let mut table = Table::new(header);
        for x in xs.chunks_exact(d) {
            let g = self.evaluate_gradient(x)?;
            let mut row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
            row.push(fmt_f64(g.value));
            row.push(fmt_f64(euclidean_norm(&g.gradient)));
            row.push(g.approximate.to_string());
            table.push(row);
        }
        Ok(table)
    }

    /// Empirical checks of the defining properties of `f`.
    pub fn certify(&self, settings: &CertificationSettings, seed: u64) -> Result<LipschitzCertificate> {
        certify(self, settings, seed)
    }
}

/// `n_points` uniform points of the volume-one body.
pub fn random_point_set(body: &PBallBody, n_points: usize, seed: u64) -> Result<Vec<f64>> {
    if n_points == 0 {
        return Err(invalid("n_points", "must be at least 1"));
    }
    Ok(sample_uniform(body, n_points, seed, true)?.points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificationSettings {
    /// Random pairs for the two Lipschitz ratios.
    pub pairs: usize,
    /// Points for the central-difference gradient check.
    pub gradient_checks: usize,
    /// Finite-difference step as a fraction of `δ√d`.
    pub fd_step: f64,
    /// Relative tolerance for the gradient check.
    pub fd_tolerance: f64,
}

impl Default for CertificationSettings {
    fn default() -> Self {
        Self {
            pairs: 100,
            gradient_checks: 10,
            fd_step: 1e-6,
            fd_tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCertificate {
    pub value_bound: f64,
    pub gradient_bound: f64,
    /// Largest `|f(x) - f(y)| / ||x - y||` seen.
    pub max_value_ratio: f64,
    /// Largest `||∇f(x) - ∇f(y)|| / ||x - y||` seen.
    pub max_gradient_ratio: f64,
    pub pairs: usize,
    /// `f(p_i) == 0` and `∇f(p_i) == 0` for every sample point.
    pub zero_at_points: bool,
    /// `f == 0` at random convex combinations of the points.
    pub zero_on_hull: bool,
    /// `f == 1` with zero gradient at points pushed beyond `δ√d`.
    pub one_beyond: bool,
    pub max_fd_relative_error: f64,
    pub gradient_checks: usize,
    pub fd_tolerance: f64,
    pub approximate_solves: usize,
}

impl LipschitzCertificate {
    pub fn lipschitz_ok(&self) -> bool {
        self.max_value_ratio <= self.value_bound && self.max_gradient_ratio <= self.gradient_bound
    }

    pub fn gradient_ok(&self) -> bool {
        self.max_fd_relative_error <= self.fd_tolerance
    }

    pub fn holds(&self) -> bool {
        self.lipschitz_ok() && self.gradient_ok() && self.zero_at_points && self.zero_on_hull && self.one_beyond
    }
}

fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let norm = euclidean_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn random_convex_combination<R: Rng>(rng: &mut R, points: &[f64], d: usize) -> Vec<f64> {
    let n = points.len() / d;
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let mut c = vec![0.0; d];
    for (p, wi) in points.chunks_exact(d).zip(&w) {
        for (ck, pk) in c.iter_mut().zip(p) {
            *ck += wi / total * pk;
        }
    }
    c
}

/// Points at distance up to `1.2 δ√d` from the hull, where the profile is
/// nontrivial.
fn near_hull_point<R: Rng>(rng: &mut R, f: &FoolingFunction) -> Vec<f64> {
    let d = f.body.d();
    let c = random_convex_combination(rng, &f.points, d);
    let u = random_unit(rng, d);
    let r = 1.2 * f.scale() * rng.random::<f64>();
    c.iter().zip(&u).map(|(a, b)| a + r * b).collect()
}

/// A point strictly outside the hull at distance at most `1.2 δ√d`: step
/// from the support vertex in a random direction along that direction.
fn outside_hull_point<R: Rng>(rng: &mut R, f: &FoolingFunction) -> Vec<f64> {
    let d = f.body.d();
    let u = random_unit(rng, d);
    let support = f
        .points
        .chunks_exact(d)
        .max_by(|a, b| dot(a, &u).total_cmp(&dot(b, &u)))
        .expect("at least one point");
    let r = 1.2 * f.scale() * (1.0 - rng.random::<f64>());
    support.iter().zip(&u).map(|(a, b)| a + r * b).collect()
}

fn certify(f: &FoolingFunction, settings: &CertificationSettings, seed: u64) -> Result<LipschitzCertificate> {
    let d = f.body.d();
    let s = f.scale();
    let (value_bound, gradient_bound) = f.lipschitz_bounds();
    let mut rng = chunk_rng(derive_seed(seed, 0xCE27, 0), 0);
    let mut approximate = 0;
    let mut track = |approx: bool| approximate += usize::from(approx);

    let mut zero_at_points = true;
    for p in f.points.chunks_exact(d) {
        let g = f.evaluate_gradient(p)?;
        track(g.approximate);
        zero_at_points &= g.value == 0.0 && g.gradient.iter().all(|v| *v == 0.0);
    }

    let mut zero_on_hull = true;
    let mut one_beyond = true;
    for _ in 0..settings.pairs.max(1) {
        let c = random_convex_combination(&mut rng, &f.points, d);
        let v = f.evaluate(&c)?;
        track(v.approximate);
        zero_on_hull &= v.value == 0.0;

        // Moving from the projection along the outward normal keeps the
        // projection, so the distance is known exactly.
        let x = near_hull_point(&mut rng, f);
        let h = f.distance(&x)?;
        track(h.approximate);
        let far: Vec<f64> = if h.dist > 1e-6 * s {
            let push = s * (1.0 + rng.random::<f64>()) / h.dist;
            h.projection.iter().zip(&x).map(|(p, xk)| p + push * (xk - p)).collect()
        } else {
            let u = random_unit(&mut rng, d);
            let reach = f.body.radius() + 2.0 * s;
            u.iter().map(|v| reach * v).collect()
        };
        let g = f.evaluate_gradient(&far)?;
        track(g.approximate);
        one_beyond &= g.value == 1.0 && g.gradient.iter().all(|v| *v == 0.0);
    }

    let mut max_value_ratio = 0.0f64;
    let mut max_gradient_ratio = 0.0f64;
    for k in 0..settings.pairs {
        let x = near_hull_point(&mut rng, f);
        let u = random_unit(&mut rng, d);
        // Alternate short and long separations.
        let step = if k % 2 == 0 {
            0.01 + 0.5 * rng.random::<f64>()
        } else {
            0.5 + 2.0 * rng.random::<f64>()
        };
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + step * s * b).collect();
        let gx = f.evaluate_gradient(&x)?;
        let gy = f.evaluate_gradient(&y)?;
        track(gx.approximate || gy.approximate);
        let sep = euclidean_norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
        max_value_ratio = max_value_ratio.max((gx.value - gy.value).abs() / sep);
        let gdiff: Vec<f64> = gx.gradient.iter().zip(&gy.gradient).map(|(a, b)| a - b).collect();
        max_gradient_ratio = max_gradient_ratio.max(euclidean_norm(&gdiff) / sep);
    }

    // Central differences away from the profile breakpoints, where f is
    // only C^1 and the difference quotient has O(h) error.
    let h = settings.fd_step * s;
    let band = 1e-3 * s;
    let mut max_fd = 0.0f64;
    let mut checks = 0;
    let mut attempts = 0;
    while checks < settings.gradient_checks && attempts < 100 * settings.gradient_checks.max(1) {
        attempts += 1;
        let x = outside_hull_point(&mut rng, f);
        let g = f.evaluate_gradient(&x)?;
        let t = g.distance;
        if t < band || (t - 0.5 * s).abs() < band || t > s - band {
            continue;
        }
        let mut fd = vec![0.0; d];
        let mut xp = x.clone();
        for k in 0..d {
            xp[k] = x[k] + h;
            let up = f.evaluate(&xp)?;
            xp[k] = x[k] - h;
            let down = f.evaluate(&xp)?;
            xp[k] = x[k];
            track(up.approximate || down.approximate);
            fd[k] = (up.value - down.value) / (2.0 * h);
        }
        let err: Vec<f64> = fd.iter().zip(&g.gradient).map(|(a, b)| a - b).collect();
        max_fd = max_fd.max(euclidean_norm(&err) / euclidean_norm(&g.gradient));
        checks += 1;
    }

    Ok(LipschitzCertificate {
        value_bound,
        gradient_bound,
        max_value_ratio,
        max_gradient_ratio,
        pairs: settings.pairs,
        zero_at_points,
        zero_on_hull,
        one_beyond,
        max_fd_relative_error: max_fd,
        gradient_checks: checks,
        fd_tolerance: settings.fd_tolerance,
        approximate_solves: approximate,
    })
}

/// Monte Carlo estimates over one shared sample of the body: `∫ f` and the
/// volume of `K ∩ (conv P_n + δ√d B_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullMonteCarlo {
    pub integral: McEstimate,
    pub extension_volume: McEstimate,
    pub approximate_solves: u64,
}

#[derive(Default)]
struct HullChunk {
    integral: Tally,
    inside: u64,
    approximate: u64,
}

pub fn hull_monte_carlo(f: &FoolingFunction, mc_n: usize, seed: u64) -> Result<HullMonteCarlo> {
    if mc_n == 0 {
        return Err(invalid("mc_n", "must be at least 1"));
    }
    let d = f.body.d();
    let s = f.scale();
    let sampler = PointSampler::new(f.body, Measure::UniformNormalized)?;
    let chunks = map_sample_chunks(&sampler, mc_n, seed, |rows, _| -> Result<HullChunk> {
        let mut c = HullChunk::default();
        for x in rows.chunks_exact(d) {
            match classify(x, &f.points, &f.solver, s)? {
                Proximity::Beyond { .. } => c.integral.push(1.0),
                Proximity::Within(h) => {
                    c.approximate += u64::from(h.approximate);
                    c.inside += u64::from(h.dist <= s);
                    c.integral.push(f.value_at(h.dist));
                }
            }
        }
        Ok(c)
    });
    let chunks: Vec<HullChunk> = chunks.into_iter().collect::<Result<_>>()?;
    let integral = merge_tallies(chunks.iter().map(|c| &c.integral));
    Ok(HullMonteCarlo {
        integral: McEstimate {
            estimate: integral.mean(),
            stderr: integral.stderr(),
            n: mc_n,
        },
        extension_volume: McEstimate::proportion(chunks.iter().map(|c| c.inside).sum(), mc_n),
        approximate_solves: chunks.iter().map(|c| c.approximate).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullExtensionBound {
    /// Monte Carlo `vol(K ∩ C_n^{(δ)})`.
    pub direct_mc: McEstimate,
    /// `n vol(K ∩ r_d√d B_2)`, scaled estimate and standard error.
    pub union_bound: McEstimate,
    pub covering_radius: f64,
    pub n_points: usize,
}

pub fn hull_extension_volume_bound(
    body: &PBallBody,
    points: &[f64],
    delta: f64,
    mc_n: usize,
    seed: u64,
) -> Result<HullExtensionBound> {
    let f = FoolingFunction::new(*body, points.to_vec(), delta, HullSolver::default())?;
    let mc = hull_monte_carlo(&f, mc_n, seed)?;
    extension_bound(&f, mc.extension_volume, mc_n, seed)
}

fn extension_bound(f: &FoolingFunction, direct_mc: McEstimate, mc_n: usize, seed: u64) -> Result<HullExtensionBound> {
    let r = covering_radius(&f.body, f.delta)?;
    let single = intersection_volume(&f.body, r, mc_n, seed)?;
    let n = f.n_points() as f64;
    Ok(HullExtensionBound {
        direct_mc,
        union_bound: McEstimate {
            estimate: n * single.estimate,
            stderr: n * single.stderr,
            n: single.n,
        },
        covering_radius: r,
        n_points: f.n_points(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralLowerBound {
    /// Monte Carlo `∫_K f`.
    pub integral_estimate: McEstimate,
    /// `1 - vol(K ∩ C_n^{(δ)})`, with the standard error of the volume.
    pub bound: McEstimate,
    pub extension: HullExtensionBound,
    pub approximate_solves: u64,
}

impl IntegralLowerBound {
    /// `1 - union_bound`, the quantity the covering argument guarantees.
    pub fn chained_bound(&self) -> f64 {
        1.0 - self.extension.union_bound.estimate
    }

    /// Combined standard error of `∫ f` and the union bound.
    pub fn chained_stderr(&self) -> f64 {
        self.integral_estimate.stderr.hypot(self.extension.union_bound.stderr)
    }
}

pub fn integral_lower_bound(
    body: &PBallBody,
    points: &[f64],
    delta: f64,
    mc_n: usize,
    seed: u64,
) -> Result<IntegralLowerBound> {
    let f = FoolingFunction::new(*body, points.to_vec(), delta, HullSolver::default())?;
    fooling_integral(&f, mc_n, seed)
}

pub fn fooling_integral(f: &FoolingFunction, mc_n: usize, seed: u64) -> Result<IntegralLowerBound> {
    let mc = hull_monte_carlo(f, mc_n, seed)?;
    let extension = extension_bound(f, mc.extension_volume, mc_n, seed)?;
    Ok(IntegralLowerBound {
        integral_estimate: mc.integral,
        bound: McEstimate {
            estimate: 1.0 - mc.extension_volume.estimate,
            ..mc.extension_volume
        },
        extension,
        approximate_solves: mc.approximate_solves,
    })
}
