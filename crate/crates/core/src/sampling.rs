//! Exact samplers on `l_p` balls.
//!
//! For `p < ∞` a point on the `l_p` sphere with the cone measure is
//! `Y = G / ||G||_p` where `G` has i.i.d. coordinates with density
//! `e^{-|t|^p} / (2Γ(1 + 1/p))`. Uniform points in `B_p^d` follow from the
//! polar integration formula as `U^{1/d} Y` with `U` uniform on `(0, 1)`.
//! For `p = ∞` coordinates are drawn uniformly and independently.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Exponent, PBallBody};
use crate::parallel::{chunk_rng, map_chunks, CHUNK_ROWS};

/// Which distribution a batch was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Cone measure on the unit sphere `{||x||_p = 1}`.
    Cone,
    /// Uniform on the unit ball `B_p^d`.
    UniformBall,
    /// Uniform on `D_p^d = α_{d,p} B_p^d`.
    UniformNormalized,
    /// Uniform on `D_p^d / L`; isotropic with identity covariance.
    IsotropicRescaled,
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cone" => Ok(Measure::Cone),
            "uniform" | "uniform_ball" => Ok(Measure::UniformBall),
            "normalized" | "uniform_normalized" => Ok(Measure::UniformNormalized),
            "isotropic" | "isotropic_rescaled" => Ok(Measure::IsotropicRescaled),
            other => Err(Error::Parse(format!("unknown measure {other:?}"))),
        }
    }
}

/// Sampler for the generalized Gaussian `e^{-|t|^p} / (2Γ(1 + 1/p))`.
///
/// `|t| = W^{1/p}` with `W ~ Gamma(1/p, 1)`. The small-shape gamma variate
/// is produced by boosting, `W = V U^{p}` with `V ~ Gamma(1 + 1/p, 1)`,
/// and the whole power is taken in log space so large `p` cannot
/// underflow `W` to zero.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedGaussian {
    p: f64,
    boosted: Gamma<f64>,
}

impl GeneralizedGaussian {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() {
            return Err(Error::InfiniteExponent {
                operation: "generalized Gaussian sampler",
            });
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let boosted = Gamma::new(1.0 + 1.0 / p, 1.0).map_err(|e| invalid("p", e.to_string()))?;
        Ok(Self { p, boosted })
    }

    /// `ln |t|`.
    fn sample_log_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = self.boosted.sample(rng);
        let u = 1.0 - rng.random::<f64>();
        // ln W = ln V + p ln U; |t| = W^{1/p}
        v.ln() / self.p + u.ln()
    }
}

impl Distribution<f64> for GeneralizedGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let magnitude = self.sample_log_abs(rng).exp();
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// `n` i.i.d. draws from the generalized Gaussian with exponent `p`.
pub fn sample_generalized_gaussian(p: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let dist = GeneralizedGaussian::new(p)?;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let chunks = map_chunks(n, |k, m| {
        let mut rng = chunk_rng(seed, k as u64);
        (0..m).map(|_| dist.sample(&mut rng)).collect::<Vec<_>>()
    });
    Ok(chunks.concat())
}

/// Draws single points of a given measure.
#[derive(Debug, Clone, Copy)]
pub struct PointSampler {
    body: PBallBody,
    measure: Measure,
    radial: Option<GeneralizedGaussian>,
}

impl PointSampler {
    pub fn new(body: PBallBody, measure: Measure) -> Result<Self> {
        let radial = match body.p() {
            Exponent::Finite(p) => Some(GeneralizedGaussian::new(p)?),
            Exponent::Infinity if measure == Measure::Cone => {
                return Err(Error::InfiniteExponent {
                    operation: "cone-measure sampling",
                })
            }
            Exponent::Infinity => None,
        };
        Ok(Self { body, measure, radial })
    }

    pub fn body(&self) -> &PBallBody {
        &self.body
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    fn scale(&self) -> f64 {
        match self.measure {
            Measure::Cone | Measure::UniformBall => 1.0,
            Measure::UniformNormalized => self.body.alpha(),
            Measure::IsotropicRescaled => self.body.alpha() / self.body.isotropic_constant(),
        }
    }

    /// Fill `out` (length `d`) with one draw.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.body.d();
        debug_assert_eq!(out.len(), d);
        let scale = self.scale();
        match self.radial {
            None => {
                for v in out.iter_mut() {
                    *v = scale * (2.0 * rng.random::<f64>() - 1.0);
                }
            }
            Some(gen) => {
                for v in out.iter_mut() {
                    *v = gen.sample(rng);
                }
                let norm = self.body.norm(out);
                let radial = if self.measure == Measure::Cone {
                    1.0
                } else {
                    let u = 1.0 - rng.random::<f64>();
                    (u.ln() / d as f64).exp()
                };
                let factor = scale * radial / norm;
                for v in out.iter_mut() {
                    *v *= factor;
                }
            }
        }
    }
}

/// Stream `n` draws chunk by chunk without materializing them.
///
/// `reduce(rows, count)` receives a flat row-major buffer of `count` rows.
/// Chunk boundaries and streams are the same as for a materialized
/// [`SampleBatch`], so both paths see identical points.
pub fn map_sample_chunks<T, F>(sampler: &PointSampler, n: usize, seed: u64, reduce: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64], usize) -> T + Sync + Send,
{
    let d = sampler.body.d();
    map_chunks(n, |k, m| {
        let mut rng = chunk_rng(seed, k as u64);
        let mut buf = vec![0.0; m * d];
        fill_rows(sampler, &mut rng, &mut buf);
        reduce(&buf, m)
    })
}

fn fill_rows(sampler: &PointSampler, rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    let d = sampler.body.d();
    for row in buf.chunks_exact_mut(d) {
        sampler.fill(rng, row);
    }
}

/// `n` points in `d` dimensions, row-major, with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub body: PBallBody,
    pub measure: Measure,
    pub seed: u64,
    pub n: usize,
    pub points: Vec<f64>,
}

impl SampleBatch {
    pub fn d(&self) -> usize {
        self.body.d()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.d())
    }

    pub fn empirical_mean(&self) -> Vec<f64> {
        let d = self.d();
        let mut mean = vec![0.0; d];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        mean
    }

    /// Second-moment matrix `n^{-1} Σ x x^T`, row-major `d × d`.
    pub fn second_moments(&self) -> Vec<f64> {
        let mut acc = SecondMoments::new(self.d());
        acc.push_rows(&self.points);
        acc.matrix()
    }
}

/// Draw a batch from `measure` on `body`.
pub fn sample(body: &PBallBody, measure: Measure, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let sampler = PointSampler::new(*body, measure)?;
    let d = body.d();
    let mut points = vec![0.0; n * d];
    let chunk_len = CHUNK_ROWS * d;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_chunks_mut(chunk_len).enumerate().for_each(|(k, buf)| {
            fill_rows(&sampler, &mut chunk_rng(seed, k as u64), buf);
        });
    }
    #[cfg(not(feature = "parallel"))]
    for (k, buf) in points.chunks_mut(chunk_len).enumerate() {
        fill_rows(&sampler, &mut chunk_rng(seed, k as u64), buf);
    }
    Ok(SampleBatch {
        body: *body,
        measure,
        seed,
        n,
        points,
    })
}

/// Cone measure on `{||x||_p = 1}`; requires `p < ∞`.
pub fn sample_cone(body: &PBallBody, n: usize, seed: u64) -> Result<SampleBatch> {
    sample(body, Measure::Cone, n, seed)
}

/// Uniform on `B_p^d`, or on `D_p^d` when `normalized`.
pub fn sample_uniform(body: &PBallBody, n: usize, seed: u64, normalized: bool) -> Result<SampleBatch> {
    let measure = if normalized {
        Measure::UniformNormalized
    } else {
        Measure::UniformBall
    };
    sample(body, measure, n, seed)
}

/// Uniform on `D_p^d / L_{D_p^d}`.
pub fn sample_isotropic(body: &PBallBody, n: usize, seed: u64) -> Result<SampleBatch> {
    sample(body, Measure::IsotropicRescaled, n, seed)
}

/// Running sums of `x` and `x x^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMoments {
    d: usize,
    count: u64,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl SecondMoments {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            count: 0,
            sum: vec![0.0; d],
            outer: vec![0.0; d * d],
        }
    }

    pub fn push_rows(&mut self, rows: &[f64]) {
        let d = self.d;
        for row in rows.chunks_exact(d) {
            self.count += 1;
            for i in 0..d {
                self.sum[i] += row[i];
                let ri = row[i];
                for (acc, rj) in self.outer[i * d + i..(i + 1) * d].iter_mut().zip(&row[i..]) {
                    *acc += ri * rj;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &SecondMoments) {
        self.count += other.count;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.outer.iter_mut().zip(&other.outer).for_each(|(a, b)| *a += b);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.count as f64).collect()
    }

    /// Symmetric `n^{-1} Σ x x^T`.
    pub fn matrix(&self) -> Vec<f64> {
        let d = self.d;
        let n = self.count as f64;
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.outer[i * d + j] / n;
                m[i * d + j] = v;
                m[j * d + i] = v;
            }
        }
        m
    }
}

/// Streaming mean and second-moment matrix of `n` draws.
pub fn empirical_second_moments(body: &PBallBody, measure: Measure, n: usize, seed: u64) -> Result<SecondMoments> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let sampler = PointSampler::new(*body, measure)?;
    let d = body.d();
    let parts = map_sample_chunks(&sampler, n, seed, |rows, _| {
        let mut acc = SecondMoments::new(d);
        acc.push_rows(rows);
        acc
    });
    let mut total = SecondMoments::new(d);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// `max_{i,j} |M_ij - δ_ij|` for a row-major `d × d` matrix.
pub fn max_deviation_from_identity(matrix: &[f64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((matrix[i * d + j] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::special::ln_gamma;
    use crate::parallel::Tally;

    fn body(d: usize, p: f64) -> PBallBody {
        PBallBody::new(d, Exponent::new(p).unwrap()).unwrap()
    }

    /// E|t|^k under e^{-|t|^p}/(2Γ(1+1/p)) by midpoint quadrature on [0, T].
    fn abs_moment_quadrature(p: f64, k: i32) -> f64 {
        let norm = 2.0 * ln_gamma(1.0 + 1.0 / p).unwrap().exp();
        let upper = 40f64.powf(1.0 / p) + 1.0;
        let m = 400_000;
        let h = upper / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            let t = (i as f64 + 0.5) * h;
            s += t.powi(k) * (-t.powf(p)).exp() * h;
        }
        2.0 * s / norm
    }

    fn within_sigmas(values: impl Iterator<Item = f64>, target: f64, sigmas: f64) -> bool {
        let mut t = Tally::default();
        values.for_each(|v| t.push(v));
        (t.mean() - target).abs() <= sigmas * t.stderr()
    }

    #[test]
    fn generalized_gaussian_second_moments() {
        let n = 1_000_000;
        let g2 = sample_generalized_gaussian(2.0, n, 1).unwrap();
        let want = abs_moment_quadrature(2.0, 2);
        assert!((want - 0.5).abs() < 1e-9);
        assert!(within_sigmas(g2.iter().map(|t| t * t), want, 3.0));
        let g1 = sample_generalized_gaussian(1.0, n, 2).unwrap();
        let want = abs_moment_quadrature(1.0, 2);
        assert!((want - 2.0).abs() < 1e-8);
        assert!(within_sigmas(g1.iter().map(|t| t * t), want, 3.0));
    }

    #[test]
    fn generalized_gaussian_abs_moments() {
        for &p in &[1.5, 3.0] {
            let xs = sample_generalized_gaussian(p, 400_000, 11).unwrap();
            for &k in &[1, 2, 4] {
                let quad = abs_moment_quadrature(p, k);
                let closed = (ln_gamma((k as f64 + 1.0) / p).unwrap() - ln_gamma(1.0 / p).unwrap()).exp();
                assert!((quad - closed).abs() < 1e-7 * closed, "p={p} k={k}");
                assert!(
                    within_sigmas(xs.iter().map(|t| t.abs().powi(k)), quad, 3.0),
                    "p={p} k={k}"
                );
            }
        }
    }

    #[test]
    fn generalized_gaussian_large_p_does_not_collapse_to_zero() {
        // For large p the density is close to uniform on [-1, 1]; a naive
        // W^{1/p} would return exact zeros for about half the draws.
        let n = 100_000;
        let xs = sample_generalized_gaussian(1000.0, n, 5).unwrap();
        assert!(xs.iter().all(|t| *t != 0.0 && t.abs() < 1.1));
        let want = 0.5 / ln_gamma(1.001).unwrap().exp();
        let frac = xs.iter().filter(|t| t.abs() < 0.5).count() as f64 / n as f64;
        assert!((frac - want).abs() < 3.0 * (want * (1.0 - want) / n as f64).sqrt());
    }

    #[test]
    fn generalized_gaussian_rejects_infinite_p() {
        assert!(sample_generalized_gaussian(f64::INFINITY, 10, 0).is_err());
        assert!(sample_generalized_gaussian(0.5, 10, 0).is_err());
    }

    #[test]
    fn cone_points_lie_on_sphere() {
        let b = sample_cone(&body(3, 1.0), 5_000, 3).unwrap();
        for row in b.rows() {
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let b = sample_cone(&body(7, 3.5), 5_000, 3).unwrap();
        for row in b.rows() {
            assert!((Exponent::Finite(3.5).norm(row) - 1.0).abs() < 1e-12);
        }
        assert!(sample_cone(&PBallBody::new(3, Exponent::Infinity).unwrap(), 10, 0).is_err());
    }

    #[test]
    fn cone_on_circle_has_uniform_angles() {
        let n = 20_000;
        let b = sample_cone(&body(2, 2.0), n, 17).unwrap();
        let mut u: Vec<f64> = b
            .rows()
            .map(|r| (r[1].atan2(r[0]) + std::f64::consts::PI) / (2.0 * std::f64::consts::PI))
            .collect();
        u.sort_by(f64::total_cmp);
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64 / n as f64 - v).max(v - i as f64 / n as f64))
            .fold(0.0, f64::max);
        // Asymptotic KS critical value at level 0.01.
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn cone_first_coordinate_is_centered() {
        let b = sample_cone(&body(5, 3.0), 100_000, 23).unwrap();
        assert!(within_sigmas(b.rows().map(|r| r[0]), 0.0, 3.0));
    }

    #[test]
    fn cone_direction_independent_of_radius() {
        let (d, p, n) = (4usize, 3.0, 200_000usize);
        let g = sample_generalized_gaussian(p, n * d, 29).unwrap();
        let (mut xs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for row in g.chunks_exact(d) {
            let r = Exponent::Finite(p).norm(row);
            xs.push(r);
            ys.push(row.iter().map(|v| (v / r).powi(2)).sum::<f64>().sqrt());
        }
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn uniform_radial_law_is_power_d() {
        let (d, n) = (5usize, 100_000usize);
        let b = sample_uniform(&body(d, 3.0), n, 31, false).unwrap();
        let mut u: Vec<f64> = b.rows().map(|r| Exponent::Finite(3.0).norm(r).powi(d as i32)).collect();
        u.sort_by(f64::total_cmp);
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64 / n as f64 - v).max(v - i as f64 / n as f64))
            .fold(0.0, f64::max);
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks = {ks}");
        // P(||x||_p <= s) = s^d
        let s: f64 = 0.8;
        let frac = u.iter().filter(|&&v| v <= s.powi(d as i32)).count() as f64 / n as f64;
        let want = s.powi(d as i32);
        assert!((frac - want).abs() < 3.0 * (want * (1.0 - want) / n as f64).sqrt());
    }

    #[test]
    fn uniform_normalized_second_moments() {
        let n = 400_000;
        let disk = sample_uniform(&body(2, 2.0), n, 37, true).unwrap();
        // γ² α² = (1/4)(1/π)
        let want = 0.25 / std::f64::consts::PI;
        assert!(within_sigmas(disk.rows().map(|r| r[0] * r[0]), want, 3.0));
        let cube = sample_uniform(&PBallBody::new(5, Exponent::Infinity).unwrap(), n, 41, true).unwrap();
        assert!(within_sigmas(cube.rows().map(|r| r[0] * r[0]), 1.0 / 12.0, 3.0));
        assert!(cube.rows().all(|r| r.iter().all(|v| v.abs() <= 0.5)));
    }

    #[test]
    fn uniform_normalized_stays_in_body() {
        let bd = body(6, 1.5);
        let b = sample_uniform(&bd, 20_000, 43, true).unwrap();
        assert!(b.rows().all(|r| bd.norm(r) <= bd.alpha()));
    }

    #[test]
    fn isotropic_moments() {
        let n = 1_000_000;
        let bd = body(4, 2.0);
        let m = empirical_second_moments(&bd, Measure::IsotropicRescaled, n, 47).unwrap();
        let mat = m.matrix();
        assert!(max_deviation_from_identity(&mat, 4) <= 5.0 / (n as f64).sqrt());
        assert!(m.mean().iter().all(|v| v.abs() < 3.0 * (1.0 / n as f64).sqrt()));
    }

    #[test]
    fn batches_are_deterministic_and_streaming_matches() {
        let bd = body(3, 4.0);
        let n = 3 * CHUNK_ROWS + 17;
        let a = sample_isotropic(&bd, n, 99).unwrap();
        let b = sample_isotropic(&bd, n, 99).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_isotropic(&bd, n, 100).unwrap();
        assert_ne!(a.points, c.points);
        let streamed = empirical_second_moments(&bd, Measure::IsotropicRescaled, n, 99).unwrap();
        let direct = a.second_moments();
        for (x, y) in streamed.matrix().iter().zip(&direct) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a
            .empirical_mean()
            .iter()
            .zip(streamed.mean())
            .all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn measure_parsing() {
        assert_eq!("cone".parse::<Measure>().unwrap(), Measure::Cone);
        assert_eq!("isotropic".parse::<Measure>().unwrap(), Measure::IsotropicRescaled);
        assert!("banana".parse::<Measure>().is_err());
    }
}
