//! Headline quantities: the curse condition
//! `limsup min{A_d √d L, B_d d L²} > 0`, lower-bound counts
//! `n(ε) >= (1-ε) C^{-1} q^{-d^{α/2}}`, the one-point-rule upper bounds
//! `A_d I_1` and `B_d I_2`, the Lipschitz rescaling identity and the
//! empirical adversary.

pub mod sequence;

use serde::{Deserialize, Serialize};

pub use sequence::SequenceSpec;

use crate::concentration::{least_squares, moment_integral, McEstimate};
use crate::error::{invalid, Error, Result};
use crate::fooling::{
    admissible_delta, fooling_integral, random_point_set, CertificationSettings, FoolingFunction, HullSolver,
};
use crate::geometry::{Exponent, PBallBody};
use crate::parallel::{derive_seed, map_tasks};

/// Witnesses at or below this are treated as zero.
pub const WITNESS_THRESHOLD: f64 = 1e-12;

/// Tail log-log slopes of `min{A√dL, BdL²}` below this count as decay to zero.
pub const DECAY_SLOPE_THRESHOLD: f64 = -0.1;

/// `𝒞¹_d(A, B, K)`: `||f||_∞ <= 1`, `Lip(f) <= A`, `Lip(D^θ f) <= B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessClass {
    pub body: PBallBody,
    pub a: f64,
    pub b: f64,
}

impl SmoothnessClass {
    pub const SUP_NORM_CAP: f64 = 1.0;

    pub fn new(body: PBallBody, a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { body, a, b })
    }

    /// `min{A √d L, B d L²}`.
    pub fn condition_term(&self) -> f64 {
        condition_term(self.a, self.b, &self.body)
    }
}

fn condition_term(a: f64, b: f64, body: &PBallBody) -> f64 {
    let d = body.d() as f64;
    let l = body.isotropic_constant();
    (a * d.sqrt() * l).min(b * d * l * l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    /// `psi_alpha` exponent in `[1, 2]`.
    pub alpha: f64,
    /// Volume decay base in `(0, 1)`.
    pub q: f64,
    /// Prefactor `C > 0`.
    pub c: f64,
    /// Error level in `(0, 1)`.
    pub epsilon: f64,
}

impl BoundParameters {
    pub fn new(alpha: f64, q: f64, c: f64, epsilon: f64) -> Result<Self> {
        let p = Self { alpha, q, c, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.alpha) {
            return Err(invalid("alpha", format!("must lie in [1, 2], got {}", self.alpha)));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid("q", format!("must lie in (0, 1), got {}", self.q)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("C", format!("must be positive, got {}", self.c)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurseCondition {
    pub holds: bool,
    /// Maximum of `min{A_d √d L, B_d d L²}` over the tail of the grid.
    pub witness: f64,
    /// Least-squares slope of `ln w_d` against `ln d` over the tail; `None`
    /// when the tail has fewer than two positive values.
    pub tail_slope: Option<f64>,
    pub grid: Vec<usize>,
    /// The upper half of the grid standing in for the limsup.
    pub tail: Vec<usize>,
    /// `min{A_d √d L, B_d d L²}` per grid point.
    pub terms: Vec<f64>,
}

/// Evaluate the curse condition on a finite increasing grid of bodies.
///
/// The limsup is replaced by the maximum over the upper half of the grid.
/// Because any positive sequence has a positive maximum on a finite grid,
/// the condition additionally requires that the tail does not decay: its
/// log-log slope must be at least [`DECAY_SLOPE_THRESHOLD`].
pub fn curse_condition(a_seq: &[f64], b_seq: &[f64], bodies: &[PBallBody]) -> Result<CurseCondition> {
    if bodies.is_empty() {
        return Err(invalid("bodies", "grid must not be empty"));
    }
    for (name, seq) in [("A_seq", a_seq), ("B_seq", b_seq)] {
        if seq.len() != bodies.len() {
            return Err(Error::DimensionMismatch {
                expected: bodies.len(),
                got: seq.len(),
            });
        }
        if let Some(v) = seq.iter().find(|v| !(**v >= 0.0)) {
            return Err(invalid(name, format!("entries must be >= 0, got {v}")));
        }
    }
    if bodies.windows(2).any(|w| w[1].d() <= w[0].d()) {
        return Err(invalid("bodies", "dimensions must be strictly increasing"));
    }
    let terms: Vec<f64> = a_seq
        .iter()
        .zip(b_seq)
        .zip(bodies)
        .map(|((a, b), body)| condition_term(*a, *b, body))
        .collect();
    let start = bodies.len() / 2;
    let tail: Vec<usize> = bodies[start..].iter().map(|b| b.d()).collect();
    let witness = terms[start..].iter().copied().fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = tail
        .iter()
        .zip(&terms[start..])
        .filter(|(_, w)| **w > 0.0)
        .map(|(d, w)| ((*d as f64).ln(), w.ln()))
        .unzip();
    let tail_slope = least_squares(&xs, &ys).map(|(s, _)| s);
    let holds = witness > WITNESS_THRESHOLD && tail_slope.is_none_or(|s| s >= DECAY_SLOPE_THRESHOLD);
    Ok(CurseCondition {
        holds,
        witness,
        tail_slope,
        grid: bodies.iter().map(|b| b.d()).collect(),
        tail,
        terms,
    })
}

/// [`curse_condition`] for closed-form sequences on `D_p^d`, `d` in `dims`.
pub fn curse_condition_for(a: &SequenceSpec, b: &SequenceSpec, p: Exponent, dims: &[usize]) -> Result<CurseCondition> {
    let bodies = dims.iter().map(|&d| PBallBody::new(d, p)).collect::<Result<Vec<_>>>()?;
    let a_seq: Vec<f64> = bodies.iter().map(|k| a.eval(k.d(), k.isotropic_constant())).collect();
    let b_seq: Vec<f64> = bodies.iter().map(|k| b.eval(k.d(), k.isotropic_constant())).collect();
    curse_condition(&a_seq, &b_seq, &bodies)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCount {
    pub d: usize,
    /// `d^{α/2}`.
    pub exponent: f64,
    pub log10_count: f64,
    /// The count itself when it fits in an `f64`.
    pub count: Option<f64>,
}

/// `(1-ε) C^{-1} q^{-d^{α/2}}`, evaluated in log space.
pub fn lower_bound_count(params: &BoundParameters, d: usize) -> Result<LowerBoundCount> {
    params.validate()?;
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let exponent = (d as f64).powf(params.alpha / 2.0);
    let ln_count = (-params.epsilon).ln_1p() - params.c.ln() - exponent * params.q.ln();
    let count = ln_count.exp();
    Ok(LowerBoundCount {
        d,
        exponent,
        log10_count: ln_count / std::f64::consts::LN_10,
        count: count.is_finite().then_some(count),
    })
}

/// How `I_1 = ∫ ||x||_2` enters the trivial-algorithm bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FirstMoment {
    /// `I_1 <= sqrt(I_2) = √d L`.
    Bound,
    /// Monte Carlo estimate.
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivialAlgorithmError {
    pub bound_a: f64,
    pub bound_b: f64,
    pub combined: f64,
    pub i1: f64,
    /// `d L²`, exact.
    pub i2: f64,
}

/// Worst-case error bounds for the one-point rule `f ↦ f(0)` on the class.
pub fn trivial_algorithm_error(class: &SmoothnessClass, first_moment: FirstMoment) -> Result<TrivialAlgorithmError> {
    let l = class.body.isotropic_constant();
    let i2 = class.body.d() as f64 * l * l;
    let i1 = match first_moment {
        FirstMoment::Bound => i2.sqrt(),
        FirstMoment::MonteCarlo { n, seed } => moment_integral(&class.body, 1.0, n, seed)?.estimate,
    };
    let bound_a = class.a * i1;
    let bound_b = class.b * i2;
    Ok(TrivialAlgorithmError {
        bound_a,
        bound_b,
        combined: bound_a.min(bound_b),
        i1,
        i2,
    })
}

/// `n(ε, M F) = n(M ε, F)`: the error level at which the unscaled class is
/// queried. Requires `M >= 1` and `0 < ε < 1/M`.
pub fn scaling_reduction(m: f64, epsilon: f64) -> Result<f64> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(invalid("M", format!("must be finite and >= 1, got {m}")));
    }
    if !(epsilon > 0.0 && epsilon * m < 1.0) {
        return Err(invalid(
            "epsilon",
            format!("must lie in (0, 1/M) = (0, {}), got {epsilon}", 1.0 / m),
        ));
    }
    Ok(m * epsilon)
}

/// `ε_0 = 1/(2M)`.
pub fn epsilon_zero(m: f64) -> Result<f64> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(invalid("M", format!("must be finite and >= 1, got {m}")));
    }
    Ok(0.5 / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryTrial {
    pub integral: McEstimate,
    /// `n vol(K ∩ r_d√d B_2)` on the same sample stream.
    pub union_bound: McEstimate,
    pub certified: bool,
    pub approximate_solves: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub body: PBallBody,
    pub n_points: usize,
    pub delta: f64,
    /// Minimum `∫ f` over trials.
    pub error: McEstimate,
    pub trials: Vec<AdversaryTrial>,
    pub all_certified: bool,
}

/// For `trials` random point sets of `n_points` uniform points, build the
/// fooling function, certify its smoothness and estimate `∫ f` with `mc_n`
/// samples. Returns the smallest integral: a lower bound on the error of
/// any rule using those nodes.
pub fn empirical_adversary_error(
    body: &PBallBody,
    n_points: usize,
    delta: f64,
    trials: usize,
    mc_n: usize,
    seed: u64,
) -> Result<AdversaryReport> {
    let window = admissible_delta(body)?;
    if !window.admits(delta) {
        return Err(invalid(
            "delta",
            format!("{delta} is outside the admissible window (0, {})", window.upper),
        ));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let settings = CertificationSettings::default();
    let results = map_tasks(trials, |t| -> Result<AdversaryTrial> {
        let t = t as u64;
        let points = random_point_set(body, n_points, derive_seed(seed, 1, t))?;
        let f = FoolingFunction::new(*body, points, delta, HullSolver::default())?;
        let cert = f.certify(&settings, derive_seed(seed, 3, t))?;
        let b = fooling_integral(&f, mc_n, derive_seed(seed, 2, t))?;
        Ok(AdversaryTrial {
            integral: b.integral_estimate,
            union_bound: b.extension.union_bound,
            certified: cert.holds(),
            approximate_solves: b.approximate_solves,
        })
    });
    let trials: Vec<AdversaryTrial> = results.into_iter().collect::<Result<_>>()?;
    let error = trials
        .iter()
        .map(|t| t.integral)
        .fold(None::<McEstimate>, |best, cur| match best {
            Some(b) if b.estimate <= cur.estimate => Some(b),
            _ => Some(cur),
        })
        .expect("trials >= 1");
    Ok(AdversaryReport {
        body: *body,
        n_points,
        delta,
        error,
        all_certified: trials.iter().all(|t| t.certified),
        trials,
    })
}
