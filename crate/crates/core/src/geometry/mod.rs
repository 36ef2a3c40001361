//! Closed-form geometry of `l_p` balls and their volume-normalized
//! versions `D_p^d = B_p^d / vol(B_p^d)^{1/d}`.
//!
//! Every ratio of gamma functions is evaluated as a difference of
//! log-gammas; raw `Γ` values overflow long before the dimensions of
//! interest (`Γ(1 + d)` at `p = 1` overflows near `d = 170`).

mod certificate;
pub mod special;

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use special::{ln_gamma, ln_gamma_ratio_unchecked};

pub use certificate::{monotonicity_certificate, radius_factor_h, MonotonicityCertificate};

/// Lower bound `1/sqrt(2πe)` on the isotropic constant of any convex body,
/// attained asymptotically by the Euclidean ball.
pub const MIN_ISOTROPIC_CONSTANT: f64 = 0.241_970_724_519_143_37;

/// Threshold `sqrt(2/(πe))` of the older radial condition `rad(K_d)/sqrt(d)`.
pub const SMALL_RADIUS_THRESHOLD: f64 = 0.483_941_449_038_286_7;

/// Small-diameter threshold on `rad(K_d) / (sqrt(d) L_{K_d})`.
pub const SMALL_DIAMETER_THRESHOLD: f64 = 2.0;

/// Exponent `p ∈ [1, ∞]` of an `l_p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    /// `p` as a float, `f64::INFINITY` for the cube.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinity => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `||x||_p`.
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(2.0) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Exponent::Finite(p) => {
                // Scale by the max coordinate so |x_i|^p cannot overflow.
                let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(p.recip())
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("not an exponent: {t:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

fn check_dim(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(d as f64)
}

fn require_p_at_least_two(operation: &'static str, p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(v) if v < 2.0 => Err(Error::ExponentBelowTwo { operation, p: v }),
        _ => Ok(()),
    }
}

/// `ln vol_d(B_p^d) = d ln 2 + d ln Γ(1 + 1/p) - ln Γ(1 + d/p)`.
pub fn log_volume_ball(d: usize, p: Exponent) -> Result<f64> {
    let df = check_dim(d)?;
    match p {
        Exponent::Infinity => Ok(df * std::f64::consts::LN_2),
        Exponent::Finite(p) => {
            Ok(df * std::f64::consts::LN_2 + df * ln_gamma(1.0 + 1.0 / p)? - ln_gamma(1.0 + df / p)?)
        }
    }
}

/// Scale `α_{d,p} = vol_d(B_p^d)^{-1/d}` with `D_p^d = α_{d,p} B_p^d`.
pub fn scale_alpha(d: usize, p: Exponent) -> Result<f64> {
    let log_vol = log_volume_ball(d, p)?;
    Ok((-log_vol / d as f64).exp())
}

/// Normalized second moment `γ²_{d,p} = vol(B_p^d)^{-1} ∫_{B_p^d} x_1² dx`.
///
/// Closed form `p Γ(1+3/p) Γ(1+d/p) / [3 (d+2) Γ(1+1/p) Γ((d+2)/p)]`,
/// exactly `1/3` for the cube.
pub fn gamma2(d: usize, p: Exponent) -> Result<f64> {
    let df = check_dim(d)?;
    match p {
        Exponent::Infinity => Ok(1.0 / 3.0),
        Exponent::Finite(p) => {
            let x = df / p;
            let log = p.ln() + ln_gamma(1.0 + 3.0 / p)? - ln_gamma(1.0 + 1.0 / p)?
                + ln_gamma_ratio_unchecked(x, 1.0, 2.0 / p)
                - 3f64.ln()
                - (df + 2.0).ln();
            Ok(log.exp())
        }
    }
}

/// Lower bound `d/(3(d+2)) Γ(1+3/p)/Γ(1+1/p) (p/d)^{2/p}` on `γ²_{d,p}`,
/// valid for `p >= 2`.
pub fn gamma2_lower_bound(d: usize, p: Exponent) -> Result<f64> {
    let df = check_dim(d)?;
    require_p_at_least_two("gamma2_lower_bound", p)?;
    let lead = df / (3.0 * (df + 2.0));
    match p {
        Exponent::Infinity => Ok(lead),
        Exponent::Finite(p) => {
            let log = ln_gamma(1.0 + 3.0 / p)? - ln_gamma(1.0 + 1.0 / p)? + (2.0 / p) * (p / df).ln();
            Ok(lead * log.exp())
        }
    }
}

/// Isotropic constant `L_{D_p^d} = α_{d,p} γ_{d,p}`.
pub fn isotropic_constant(d: usize, p: Exponent) -> Result<f64> {
    Ok(scale_alpha(d, p)? * gamma2(d, p)?.sqrt())
}

/// Euclidean radius `rad(D_p^d) = α_{d,p} d^{max(1/2 - 1/p, 0)}`.
pub fn radius(d: usize, p: Exponent) -> Result<f64> {
    let df = check_dim(d)?;
    let exponent = (0.5 - p.recip()).max(0.0);
    Ok(scale_alpha(d, p)? * df.powf(exponent))
}

/// `rad(D_p^d) / (sqrt(d) L_{D_p^d}) = d^{-1/p} / γ_{d,p}` for `p >= 2`.
pub fn radius_ratio(d: usize, p: Exponent) -> Result<f64> {
    let df = check_dim(d)?;
    require_p_at_least_two("radius_ratio", p)?;
    Ok(df.powf(-p.recip()) / gamma2(d, p)?.sqrt())
}

/// Outcome of evaluating both radial conditions at one `(d, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallDiameterCheck {
    /// `rad / (sqrt(d) L)`.
    pub ratio: f64,
    /// `rad / sqrt(d)`.
    pub radius_per_sqrt_d: f64,
    /// `ratio < 2`.
    pub passes_small_diameter: bool,
    /// `rad / sqrt(d) < sqrt(2/(πe))`.
    pub passes_small_radius: bool,
}

pub fn small_diameter_check(d: usize, p: Exponent) -> Result<SmallDiameterCheck> {
    let ratio = radius_ratio(d, p)?;
    let radius_per_sqrt_d = radius(d, p)? / (d as f64).sqrt();
    Ok(SmallDiameterCheck {
        ratio,
        radius_per_sqrt_d,
        passes_small_diameter: ratio < SMALL_DIAMETER_THRESHOLD,
        passes_small_radius: radius_per_sqrt_d < SMALL_RADIUS_THRESHOLD,
    })
}

/// `lim_{d→∞} rad(D_p^d)/sqrt(d) = (p e)^{-1/p} / (2 Γ(1 + 1/p))` for `p >= 2`,
/// `1/2` for the cube.
pub fn radius_per_sqrt_d_limit(p: Exponent) -> Result<f64> {
    require_p_at_least_two("radius_per_sqrt_d_limit", p)?;
    match p {
        Exponent::Infinity => Ok(0.5),
        Exponent::Finite(p) => {
            let log = -(p * E).ln() / p - ln_gamma(1.0 + 1.0 / p)?;
            Ok(0.5 * log.exp())
        }
    }
}

/// Critical exponent `p_0` above which `D_p^d` violates the small-radius
/// condition `rad/sqrt(d) < sqrt(2/(πe))` for large `d` (about 170.5).
/// Found by bisection on [`radius_per_sqrt_d_limit`], which increases in `p`.
pub fn small_radius_critical_exponent() -> f64 {
    let excess = |p: f64| radius_per_sqrt_d_limit(Exponent::Finite(p)).expect("p >= 2") - SMALL_RADIUS_THRESHOLD;
    let (mut lo, mut hi) = (2.0f64, 1e6f64);
    debug_assert!(excess(lo) < 0.0 && excess(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// An isotropic convex body as seen by the fooling-function machinery.
pub trait IsotropicBody {
    fn dim(&self) -> usize;
    fn isotropic_constant(&self) -> f64;
    /// Euclidean circumradius about the origin.
    fn radius(&self) -> f64;

    /// `rad(K) / (sqrt(d) L_K)`.
    fn diameter_ratio(&self) -> f64 {
        self.radius() / ((self.dim() as f64).sqrt() * self.isotropic_constant())
    }
}

/// The volume-normalized ball `D_p^d` with its derived constants cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PBallBody {
    d: usize,
    p: Exponent,
    log_volume: f64,
    alpha: f64,
    gamma2: f64,
    isotropic_constant: f64,
    radius: f64,
}

impl PBallBody {
    pub fn new(d: usize, p: Exponent) -> Result<Self> {
        let log_volume = log_volume_ball(d, p)?;
        let alpha = (-log_volume / d as f64).exp();
        let gamma2 = gamma2(d, p)?;
        let exponent = (0.5 - p.recip()).max(0.0);
        Ok(Self {
            d,
            p,
            log_volume,
            alpha,
            gamma2,
            isotropic_constant: alpha * gamma2.sqrt(),
            radius: alpha * (d as f64).powf(exponent),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    /// `ln vol_d(B_p^d)` of the unit ball.
    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    /// Scale `α_{d,p}`; `D_p^d = {x : ||x||_p <= α}`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn isotropic_constant(&self) -> f64 {
        self.isotropic_constant
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.p.norm(x)
    }

    /// Membership in `D_p^d` with an absolute slack on the `p`-norm.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.len() == self.d && self.norm(x) <= self.alpha + slack
    }

    pub fn radius_ratio(&self) -> Result<f64> {
        radius_ratio(self.d, self.p)
    }

    pub fn small_diameter_check(&self) -> Result<SmallDiameterCheck> {
        small_diameter_check(self.d, self.p)
    }
}

impl IsotropicBody for PBallBody {
    fn dim(&self) -> usize {
        self.d
    }

    fn isotropic_constant(&self) -> f64 {
        self.isotropic_constant
    }

    fn radius(&self) -> f64 {
        self.radius
    }
}

/// `sqrt(2/(πe))` and `1/sqrt(2πe)` recomputed from `π` and `e`; used to
/// cross-check the literal constants.
#[cfg(test)]
pub(crate) fn reference_thresholds() -> (f64, f64) {
    (
        (2.0 / (std::f64::consts::PI * E)).sqrt(),
        (2.0 * std::f64::consts::PI * E).sqrt().recip(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI, SQRT_2};

    const INF: Exponent = Exponent::Infinity;

    fn fin(p: f64) -> Exponent {
        Exponent::Finite(p)
    }

    #[test]
    fn constants_agree_with_their_definitions() {
        let (small_radius, min_l) = reference_thresholds();
        assert!((small_radius - SMALL_RADIUS_THRESHOLD).abs() < 1e-16);
        assert!((min_l - MIN_ISOTROPIC_CONSTANT).abs() < 1e-16);
        assert!((SMALL_RADIUS_THRESHOLD - 2.0 * MIN_ISOTROPIC_CONSTANT).abs() < 1e-16);
    }

    #[test]
    fn exponent_parsing_and_validation() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), INF);
        assert_eq!("∞".parse::<Exponent>().unwrap(), INF);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), fin(2.5));
        assert!("0.5".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert_eq!(Exponent::new(f64::INFINITY).unwrap(), INF);
        let json = serde_json::to_string(&vec![fin(3.0), INF]).unwrap();
        assert_eq!(json, r#"[3.0,"inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![fin(3.0), INF]);
    }

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(fin(1.0).norm(&x), 7.0);
        assert_eq!(fin(2.0).norm(&x), 5.0);
        assert_eq!(INF.norm(&x), 4.0);
        assert!((fin(3.0).norm(&x) - 91f64.cbrt()).abs() < 1e-14);
        let big = [1e200, 1e200];
        assert!((fin(4.0).norm(&big) - 1e200 * 2f64.powf(0.25)).abs() < 1e186);
    }

    #[test]
    fn log_volume_reference_values() {
        assert!((log_volume_ball(2, fin(2.0)).unwrap() - PI.ln()).abs() < 1e-14);
        for &p in &[1.0, 1.5, 2.0, 7.0] {
            assert!((log_volume_ball(1, fin(p)).unwrap() - LN_2).abs() < 1e-14);
        }
        assert!((log_volume_ball(3, fin(1.0)).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert_eq!(log_volume_ball(5, INF).unwrap(), 5.0 * LN_2);
    }

    #[test]
    fn log_volume_is_finite_far_past_gamma_overflow() {
        let v = log_volume_ball(10_000, fin(1.0)).unwrap();
        // 2^d / d!
        let want: f64 = 10_000.0 * LN_2 - (1..=10_000).map(|k| (k as f64).ln()).sum::<f64>();
        assert!(((v - want) / want).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(log_volume_ball(0, fin(2.0)), Err(Error::InvalidDimension(0))));
        assert!(Exponent::new(0.9).is_err());
        assert!(gamma2_lower_bound(4, fin(1.5)).is_err());
        assert!(radius_ratio(4, fin(1.0)).is_err());
    }

    #[test]
    fn gamma2_cube_and_euclidean() {
        for d in [1, 7, 100, 1_000_000] {
            assert_eq!(gamma2(d, INF).unwrap(), 1.0 / 3.0);
        }
        assert!((gamma2(4, fin(2.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((gamma2(1, fin(3.0)).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gamma2_cross_polytope_matches_grid_quadrature() {
        // ∫_{B_1^3} x_1^2 dx / vol(B_1^3) by midpoint rule on a grid;
        // the slice at x_1 = t has area 2 (1 - |t|)^2.
        let m = 200_000;
        let h = 2.0 / m as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..m {
            let t: f64 = -1.0 + (i as f64 + 0.5) * h;
            let area = 2.0 * (1.0 - t.abs()).powi(2);
            num += t * t * area * h;
            den += area * h;
        }
        let got = gamma2(3, fin(1.0)).unwrap();
        assert!((got - num / den).abs() < 1e-8, "{got} vs {}", num / den);
        assert!((got - 0.1).abs() < 1e-14);
    }

    #[test]
    fn isotropic_constant_of_unit_interval() {
        // D_inf^1 = [-1/2, 1/2]; ∫ x^2 = 1/12.
        let l = isotropic_constant(1, INF).unwrap();
        assert!((l * l - 1.0 / 12.0).abs() < 1e-16);
        let l = isotropic_constant(1, fin(2.0)).unwrap();
        assert!((l * l - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_constant_of_euclidean_ball_converges_to_minimum() {
        let l4 = isotropic_constant(10_000, fin(2.0)).unwrap();
        let l5 = isotropic_constant(100_000, fin(2.0)).unwrap();
        assert!(l4 > l5 && l5 > MIN_ISOTROPIC_CONSTANT);
        assert!((l5 - MIN_ISOTROPIC_CONSTANT).abs() < (l4 - MIN_ISOTROPIC_CONSTANT).abs());
        assert!((l5 - MIN_ISOTROPIC_CONSTANT).abs() < 1e-4);
    }

    #[test]
    fn gamma2_lower_bound_holds_and_has_cube_limit() {
        assert!(gamma2_lower_bound(10, fin(2.0)).unwrap() <= 1.0 / 12.0);
        assert!(gamma2_lower_bound(6, fin(4.0)).unwrap() <= gamma2(6, fin(4.0)).unwrap());
        let d = 12;
        let limit = d as f64 / (3.0 * (d as f64 + 2.0));
        assert_eq!(gamma2_lower_bound(d, INF).unwrap(), limit);
        assert!((gamma2_lower_bound(d, fin(1e9)).unwrap() - limit).abs() < 1e-7);
    }

    #[test]
    fn radius_ratio_closed_forms() {
        for d in [1, 2, 10, 1000, 1_000_000] {
            assert!((radius_ratio(d, INF).unwrap() - 3f64.sqrt()).abs() < 1e-12);
            let want = (1.0 + 2.0 / d as f64).sqrt();
            assert!((radius_ratio(d, fin(2.0)).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn small_diameter_check_regimes() {
        let c = small_diameter_check(100, INF).unwrap();
        assert!(c.passes_small_diameter && !c.passes_small_radius);
        let c = small_diameter_check(100_000, fin(2.0)).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-4);
        assert!(c.passes_small_diameter && c.passes_small_radius);
        let c = small_diameter_check(1_000_000, fin(1000.0)).unwrap();
        assert!(c.passes_small_diameter && !c.passes_small_radius);
        let c = small_diameter_check(1_000_000, fin(100.0)).unwrap();
        assert!(c.passes_small_radius);
    }

    #[test]
    fn critical_exponent_of_small_radius_condition() {
        let p0 = small_radius_critical_exponent();
        assert!((p0 - 170.5186).abs() < 5e-5, "p0 = {p0}");
        assert!(radius_per_sqrt_d_limit(fin(p0 - 1.0)).unwrap() < SMALL_RADIUS_THRESHOLD);
        assert!(radius_per_sqrt_d_limit(fin(p0 + 1.0)).unwrap() > SMALL_RADIUS_THRESHOLD);
    }

    #[test]
    fn body_caches_consistent_values() {
        let b = PBallBody::new(6, fin(3.0)).unwrap();
        assert_eq!(b.alpha(), scale_alpha(6, fin(3.0)).unwrap());
        assert!((b.isotropic_constant() - isotropic_constant(6, fin(3.0)).unwrap()).abs() < 1e-16);
        assert!((b.radius() - radius(6, fin(3.0)).unwrap()).abs() < 1e-16);
        let on_axis = [b.alpha(), 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(b.contains(&on_axis, 1e-12));
        assert!(!b.contains(&[b.alpha() * 1.01, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12));
        let cube = PBallBody::new(2, INF).unwrap();
        assert_eq!(cube.alpha(), 0.5);
        assert!((cube.radius() - SQRT_2 / 2.0).abs() < 1e-16);
    }
}
