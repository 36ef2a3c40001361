//! Log-gamma and digamma.
//!
//! `ln_gamma` shifts its argument above [`STIRLING_MIN`] with the recurrence
//! `Γ(x+1) = xΓ(x)` and then evaluates the Stirling series. `digamma` sums
//! the series `ψ(1+x) = -γ + Σ_k x/(k(k+x))` with Kahan compensation and
//! closes it with an Euler-Maclaurin tail.

use crate::error::{invalid, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Arguments at or above this value go straight to the Stirling series.
const STIRLING_MIN: f64 = 10.0;

/// `B_{2k} / (2k (2k-1))` for k = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Target for the Euler-Maclaurin remainder of the digamma tail.
const DIGAMMA_TAIL_TOL: f64 = 1e-16;

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn stirling_series(z: f64) -> f64 {
    let inv = z.recip();
    let inv2 = inv * inv;
    // Horner in 1/z^2, innermost coefficient first.
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 1.0;
    let mut log_shift = 0.0;
    while z < STIRLING_MIN {
        shift *= z;
        z += 1.0;
        // Keep the product comfortably inside f64 range.
        if shift > 1e280 {
            log_shift += shift.ln();
            shift = 1.0;
        }
    }
    log_shift += shift.ln();
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_series(z) - log_shift
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln Γ(x + a) - ln Γ(x + b)` without forming the two large logarithms
/// separately when both arguments are large.
pub fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> Result<f64> {
    let z1 = x + a;
    let z2 = x + b;
    if !(z1 > 0.0 && z2 > 0.0) || !z1.is_finite() || !z2.is_finite() {
        return Err(invalid(
            "x",
            format!("ln_gamma_ratio requires positive arguments, got {z1} and {z2}"),
        ));
    }
    Ok(ln_gamma_ratio_unchecked(x, a, b))
}

pub(crate) fn ln_gamma_ratio_unchecked(x: f64, a: f64, b: f64) -> f64 {
    let z1 = x + a;
    let z2 = x + b;
    if z1.min(z2) < STIRLING_MIN {
        return ln_gamma_unchecked(z1) - ln_gamma_unchecked(z2);
    }
    let delta = a - b;
    // (z1 - 1/2) ln z1 - (z2 - 1/2) ln z2 - (z1 - z2)
    let main = delta * z2.ln() + (z1 - 0.5) * (delta / z2).ln_1p() - delta;
    main + stirling_series(z1) - stirling_series(z2)
}

/// Digamma `ψ(1 + x)` for `x >= 0` from the series
/// `-γ + Σ_{k>=1} x / (k (k + x))`.
///
/// The first `N` terms are summed explicitly, the remainder
/// `Σ_{k>N} (1/k - 1/(k+x))` is closed with Euler-Maclaurin through the
/// `B_6` term. `N` is the smallest count whose remainder bound
/// `1 / (240 (N+1)^8)` is below `1e-16`.
pub fn digamma_one_plus(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(
            "x",
            format!("digamma_one_plus requires finite x >= 0, got {x}"),
        ));
    }
    Ok(digamma_one_plus_unchecked(x))
}

pub(crate) fn digamma_terms() -> usize {
    ((240.0 * DIGAMMA_TAIL_TOL).recip().powf(0.125).ceil() as usize).max(2) - 1
}

fn digamma_one_plus_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return -EULER_GAMMA;
    }
    let n = digamma_terms();
    let mut sum = KahanSum::new();
    sum.add(-EULER_GAMMA);
    for k in 1..=n {
        let k = k as f64;
        sum.add(x / (k * (k + x)));
    }
    // Euler-Maclaurin for Σ_{k>=a} f(k), f(k) = 1/k - 1/(k+x).
    let a = (n + 1) as f64;
    let b = a + x;
    let integral = (x / a).ln_1p();
    let f = x / (a * b);
    let d1 = -a.powi(-2) + b.powi(-2);
    let d3 = -6.0 * a.powi(-4) + 6.0 * b.powi(-4);
    let d5 = -120.0 * a.powi(-6) + 120.0 * b.powi(-6);
    let tail = integral + 0.5 * f - d1 / 12.0 + d3 / 720.0 - d5 / 30_240.0;
    sum.add(tail);
    sum.value()
}

/// Digamma `ψ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", format!("digamma requires finite x > 0, got {x}")));
    }
    Ok(digamma_one_plus_unchecked(x) - x.recip())
}

/// `ln Γ(x+1) - ln Γ(x+λ) - (1-λ) ln x`; Gautschi's inequality states this
/// is nonnegative for `x > 0`, `λ ∈ (0, 1)`.
pub fn gautschi_gap(x: f64, lambda: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("x", format!("must be positive, got {x}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    Ok(ln_gamma_ratio_unchecked(x, 1.0, lambda) - (1.0 - lambda) * x.ln())
}
