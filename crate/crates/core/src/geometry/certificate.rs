//! Numerical certificate for the monotonicity argument behind
//! `limsup rad(D_p^d) / (sqrt(d) L) <= sqrt(3)`.
//!
//! With `x = 1/p`, `ln h = ln Γ(1+x) - ln Γ(1+3x) + 2x ln x` and
//! `-d/dx ln h = f(x) = 3ψ(1+3x) - ψ(1+x) - 2 ln x - 2`. The certificate
//! checks `h` increasing in `p`, `f > 0` and the auxiliary lower bound
//! `g(x) = -2 ln x + 3 ln(1+3x) - ln(1+x) > 2γ + 2` on a grid.

use serde::{Deserialize, Serialize};

use super::special::{digamma_one_plus, ln_gamma, EULER_GAMMA};
use super::Exponent;
use crate::error::{invalid, Result};

/// `h(p) = Γ(1+1/p) / Γ(1+3/p) · p^{-2/p}`, with `h(∞) = 1`. For `p >= 2`
/// the large-`d` radius ratio of `D_p^d` is at most `sqrt(3 h(p))`.
pub fn radius_factor_h(p: Exponent) -> Result<f64> {
    Ok(ln_radius_factor_h(p)?.exp())
}

fn ln_radius_factor_h(p: Exponent) -> Result<f64> {
    let x = p.recip();
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_gamma(1.0 + x)? - ln_gamma(1.0 + 3.0 * x)? + 2.0 * x * x.ln())
}

fn derivative_f(x: f64) -> Result<f64> {
    Ok(3.0 * digamma_one_plus(3.0 * x)? - digamma_one_plus(x)? - 2.0 * x.ln() - 2.0)
}

fn auxiliary_g(x: f64) -> f64 {
    -2.0 * x.ln() + 3.0 * (3.0 * x).ln_1p() - x.ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCertificate {
    pub p_grid: Vec<f64>,
    pub h: Vec<f64>,
    /// First grid index `i` with `h[i] <= h[i-1]`.
    pub first_violation: Option<usize>,
    /// Minimum of `f(1/p)` over the grid.
    pub min_f: f64,
    /// Minimum of `g(1/p)` over the grid.
    pub min_g: f64,
    /// `g` evaluated at the largest `x` probed (`x = 1e3`), approaching `ln 27`.
    pub g_far: f64,
    /// `lim_{x→∞} g(x) = ln 27`.
    pub g_limit: f64,
    /// `2γ + 2`.
    pub g_threshold: f64,
    /// `h(p_max)`, approaching 1.
    pub h_at_max: f64,
}

impl MonotonicityCertificate {
    pub fn h_increasing(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn f_positive(&self) -> bool {
        self.min_f > 0.0
    }

    pub fn g_above_threshold(&self) -> bool {
        self.min_g > self.g_threshold && self.g_limit > self.g_threshold
    }

    pub fn holds(&self) -> bool {
        self.h_increasing() && self.f_positive() && self.g_above_threshold()
    }
}

/// Evaluate the certificate on `grid` log-spaced exponents in `[p_min, p_max]`.
pub fn monotonicity_certificate(p_min: f64, p_max: f64, grid: usize) -> Result<MonotonicityCertificate> {
    if !(p_min >= 2.0) {
        return Err(invalid("p_min", format!("must be at least 2, got {p_min}")));
    }
    if !(p_max > p_min) || !p_max.is_finite() {
        return Err(invalid(
            "p_max",
            format!("must be finite and exceed p_min, got {p_max}"),
        ));
    }
    if grid < 2 {
        return Err(invalid("grid", format!("needs at least 2 points, got {grid}")));
    }
    let (lo, hi) = (p_min.ln(), p_max.ln());
    let p_grid: Vec<f64> = (0..grid)
        .map(|i| {
            if i + 1 == grid {
                p_max
            } else {
                (lo + (hi - lo) * i as f64 / (grid - 1) as f64).exp()
            }
        })
        .collect();

    let mut ln_h = Vec::with_capacity(grid);
    let mut min_f = f64::INFINITY;
    let mut min_g = f64::INFINITY;
    for &p in &p_grid {
        ln_h.push(ln_radius_factor_h(Exponent::Finite(p))?);
        let x = p.recip();
        min_f = min_f.min(derivative_f(x)?);
        min_g = min_g.min(auxiliary_g(x));
    }
    let first_violation = ln_h.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1);
    let h: Vec<f64> = ln_h.iter().map(|v| v.exp()).collect();
    let h_at_max = *h.last().expect("grid >= 2");

    Ok(MonotonicityCertificate {
        p_grid,
        h,
        first_violation,
        min_f,
        min_g,
        g_far: auxiliary_g(1e3),
        g_limit: 27f64.ln(),
        g_threshold: 2.0 * EULER_GAMMA + 2.0,
        h_at_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_limit_exceeds_threshold() {
        let c = monotonicity_certificate(2.0, 100.0, 10).unwrap();
        assert!((c.g_limit - 3.295_836_866_004_329).abs() < 1e-15);
        assert!((c.g_threshold - 3.154_431_329_803_066).abs() < 1e-15);
        assert!((c.g_far - c.g_limit).abs() < 1e-6);
        assert!(c.g_far > c.g_limit);
    }

    #[test]
    fn h_tends_to_one_and_orders_correctly() {
        let h2 = radius_factor_h(Exponent::Finite(2.0)).unwrap();
        let h4 = radius_factor_h(Exponent::Finite(4.0)).unwrap();
        let h_big = radius_factor_h(Exponent::Finite(1e9)).unwrap();
        assert!(h2 < h4 && h4 < h_big && h_big < 1.0);
        assert!((h_big - 1.0).abs() < 1e-7);
        assert_eq!(radius_factor_h(Exponent::Infinity).unwrap(), 1.0);
        // h(2) = Γ(3/2)/Γ(5/2) / 2 = 1/3
        assert!((h2 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f_matches_series_form() {
        // f(x) = -2γ - 2 - 2 ln x + 2x Σ (4k+3x)/(k(k+x)(k+3x))
        for &x in &[0.5, 0.1, 0.01] {
            let mut s = 0.0;
            for k in 1..=2_000_000u64 {
                let k = k as f64;
                s += (4.0 * k + 3.0 * x) / (k * (k + x) * (k + 3.0 * x));
            }
            let series = -2.0 * EULER_GAMMA - 2.0 - 2.0 * x.ln() + 2.0 * x * s;
            // Truncation of the explicit sum leaves about 8x/N.
            assert!(
                (derivative_f(x).unwrap() - series).abs() < 8.0 * x / 2e6 + 1e-9,
                "x={x}"
            );
        }
    }

    #[test]
    fn f_is_minus_derivative_of_ln_h() {
        for &x in &[0.4, 0.05, 0.002] {
            let step = 1e-6 * x;
            let ln_h = |x: f64| ln_radius_factor_h(Exponent::Finite(1.0 / x)).unwrap();
            let fd = (ln_h(x + step) - ln_h(x - step)) / (2.0 * step);
            assert!((fd + derivative_f(x).unwrap()).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(monotonicity_certificate(1.5, 10.0, 5).is_err());
        assert!(monotonicity_certificate(4.0, 3.0, 5).is_err());
        assert!(monotonicity_certificate(2.0, 3.0, 1).is_err());
    }
}
