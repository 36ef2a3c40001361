//! Empirical thin-shell tails, intersection volumes `vol(K ∩ r√d B_2)`,
//! moment integrals `I_q = ∫_K ||x||_2^q dx` and `psi_alpha` norms.
//!
//! Every estimate streams samples chunk by chunk (see [`crate::parallel`]),
//! so a report is a deterministic function of its inputs and seed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Exponent, PBallBody};
use crate::io::{fmt_f64, Table};
use crate::parallel::{merge_tallies, Tally};
use crate::sampling::{map_sample_chunks, Measure, PointSampler};

/// Smallest sample count accepted by [`thin_shell_report`].
pub const MIN_REPORT_SAMPLES: usize = 10_000;

/// Relative tolerance of the `psi_alpha` bisection.
pub const PSI_RELATIVE_TOLERANCE: f64 = 1e-6;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            estimate: value,
            stderr: 0.0,
            n: 0,
        }
    }

    /// Proportion `hits / n` with binomial standard error.
    pub fn proportion(hits: u64, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    fn from_tally(t: &Tally) -> Self {
        Self {
            estimate: t.mean(),
            stderr: t.stderr(),
            n: t.count as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    /// `||X||_2 >= (1+t) sqrt(d)`.
    Upper,
    /// `||X||_2 <= (1-t) sqrt(d)`.
    Lower,
}

impl std::fmt::Display for TailSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailSide::Upper => "upper",
            TailSide::Lower => "lower",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub side: TailSide,
    pub probability: f64,
    pub stderr: f64,
    pub count: u64,
    /// No sample hit the event; the true probability is only known to be `< 1/n`.
    pub below_resolution: bool,
}

impl TailRow {
    /// The probability, or `"< 1/n"` for empty tails.
    pub fn display_probability(&self, n: usize) -> String {
        if self.below_resolution {
            format!("< {}", fmt_f64(1.0 / n as f64))
        } else {
            fmt_f64(self.probability)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub body: PBallBody,
    pub n: usize,
    pub seed: u64,
    /// `E ||X||_2 / sqrt(d)` for isotropic `X`.
    pub mean_norm_ratio: f64,
    pub mean_norm_ratio_stderr: f64,
    pub tail_table: Vec<TailRow>,
    /// Orlicz exponent used for `b_alpha`: `min(p, 2)`.
    pub psi_alpha: f64,
    /// Empirical `psi_alpha` constant of `<X, e_1>`.
    pub b_alpha: f64,
    /// `d / b_alpha^2`.
    pub eta: f64,
}

impl ConcentrationReport {
    pub fn tail(&self, t: f64, side: TailSide) -> Option<&TailRow> {
        self.tail_table.iter().find(|r| r.t == t && r.side == side)
    }

    pub const CSV_HEADER: [&'static str; 10] = [
        "d",
        "p",
        "t",
        "side",
        "probability",
        "stderr",
        "count",
        "n",
        "mean_norm_ratio",
        "eta",
    ];

    /// One row per `(d, p, t, side)`.
    pub fn append_rows(&self, table: &mut Table) {
        for row in &self.tail_table {
            table.push(vec![
                self.body.d().to_string(),
                self.body.p().to_string(),
                fmt_f64(row.t),
                row.side.to_string(),
                row.display_probability(self.n),
                fmt_f64(row.stderr),
                row.count.to_string(),
                self.n.to_string(),
                fmt_f64(self.mean_norm_ratio),
                fmt_f64(self.eta),
            ]);
        }
    }
}

#[derive(Default)]
struct ShellChunk {
    norms: Tally,
    upper: Vec<u64>,
    lower: Vec<u64>,
    first_coordinate: Vec<f64>,
}

/// Tail probabilities of `||X||_2` around `sqrt(d)` for isotropic `X`.
///
/// Lower tails are reported only for `t <= 1`.
pub fn thin_shell_report(body: &PBallBody, t_grid: &[f64], n: usize, seed: u64) -> Result<ConcentrationReport> {
    if n < MIN_REPORT_SAMPLES {
        return Err(invalid(
            "n",
            format!("thin-shell reports need n >= {MIN_REPORT_SAMPLES}, got {n}"),
        ));
    }
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "must not be empty"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(invalid("t_grid", format!("values must be finite and >= 0, got {t}")));
    }
    let d = body.d();
    let sqrt_d = (d as f64).sqrt();
    let upper_cut: Vec<f64> = t_grid.iter().map(|t| (1.0 + t) * sqrt_d).collect();
    let lower_cut: Vec<f64> = t_grid.iter().map(|t| (1.0 - t) * sqrt_d).collect();

    let sampler = PointSampler::new(*body, Measure::IsotropicRescaled)?;
    let chunks = map_sample_chunks(&sampler, n, seed, |rows, m| {
        let mut c = ShellChunk {
            upper: vec![0; t_grid.len()],
            lower: vec![0; t_grid.len()],
            first_coordinate: Vec::with_capacity(m),
            ..Default::default()
        };
        for x in rows.chunks_exact(d) {
            let r = euclidean_norm(x);
            c.norms.push(r / sqrt_d);
            c.first_coordinate.push(x[0]);
            for k in 0..t_grid.len() {
                c.upper[k] += u64::from(r >= upper_cut[k]);
                c.lower[k] += u64::from(r <= lower_cut[k]);
            }
        }
        c
    });

    let norms = merge_tallies(chunks.iter().map(|c| &c.norms));
    let mut tail_table = Vec::with_capacity(2 * t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        let mut push = |side, count: u64| {
            let est = McEstimate::proportion(count, n);
            tail_table.push(TailRow {
                t,
                side,
                probability: est.estimate,
                stderr: est.stderr,
                count,
                below_resolution: count == 0,
            });
        };
        push(TailSide::Upper, chunks.iter().map(|c| c.upper[k]).sum());
        if t <= 1.0 {
            push(TailSide::Lower, chunks.iter().map(|c| c.lower[k]).sum());
        }
    }

    let psi_alpha = match body.p() {
        Exponent::Finite(p) => p.min(2.0),
        Exponent::Infinity => 2.0,
    };
    let coords: Vec<f64> = chunks.into_iter().flat_map(|c| c.first_coordinate).collect();
    let psi = psi_norm_of_values(&coords, psi_alpha)?;

    Ok(ConcentrationReport {
        body: *body,
        n,
        seed,
        mean_norm_ratio: norms.mean(),
        mean_norm_ratio_stderr: norms.stderr(),
        tail_table,
        psi_alpha,
        b_alpha: psi.constant,
        eta: d as f64 / (psi.constant * psi.constant),
    })
}

/// Least-squares line `y = slope * x + intercept`; `None` with fewer than
/// two distinct abscissae.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t: f64,
    pub side: TailSide,
    /// Dimensions with a nonzero empirical tail, in input order.
    pub dims: Vec<usize>,
    /// Slope of `ln P` against `d`.
    pub slope: f64,
    pub intercept: f64,
}

/// Fit `ln P(tail) ≈ slope * d + intercept` across reports. Dimensions whose
/// tail is below Monte Carlo resolution are left out.
pub fn tail_decay_fit(reports: &[ConcentrationReport], t: f64, side: TailSide) -> Option<DecayFit> {
    let (mut dims, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for r in reports {
        if let Some(row) = r.tail(t, side).filter(|row| !row.below_resolution) {
            dims.push(r.body.d());
            xs.push(r.body.d() as f64);
            ys.push(row.probability.ln());
        }
    }
    let (slope, intercept) = least_squares(&xs, &ys)?;
    Some(DecayFit {
        t,
        side,
        dims,
        slope,
        intercept,
    })
}

/// `vol(D_p^d ∩ r sqrt(d) B_2^d)`: the fraction of uniform points of the
/// volume-one body with `||x||_2 <= r sqrt(d)`.
pub fn intersection_volume(body: &PBallBody, r: f64, n: usize, seed: u64) -> Result<McEstimate> {
    Ok(intersection_volumes(body, &[r], n, seed)?[0])
}

/// [`intersection_volume`] for several radii on one shared sample.
pub fn intersection_volumes(body: &PBallBody, radii: &[f64], n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0)) {
        return Err(invalid("r", format!("must be >= 0, got {r}")));
    }
    let sqrt_d = (body.d() as f64).sqrt();
    let exact: Vec<Option<f64>> = radii
        .iter()
        .map(|&r| {
            if r == 0.0 {
                Some(0.0)
            } else if r * sqrt_d >= body.radius() {
                Some(1.0)
            } else {
                None
            }
        })
        .collect();
    if exact.iter().all(Option::is_some) {
        return Ok(exact.iter().map(|v| McEstimate::exact(v.unwrap())).collect());
    }
    check_samples(n)?;
    let cuts: Vec<f64> = radii.iter().map(|r| r * sqrt_d).collect();
    let sampler = PointSampler::new(*body, Measure::UniformNormalized)?;
    let counts = map_sample_chunks(&sampler, n, seed, |rows, _| {
        let mut hits = vec![0u64; cuts.len()];
        for x in rows.chunks_exact(body.d()) {
            let norm = euclidean_norm(x);
            for (h, c) in hits.iter_mut().zip(&cuts) {
                *h += u64::from(norm <= *c);
            }
        }
        hits
    });
    Ok(exact
        .iter()
        .enumerate()
        .map(|(k, e)| match e {
            Some(v) => McEstimate::exact(*v),
            None => McEstimate::proportion(counts.iter().map(|h| h[k]).sum(), n),
        })
        .collect())
}

/// `I_q(D_p^d) = ∫ ||x||_2^q dx` over the volume-one body.
pub fn moment_integral(body: &PBallBody, q: f64, n: usize, seed: u64) -> Result<McEstimate> {
    Ok(moment_integrals(body, &[q], n, seed)?[0])
}

/// [`moment_integral`] for several exponents on one shared sample, so that
/// per-batch inequalities such as `I_2 >= I_1^2` hold exactly.
pub fn moment_integrals(body: &PBallBody, qs: &[f64], n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    if let Some(q) = qs.iter().find(|q| !(**q >= 0.0 && q.is_finite())) {
        return Err(invalid("q", format!("must be finite and >= 0, got {q}")));
    }
    if qs.iter().all(|&q| q == 0.0) {
        return Ok(qs.iter().map(|_| McEstimate::exact(1.0)).collect());
    }
    check_samples(n)?;
    let sampler = PointSampler::new(*body, Measure::UniformNormalized)?;
    let tallies = map_sample_chunks(&sampler, n, seed, |rows, _| {
        let mut t = vec![Tally::default(); qs.len()];
        for x in rows.chunks_exact(body.d()) {
            let norm = euclidean_norm(x);
            for (tally, &q) in t.iter_mut().zip(qs) {
                tally.push(if q == 2.0 { norm * norm } else { norm.powf(q) });
            }
        }
        t
    });
    Ok(qs
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            if q == 0.0 {
                McEstimate::exact(1.0)
            } else {
                McEstimate::from_tally(&merge_tallies(tallies.iter().map(|t| &t[k])))
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiNormEstimate {
    pub alpha: f64,
    /// Smallest `λ` with empirical `E exp(|v/λ|^alpha) <= 2`.
    pub lambda: f64,
    /// Empirical `(E v^2)^{1/2}`.
    pub l2_norm: f64,
    /// `lambda / l2_norm`.
    pub constant: f64,
}

/// Empirical `psi_alpha` norm of `<X, theta>` for `X` uniform in `D_p^d`.
pub fn empirical_psi_norm(body: &PBallBody, theta: &[f64], alpha: f64, n: usize, seed: u64) -> Result<PsiNormEstimate> {
    if theta.len() != body.d() {
        return Err(Error::DimensionMismatch {
            expected: body.d(),
            got: theta.len(),
        });
    }
    let unit = euclidean_norm(theta);
    if !((unit - 1.0).abs() <= 1e-10) {
        return Err(invalid("theta", format!("must be a unit vector, ||theta||_2 = {unit}")));
    }
    check_alpha(alpha)?;
    check_samples(n)?;
    let sampler = PointSampler::new(*body, Measure::UniformNormalized)?;
    let values = map_sample_chunks(&sampler, n, seed, |rows, _| {
        rows.chunks_exact(body.d()).map(|x| dot(x, theta)).collect::<Vec<_>>()
    })
    .concat();
    psi_norm_of_values(&values, alpha)
}

/// Geometric bisection for the empirical Orlicz norm of `values`.
///
/// The bracket starts at `max|v| / (ln 2)^{1/alpha} / 10` and
/// `1000 * ||v||_2`; the lower end is pushed down while it still satisfies
/// the constraint.
pub fn psi_norm_of_values(values: &[f64], alpha: f64) -> Result<PsiNormEstimate> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(invalid("values", "must not be empty"));
    }
    let n = values.len() as f64;
    let l2_norm = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Ok(PsiNormEstimate {
            alpha,
            lambda: 0.0,
            l2_norm,
            constant: f64::NAN,
        });
    }
    let orlicz_mean = |lambda: f64| values.iter().map(|v| (v.abs() / lambda).powf(alpha).exp()).sum::<f64>() / n;

    let mut hi = 1e3 * l2_norm;
    let at_hi = orlicz_mean(hi);
    if !(at_hi <= 2.0) {
        return Err(Error::PsiNormNotBracketed {
            lambda: hi,
            mean: at_hi,
        });
    }
    let mut lo = max_abs / 2f64.ln().powf(alpha.recip()) / 10.0;
    while orlicz_mean(lo) <= 2.0 {
        hi = lo;
        lo /= 10.0;
    }
    while hi / lo - 1.0 > PSI_RELATIVE_TOLERANCE {
        let mid = (lo * hi).sqrt();
        if orlicz_mean(mid) <= 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PsiNormEstimate {
        alpha,
        lambda: hi,
        l2_norm,
        constant: hi / l2_norm,
    })
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&alpha) {
        return Err(invalid("alpha", format!("must lie in [1, 2], got {alpha}")));
    }
    Ok(())
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    Ok(())
}
