use isocurse::complexity::{
    curse_condition_for, empirical_adversary_error, lower_bound_count, trivial_algorithm_error, BoundParameters,
    CurseCondition, FirstMoment, SmoothnessClass,
};
use isocurse::concentration::{
    empirical_psi_norm, tail_decay_fit, thin_shell_report, ConcentrationReport, DecayFit, PsiNormEstimate, TailSide,
};
use isocurse::fooling::{
    admissible_delta, fooling_integral, random_point_set, CertificationSettings, FoolingFunction, HullSolver,
};
use isocurse::geometry::{
    monotonicity_certificate, MonotonicityCertificate, SMALL_DIAMETER_THRESHOLD, SMALL_RADIUS_THRESHOLD,
};
use isocurse::io::{fmt_f64, write_points_binary, write_points_csv, Table};
use isocurse::parallel::derive_seed;
use isocurse::sampling::sample as draw;
use isocurse::{Exponent, PBallBody};
use serde::Serialize;

use crate::args::{ConcentrateArgs, CurseArgs, FoolArgs, Format, GeometryArgs, SampleArgs, SampleFormat};
use crate::output::{csv_bytes, json_bytes, CliError};

const CERTIFICATE_P_RANGE: (f64, f64) = (2.0, 1e4);

pub const CURSE_VERDICT: &str = "curse condition holds";
pub const NO_CURSE_VERDICT: &str = "no curse - trivial algorithm converges";

fn bodies(d: &[usize], p: &[Exponent]) -> Result<Vec<PBallBody>, CliError> {
    let mut out = Vec::with_capacity(d.len() * p.len());
    for &p in p {
        for &d in d {
            out.push(PBallBody::new(d, p)?);
        }
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct GeometryRow {
    d: usize,
    p: Exponent,
    alpha: f64,
    gamma2: f64,
    isotropic_constant: f64,
    radius: f64,
    /// `rad / (sqrt(d) L)`.
    ratio: f64,
    radius_per_sqrt_d: f64,
    small_diameter: bool,
    small_radius: bool,
    ratio_within_sqrt3: bool,
}

#[derive(Debug, Serialize)]
struct CertificateSummary {
    grid: usize,
    p_min: f64,
    p_max: f64,
    holds: bool,
    h_increasing: bool,
    min_f: f64,
    min_g: f64,
    g_far: f64,
    g_limit: f64,
    g_threshold: f64,
    h_at_max: f64,
}

impl CertificateSummary {
    fn new(c: &MonotonicityCertificate) -> Self {
        Self {
            grid: c.p_grid.len(),
            p_min: c.p_grid[0],
            p_max: c.p_grid[c.p_grid.len() - 1],
            holds: c.holds(),
            h_increasing: c.h_increasing(),
            min_f: c.min_f,
            min_g: c.min_g,
            g_far: c.g_far,
            g_limit: c.g_limit,
            g_threshold: c.g_threshold,
            h_at_max: c.h_at_max,
        }
    }

    fn comments(&self) -> Vec<String> {
        vec![
            format!(
                "monotonicity certificate on {} log-spaced p in [{}, {}]: holds={}",
                self.grid,
                fmt_f64(self.p_min),
                fmt_f64(self.p_max),
                self.holds
            ),
            format!(
                "h strictly increasing={} h(p_max)={}",
                self.h_increasing,
                fmt_f64(self.h_at_max)
            ),
            format!(
                "min f={} min g={} g_far={}",
                fmt_f64(self.min_f),
                fmt_f64(self.min_g),
                fmt_f64(self.g_far)
            ),
            format!(
                "g limit ln 27={} threshold 2*euler_gamma+2={}",
                fmt_f64(self.g_limit),
                fmt_f64(self.g_threshold)
            ),
        ]
    }
}

pub fn geometry(args: &GeometryArgs) -> Result<Vec<u8>, CliError> {
    let (lo, hi) = CERTIFICATE_P_RANGE;
    let cert = CertificateSummary::new(&monotonicity_certificate(lo, hi, args.certificate_grid)?);
    let sqrt3 = 3f64.sqrt();
    let rows: Vec<GeometryRow> = bodies(&args.grid.d, &args.grid.p)?
        .iter()
        .map(|b| {
            let sqrt_d = (b.d() as f64).sqrt();
            let ratio = match b.radius_ratio() {
                Ok(r) => r,
                Err(_) => b.radius() / (sqrt_d * b.isotropic_constant()),
            };
            let radius_per_sqrt_d = b.radius() / sqrt_d;
            GeometryRow {
                d: b.d(),
                p: b.p(),
                alpha: b.alpha(),
                gamma2: b.gamma2(),
                isotropic_constant: b.isotropic_constant(),
                radius: b.radius(),
                ratio,
                radius_per_sqrt_d,
                small_diameter: ratio < SMALL_DIAMETER_THRESHOLD,
                small_radius: radius_per_sqrt_d < SMALL_RADIUS_THRESHOLD,
                ratio_within_sqrt3: ratio <= sqrt3 * (1.0 + 1e-12),
            }
        })
        .collect();
    match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: &'a [GeometryRow],
                certificate: &'a CertificateSummary,
            }
            json_bytes(&Doc {
                rows: &rows,
                certificate: &cert,
            })
        }
        Format::Csv => {
            let mut table = Table::new([
                "d",
                "p",
                "alpha",
                "gamma2",
                "isotropic_constant",
                "radius",
                "ratio",
                "radius_per_sqrt_d",
                "small_diameter",
                "small_radius",
                "ratio_within_sqrt3",
            ]);
            for r in &rows {
                table.push(vec![
                    r.d.to_string(),
                    r.p.to_string(),
                    fmt_f64(r.alpha),
                    fmt_f64(r.gamma2),
                    fmt_f64(r.isotropic_constant),
                    fmt_f64(r.radius),
                    fmt_f64(r.ratio),
                    fmt_f64(r.radius_per_sqrt_d),
                    r.small_diameter.to_string(),
                    r.small_radius.to_string(),
                    r.ratio_within_sqrt3.to_string(),
                ]);
            }
            csv_bytes(&cert.comments(), &table)
        }
    }
}

pub fn sample(args: &SampleArgs) -> Result<Vec<u8>, CliError> {
    let body = PBallBody::new(args.d, args.p)?;
    let batch = draw(&body, args.measure.into(), args.n, args.seed)?;
    match args.format {
        SampleFormat::Json => json_bytes(&batch),
        SampleFormat::Csv => {
            let mut buf = Vec::new();
            write_points_csv(&mut buf, &batch.points, batch.d())?;
            Ok(buf)
        }
        SampleFormat::Bin => {
            let mut buf = Vec::new();
            write_points_binary(&mut buf, &batch.points, batch.d())?;
            Ok(buf)
        }
    }
}

#[derive(Debug, Serialize)]
struct PsiRow {
    d: usize,
    p: Exponent,
    estimate: PsiNormEstimate,
}

#[derive(Debug, Serialize)]
struct FitRow {
    p: Exponent,
    fit: DecayFit,
}

pub fn concentrate(args: &ConcentrateArgs) -> Result<Vec<u8>, CliError> {
    let mut reports = Vec::new();
    let mut psi = Vec::new();
    for body in bodies(&args.grid.d, &args.grid.p)? {
        reports.push(thin_shell_report(&body, &args.t, args.n, args.seed)?);
        if let Some(alpha) = args.alpha {
            let mut e1 = vec![0.0; body.d()];
            e1[0] = 1.0;
            psi.push(PsiRow {
                d: body.d(),
                p: body.p(),
                estimate: empirical_psi_norm(&body, &e1, alpha, args.n, args.seed)?,
            });
        }
    }
    let mut fits: Vec<FitRow> = Vec::new();
    for &p in &args.grid.p {
        let same_p: Vec<ConcentrationReport> = reports.iter().filter(|r| r.body.p() == p).cloned().collect();
        for &t in &args.t {
            for side in [TailSide::Upper, TailSide::Lower] {
                if let Some(fit) = tail_decay_fit(&same_p, t, side) {
                    fits.push(FitRow { p, fit });
                }
            }
        }
    }
    match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                reports: &'a [ConcentrationReport],
                decay_fits: &'a [FitRow],
                psi_norms: &'a [PsiRow],
            }
            json_bytes(&Doc {
                reports: &reports,
                decay_fits: &fits,
                psi_norms: &psi,
            })
        }
        Format::Csv => {
            let mut comments = Vec::new();
            for r in &reports {
                comments.push(format!(
                    "d={} p={}: psi_{} constant of <X,e1> b={} eta={}",
                    r.body.d(),
                    r.body.p(),
                    fmt_f64(r.psi_alpha),
                    fmt_f64(r.b_alpha),
                    fmt_f64(r.eta)
                ));
            }
            for FitRow { p, fit: f } in &fits {
                comments.push(format!(
                    "decay fit p={} t={} side={}: ln P = {} + {} d over d in {:?}",
                    p,
                    fmt_f64(f.t),
                    f.side,
                    fmt_f64(f.intercept),
                    fmt_f64(f.slope),
                    f.dims
                ));
            }
            for row in &psi {
                comments.push(format!(
                    "d={} p={}: psi_{} norm of <X,e1> = {} (L2 norm {})",
                    row.d,
                    row.p,
                    fmt_f64(row.estimate.alpha),
                    fmt_f64(row.estimate.lambda),
                    fmt_f64(row.estimate.l2_norm)
                ));
            }
            let mut table = Table::new(ConcentrationReport::CSV_HEADER);
            for r in &reports {
                r.append_rows(&mut table);
            }
            csv_bytes(&comments, &table)
        }
    }
}

#[derive(Debug, Serialize)]
struct FoolRow {
    d: usize,
    p: Exponent,
    n_points: usize,
    delta: f64,
    delta_upper: f64,
    value_lipschitz_bound: f64,
    gradient_lipschitz_bound: f64,
    max_value_ratio: f64,
    max_gradient_ratio: f64,
    max_fd_relative_error: f64,
    certified: bool,
    integral: f64,
    integral_stderr: f64,
    extension_volume: f64,
    union_bound: f64,
    union_bound_stderr: f64,
    chained_bound: f64,
    approximate_solves: u64,
}

fn resolve_delta(body: &PBallBody, requested: Option<f64>) -> Result<(f64, f64), CliError> {
    let window = admissible_delta(body)?;
    let delta = requested.unwrap_or(window.default);
    if !window.admits(delta) {
        return Err(CliError::Usage(format!(
            "--delta {delta} is outside the admissible window (0, {}) for d={} p={}",
            window.upper,
            body.d(),
            body.p()
        )));
    }
    Ok((delta, window.upper))
}

pub fn fool(args: &FoolArgs) -> Result<Vec<u8>, CliError> {
    if args.n_points == 0 {
        return Err(CliError::Usage("--n-points must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for body in bodies(&args.grid.d, &args.grid.p)? {
        let (delta, upper) = resolve_delta(&body, args.delta)?;
        let points = random_point_set(&body, args.n_points, derive_seed(args.seed, 1, 0))?;
        let f = FoolingFunction::new(body, points, delta, HullSolver::default())?;
        let cert = f.certify(&CertificationSettings::default(), derive_seed(args.seed, 3, 0))?;
        let b = fooling_integral(&f, args.n, derive_seed(args.seed, 2, 0))?;
        rows.push(FoolRow {
            d: body.d(),
            p: body.p(),
            n_points: args.n_points,
            delta,
            delta_upper: upper,
            value_lipschitz_bound: cert.value_bound,
            gradient_lipschitz_bound: cert.gradient_bound,
            max_value_ratio: cert.max_value_ratio,
            max_gradient_ratio: cert.max_gradient_ratio,
            max_fd_relative_error: cert.max_fd_relative_error,
            certified: cert.holds(),
            integral: b.integral_estimate.estimate,
            integral_stderr: b.integral_estimate.stderr,
            extension_volume: 1.0 - b.bound.estimate,
            union_bound: b.extension.union_bound.estimate,
            union_bound_stderr: b.extension.union_bound.stderr,
            chained_bound: b.chained_bound(),
            approximate_solves: b.approximate_solves,
        });
    }
    match args.output.format {
        Format::Json => json_bytes(&rows),
        Format::Csv => {
            let mut table = Table::new([
                "d",
                "p",
                "n_points",
                "delta",
                "delta_upper",
                "value_lipschitz_bound",
                "gradient_lipschitz_bound",
                "max_value_ratio",
                "max_gradient_ratio",
                "max_fd_relative_error",
                "certified",
                "integral",
                "integral_stderr",
                "extension_volume",
                "union_bound",
                "union_bound_stderr",
                "chained_bound",
                "approximate_solves",
            ]);
            for r in &rows {
                table.push(vec![
                    r.d.to_string(),
                    r.p.to_string(),
                    r.n_points.to_string(),
                    fmt_f64(r.delta),
                    fmt_f64(r.delta_upper),
                    fmt_f64(r.value_lipschitz_bound),
                    fmt_f64(r.gradient_lipschitz_bound),
                    fmt_f64(r.max_value_ratio),
                    fmt_f64(r.max_gradient_ratio),
                    fmt_f64(r.max_fd_relative_error),
                    r.certified.to_string(),
                    fmt_f64(r.integral),
                    fmt_f64(r.integral_stderr),
                    fmt_f64(r.extension_volume),
                    fmt_f64(r.union_bound),
                    fmt_f64(r.union_bound_stderr),
                    fmt_f64(r.chained_bound),
                    r.approximate_solves.to_string(),
                ]);
            }
            csv_bytes(&[], &table)
        }
    }
}

#[derive(Debug, Serialize)]
struct CurseRow {
    d: usize,
    p: Exponent,
    isotropic_constant: f64,
    a_d: f64,
    b_d: f64,
    /// `min{A_d √d L, B_d d L²}`.
    condition_term: f64,
    lower_bound_exponent: f64,
    log10_lower_bound_count: f64,
    trivial_bound_a: f64,
    trivial_bound_b: f64,
    trivial_error: f64,
    adversary_delta: Option<f64>,
    adversary_error: Option<f64>,
    adversary_stderr: Option<f64>,
    adversary_union_bound: Option<f64>,
    adversary_certified: Option<bool>,
}

#[derive(Debug, Serialize)]
struct Verdict {
    p: Exponent,
    verdict: &'static str,
    condition: CurseCondition,
}

pub fn curse_report(args: &CurseArgs) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &p in &args.grid.p {
        let condition = curse_condition_for(&args.a_seq, &args.b_seq, p, &args.grid.d)?;
        let alpha = args.alpha.unwrap_or(p.value().min(2.0));
        let params = BoundParameters::new(alpha, args.q, args.c, args.epsilon)?;
        for (i, &d) in args.grid.d.iter().enumerate() {
            let body = PBallBody::new(d, p)?;
            let l = body.isotropic_constant();
            let (a_d, b_d) = (args.a_seq.eval(d, l), args.b_seq.eval(d, l));
            let class = SmoothnessClass::new(body, a_d, b_d)?;
            let first_moment = if args.mc_first_moment {
                FirstMoment::MonteCarlo {
                    n: args.n,
                    seed: derive_seed(args.seed, 4, i as u64),
                }
            } else {
                FirstMoment::Bound
            };
            let trivial = trivial_algorithm_error(&class, first_moment)?;
            let count = lower_bound_count(&params, d)?;
            let mut row = CurseRow {
                d,
                p,
                isotropic_constant: l,
                a_d,
                b_d,
                condition_term: condition.terms[i],
                lower_bound_exponent: count.exponent,
                log10_lower_bound_count: count.log10_count,
                trivial_bound_a: trivial.bound_a,
                trivial_bound_b: trivial.bound_b,
                trivial_error: trivial.combined,
                adversary_delta: None,
                adversary_error: None,
                adversary_stderr: None,
                adversary_union_bound: None,
                adversary_certified: None,
            };
            if d <= args.adversary_max_d && p.value() >= 2.0 {
                let (delta, _) = resolve_delta(&body, args.delta)?;
                let report = empirical_adversary_error(&body, args.n_points, delta, args.trials, args.mc_n, args.seed)?;
                let union = report
                    .trials
                    .iter()
                    .map(|t| t.union_bound.estimate)
                    .fold(f64::NEG_INFINITY, f64::max);
                row.adversary_delta = Some(delta);
                row.adversary_error = Some(report.error.estimate);
                row.adversary_stderr = Some(report.error.stderr);
                row.adversary_union_bound = Some(union);
                row.adversary_certified = Some(report.all_certified);
            }
            rows.push(row);
        }
        let verdict = if condition.holds {
            CURSE_VERDICT
        } else {
            NO_CURSE_VERDICT
        };
        verdicts.push(Verdict { p, verdict, condition });
    }
    match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                a_seq: String,
                b_seq: String,
                rows: &'a [CurseRow],
                verdicts: &'a [Verdict],
            }
            json_bytes(&Doc {
                a_seq: args.a_seq.to_string(),
                b_seq: args.b_seq.to_string(),
                rows: &rows,
                verdicts: &verdicts,
            })
        }
        Format::Csv => {
            let mut comments = vec![format!("A_d = {}", args.a_seq), format!("B_d = {}", args.b_seq)];
            for v in &verdicts {
                comments.push(format!(
                    "p={}: {} (witness {}, tail slope {})",
                    v.p,
                    v.verdict,
                    fmt_f64(v.condition.witness),
                    opt(v.condition.tail_slope)
                ));
            }
            let mut table = Table::new([
                "d",
                "p",
                "isotropic_constant",
                "a_d",
                "b_d",
                "condition_term",
                "lower_bound_exponent",
                "log10_lower_bound_count",
                "trivial_bound_a",
                "trivial_bound_b",
                "trivial_error",
                "adversary_delta",
                "adversary_error",
                "adversary_stderr",
                "adversary_union_bound",
                "adversary_certified",
            ]);
            for r in &rows {
                table.push(vec![
                    r.d.to_string(),
                    r.p.to_string(),
                    fmt_f64(r.isotropic_constant),
                    fmt_f64(r.a_d),
                    fmt_f64(r.b_d),
                    fmt_f64(r.condition_term),
                    fmt_f64(r.lower_bound_exponent),
                    fmt_f64(r.log10_lower_bound_count),
                    fmt_f64(r.trivial_bound_a),
                    fmt_f64(r.trivial_bound_b),
                    fmt_f64(r.trivial_error),
                    opt(r.adversary_delta),
                    opt(r.adversary_error),
                    opt(r.adversary_stderr),
                    opt(r.adversary_union_bound),
                    r.adversary_certified.map(|c| c.to_string()).unwrap_or_default(),
                ]);
            }
            csv_bytes(&comments, &table)
        }
    }
}
