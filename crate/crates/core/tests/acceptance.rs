//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p isocurse --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use isocurse::complexity::{curse_condition_for, trivial_algorithm_error, FirstMoment, SequenceSpec, SmoothnessClass};
use isocurse::concentration::{intersection_volume, moment_integral, thin_shell_report, TailSide};
use isocurse::fooling::{
    admissible_delta, distance_to_hull, fooling_integral, random_point_set, reference_delta_bound,
    CertificationSettings, FoolingFunction, HullSolver, LP_DELTA,
};
use isocurse::geometry::{gamma2, monotonicity_certificate, radius_ratio, special::EULER_GAMMA};
use isocurse::parallel::derive_seed;
use isocurse::sampling::{empirical_second_moments, max_deviation_from_identity, Measure};
use isocurse::{Exponent, PBallBody};

use Exponent::{Finite, Infinity};

const SEED: u64 = 20_240_601;
const DEFAULT_GRID: [usize; 6] = [2, 4, 8, 16, 32, 64];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ball(d: usize, p: Exponent) -> PBallBody {
    PBallBody::new(d, p).expect("valid body")
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn dims_up_to_million() -> Vec<usize> {
    let mut dims: Vec<usize> = (1..=100).collect();
    let mut d = 128usize;
    while d <= 1_000_000 {
        dims.push(d);
        dims.push(d + 1);
        d = (d as f64 * 1.7) as usize;
    }
    dims.push(1_000_000);
    dims
}

fn criterion_1() -> Outcome {
    let dims = dims_up_to_million();
    let bad: Vec<usize> = dims
        .iter()
        .copied()
        .filter(|&d| gamma2(d, Infinity).unwrap() != 1.0 / 3.0)
        .collect();
    outcome(
        bad.is_empty(),
        format!(
            "{} dimensions in [1, 1e6], exact equality; failures: {bad:?}",
            dims.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let dims = dims_up_to_million();
    let worst = dims
        .iter()
        .map(|&d| rel(gamma2(d, Finite(2.0)).unwrap(), 1.0 / (d as f64 + 2.0)))
        .fold(0.0, f64::max);
    let closed = worst <= 1e-12;

    // Independent check: cube rejection sampling, 1e6 draws per dimension.
    let mut mc_ok = true;
    let mut worst_z = 0.0f64;
    for d in 1..=10 {
        let (mean, se, _) = common::rejection_second_moment(d, 2.0, 1_000_000, derive_seed(SEED, 2, d as u64));
        let z = (mean - 1.0 / (d as f64 + 2.0)).abs() / se;
        worst_z = worst_z.max(z);
        mc_ok &= z <= 3.0;
    }
    // The library sampler at n = 1e6: E x_1^2 over D_2^d equals α² γ².
    let mut sampler_z = 0.0f64;
    for d in [4, 10] {
        let body = ball(d, Finite(2.0));
        let m =
            empirical_second_moments(&body, Measure::UniformBall, 1_000_000, derive_seed(SEED, 22, d as u64)).unwrap();
        let n = m.count() as f64;
        let diag = m.matrix()[0];
        // Var(x_1^2) for uniform B_2^d is E x^4 - (E x^2)^2 = 3/((d+2)(d+4)) - 1/(d+2)^2.
        let df = d as f64;
        let sd = (3.0 / ((df + 2.0) * (df + 4.0)) - 1.0 / ((df + 2.0) * (df + 2.0))).sqrt();
        let z = (diag - 1.0 / (df + 2.0)).abs() / (sd / n.sqrt());
        sampler_z = sampler_z.max(z);
        mc_ok &= z <= 3.0;
    }
    outcome(
        closed && mc_ok,
        format!(
            "max rel err {worst:.2e} over {} dims; rejection MC d<=10 max |z| = {worst_z:.2}; sampler max |z| = {sampler_z:.2}",
            dims.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let dims = dims_up_to_million();
    let sqrt3 = 3f64.sqrt();
    let worst_inf = dims
        .iter()
        .map(|&d| rel(radius_ratio(d, Infinity).unwrap(), sqrt3))
        .fold(0.0, f64::max);
    let worst_two = dims
        .iter()
        .map(|&d| rel(radius_ratio(d, Finite(2.0)).unwrap(), (1.0 + 2.0 / d as f64).sqrt()))
        .fold(0.0, f64::max);
    let mut large = Vec::new();
    let mut in_range = true;
    for p in [3.0, 4.0, 8.0, 64.0] {
        let r = radius_ratio(100_000, Finite(p)).unwrap();
        in_range &= (1.0..=sqrt3 + 1e-3).contains(&r);
        large.push(format!("p={p}: {r:.6}"));
    }
    outcome(
        worst_inf <= 1e-12 && worst_two <= 1e-12 && in_range,
        format!(
            "p=inf rel err {worst_inf:.1e}, p=2 rel err {worst_two:.1e}; d=1e5 ratios [{}]",
            large.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let c = monotonicity_certificate(2.0, 1e4, 200).unwrap();
    let limit_ok = (c.g_limit - 27f64.ln()).abs() < 1e-15 && (c.g_threshold - (2.0 * EULER_GAMMA + 2.0)).abs() < 1e-15;
    outcome(
        c.holds() && limit_ok && c.g_limit > c.g_threshold,
        format!(
            "h increasing: {}, min f = {:.4e}, min g = {:.6} > 2γ+2 = {:.6}, ln 27 = {:.6}, h(1e4) = {:.6}",
            c.h_increasing(),
            c.min_f,
            c.min_g,
            c.g_threshold,
            c.g_limit,
            c.h_at_max
        ),
    )
}

fn criterion_5() -> Outcome {
    let n = 1_000_000;
    let limit = 5.0 / (n as f64).sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [Finite(2.0), Finite(4.0), Infinity] {
        let m = empirical_second_moments(&ball(8, p), Measure::IsotropicRescaled, n, derive_seed(SEED, 5, 0)).unwrap();
        let dev = max_deviation_from_identity(&m.matrix(), 8);
        pass &= dev <= limit;
        parts.push(format!("p={p}: {dev:.2e}"));
    }
    outcome(pass, format!("max |Cov - I| <= {limit:.1e}: [{}]", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for d in [4, 8, 16] {
        for p in [Finite(2.0), Finite(4.0), Infinity] {
            let body = ball(d, p);
            let l = body.isotropic_constant();
            let est = moment_integral(&body, 2.0, 1_000_000, derive_seed(SEED, 6, d as u64)).unwrap();
            let z = (est.estimate - d as f64 * l * l).abs() / est.stderr;
            worst = worst.max(z);
            pass &= z <= 3.0;
        }
    }
    outcome(
        pass,
        format!("9 (d, p) pairs, n = 1e6, max |I_2 - d L^2| / σ = {worst:.2}"),
    )
}

fn criterion_7() -> Outcome {
    let mut probs = Vec::new();
    let mut ratio64 = f64::NAN;
    for d in [4, 16, 64] {
        let r = thin_shell_report(&ball(d, Finite(2.0)), &[0.2], 1_000_000, derive_seed(SEED, 7, d as u64)).unwrap();
        let row = r.tail(0.2, TailSide::Lower).unwrap().clone();
        probs.push((d, row.display_probability(r.n), row.probability));
        if d == 64 {
            ratio64 = r.mean_norm_ratio;
        }
    }
    let decreasing = probs.windows(2).all(|w| w[1].2 < w[0].2);
    let shell = (0.95..=1.05).contains(&ratio64);
    let shown: Vec<String> = probs.iter().map(|(d, s, _)| format!("d={d}: {s}")).collect();
    outcome(
        decreasing && shell,
        format!(
            "P(||X|| <= 0.8 sqrt d) [{}], E||X||/sqrt d at d=64 = {ratio64:.4}; qualitative decay only",
            shown.join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut vols = Vec::new();
    for d in [8, 16, 32] {
        let body = ball(d, Finite(2.0));
        let r = 0.8 * body.isotropic_constant();
        vols.push((
            d,
            intersection_volume(&body, r, 1_000_000, derive_seed(SEED, 8, d as u64)).unwrap(),
        ));
    }
    let decreasing = vols.windows(2).all(|w| w[1].1.estimate < w[0].1.estimate);
    let shown: Vec<String> = vols.iter().map(|(d, v)| format!("d={d}: {:.3e}", v.estimate)).collect();
    outcome(
        decreasing,
        format!("vol(D_2^d ∩ 0.8 L sqrt(d) B_2) [{}]", shown.join(", ")),
    )
}

struct FoolingInstance {
    d: usize,
    p: Exponent,
    n_points: usize,
    f: FoolingFunction,
}

fn fooling_instances() -> Vec<FoolingInstance> {
    let dims = [2, 3, 4, 6, 8, 12, 16];
    let exps = [Finite(2.0), Finite(3.0), Finite(4.0), Finite(8.0), Infinity];
    let sizes = [1, 2, 3, 5, 8, 13, 21, 32];
    (0..100)
        .map(|k| {
            let d = dims[k % dims.len()];
            let p = exps[(k / dims.len()) % exps.len()];
            let n_points = sizes[(k * 3) % sizes.len()];
            let body = ball(d, p);
            let pts = random_point_set(&body, n_points, derive_seed(SEED, 9, k as u64)).unwrap();
            let f = FoolingFunction::new(body, pts, LP_DELTA, HullSolver::default()).unwrap();
            FoolingInstance { d, p, n_points, f }
        })
        .collect()
}

fn criterion_9(instances: &[FoolingInstance]) -> Outcome {
    let settings = CertificationSettings::default();
    let mut failures = Vec::new();
    let (mut worst_value, mut worst_grad, mut worst_fd) = (0.0f64, 0.0f64, 0.0f64);
    let (mut pairs, mut checks) = (0, 0);
    for (k, inst) in instances.iter().enumerate() {
        let c = inst.f.certify(&settings, derive_seed(SEED, 90, k as u64)).unwrap();
        worst_value = worst_value.max(c.max_value_ratio / c.value_bound);
        worst_grad = worst_grad.max(c.max_gradient_ratio / c.gradient_bound);
        worst_fd = worst_fd.max(c.max_fd_relative_error);
        pairs += c.pairs;
        checks += c.gradient_checks;
        if !c.holds() {
            failures.push(format!("#{k} (d={}, p={}, n={})", inst.d, inst.p, inst.n_points));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} instances, {pairs} pairs, {checks} gradient checks; max Lip ratio / bound: value {worst_value:.3}, \
             gradient {worst_grad:.3}; max FD rel err {worst_fd:.2e}; failures {failures:?}",
            instances.len()
        ),
    )
}

fn criterion_10(instances: &[FoolingInstance]) -> Outcome {
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (k, inst) in instances.iter().enumerate() {
        let b = fooling_integral(&inst.f, 20_000, derive_seed(SEED, 10, k as u64)).unwrap();
        let margin = (b.integral_estimate.estimate - b.chained_bound()) / b.chained_stderr().max(f64::MIN_POSITIVE);
        min_margin = min_margin.min(margin);
        if b.integral_estimate.estimate < b.chained_bound() - 3.0 * b.chained_stderr() {
            failures.push(k);
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "integral >= 1 - n vol(K ∩ r_d sqrt(d) B_2) - 3σ on {} instances (mc_n = 2e4); min margin {min_margin:.2}σ; failures {failures:?}",
            instances.len()
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in 1..=3 {
        for n in 1..=5 {
            for rep in 0..8u64 {
                let seed = derive_seed(SEED, 11, (d * 100 + n * 10) as u64 + rep);
                let pts = common::uniform_box(d, n, -1.0, 1.0, seed);
                // Half the queries well outside the point cloud.
                let spread = if rep % 2 == 0 { 1.0 } else { 3.0 };
                let x = common::uniform_box(d, 1, -spread, spread, seed ^ 1);
                let wolfe = distance_to_hull(&x, &pts, 1e-12).unwrap();
                let grid = common::hull_distance_grid(&x, &pts);
                worst = worst.max((wolfe.dist - grid).abs());
                count += 1;
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("{count} instances with d <= 3, n <= 5; max |Wolfe - grid| = {worst:.2e}"),
    )
}

fn criterion_12() -> Outcome {
    let a: SequenceSpec = "d^-1".parse().unwrap();
    let b: SequenceSpec = "d^-2".parse().unwrap();
    let combined: Vec<f64> = DEFAULT_GRID
        .iter()
        .map(|&d| {
            let body = ball(d, Finite(2.0));
            let l = body.isotropic_constant();
            let class = SmoothnessClass::new(body, a.eval(d, l), b.eval(d, l)).unwrap();
            trivial_algorithm_error(&class, FirstMoment::Bound).unwrap().combined
        })
        .collect();
    let decreasing = combined.windows(2).all(|w| w[1] < w[0]);
    let condition = curse_condition_for(&a, &b, Finite(2.0), &DEFAULT_GRID).unwrap();

    let reference = reference_delta_bound();
    let mut window_ok = reference > LP_DELTA;
    let mut tightest = f64::INFINITY;
    for d in [64, 128, 1024, 100_000] {
        for p in [
            Finite(2.0),
            Finite(3.0),
            Finite(4.0),
            Finite(8.0),
            Finite(64.0),
            Infinity,
        ] {
            match admissible_delta(&ball(d, p)) {
                Ok(w) => {
                    window_ok &= w.admits(LP_DELTA) && w.upper >= reference;
                    tightest = tightest.min(w.upper);
                }
                Err(_) => window_ok = false,
            }
        }
    }
    let shown: Vec<String> = combined.iter().map(|v| format!("{v:.3e}")).collect();
    outcome(
        decreasing && !condition.holds && window_ok,
        format!(
            "combined bound [{}] (tail slope {:.3}); 1/42 = {LP_DELTA:.5} < {reference:.5} <= smallest window {tightest:.5} at d >= 64",
            shown.join(", "),
            condition.tail_slope.unwrap_or(f64::NAN)
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {id:>2} [{}] {name} ({:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        results.push((id, name, o));
    };
    run(1, "gamma2 at p = inf is 1/3", &criterion_1);
    run(2, "gamma2 at p = 2 is 1/(d+2)", &criterion_2);
    run(3, "radius ratio closed forms and large-d range", &criterion_3);
    run(4, "monotonicity certificate", &criterion_4);
    run(5, "isotropic sampler covariance", &criterion_5);
    run(6, "I_2 = d L^2 by Monte Carlo", &criterion_6);
    run(7, "thin-shell lower tail decays in d", &criterion_7);
    run(8, "intersection volume decays in d", &criterion_8);
    let instances = fooling_instances();
    run(9, "fooling-function certification", &|| criterion_9(&instances));
    run(10, "chained integral inequality", &|| criterion_10(&instances));
    run(11, "hull distance vs brute-force grid", &criterion_11);
    run(12, "trivial-algorithm convergence and delta window", &criterion_12);

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1}s{}",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
