//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force `min_{λ ∈ simplex} ||x - Σ λ_i p_i||_2`.
///
/// Level 0 scans a uniform barycentric grid; each later level scans a grid
/// of the same size over a box half as wide around the incumbent,
/// clipped to the simplex. The objective is convex in `λ`, so the zoom
/// cannot strand the search away from the minimum value.
pub fn hull_distance_grid(x: &[f64], points: &[f64]) -> f64 {
    let d = x.len();
    let n = points.len() / d;
    let eval = |lam: &[f64]| -> f64 {
        let mut s = 0.0;
        for k in 0..d {
            let mut c = -x[k];
            for i in 0..n {
                c += lam[i] * points[i * d + k];
            }
            s += c * c;
        }
        s.sqrt()
    };
    if n == 1 {
        return eval(&[1.0]);
    }
    let free = n - 1;
    let steps = match free {
        1 => 400,
        2 => 60,
        3 => 20,
        _ => 10,
    };
    let mut center = vec![1.0 / n as f64; free];
    let mut half = 1.0;
    let mut best = f64::INFINITY;
    let mut best_lam = center.clone();
    for _ in 0..60 {
        let mut idx = vec![0usize; free];
        let mut lam = vec![0.0; n];
        'grid: loop {
            let mut ok = true;
            let mut sum = 0.0;
            for k in 0..free {
                let v = center[k] - half + 2.0 * half * idx[k] as f64 / steps as f64;
                if !(0.0..=1.0).contains(&v) {
                    ok = false;
                }
                lam[k] = v;
                sum += v;
            }
            if ok && sum <= 1.0 {
                lam[free] = 1.0 - sum;
                let v = eval(&lam);
                if v < best {
                    best = v;
                    best_lam.copy_from_slice(&lam[..free]);
                }
            }
            let mut k = 0;
            loop {
                if k == free {
                    break 'grid;
                }
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
        center.copy_from_slice(&best_lam);
        half /= 2.0;
    }
    best
}

/// Rejection sampling from the cube `[-1, 1]^d` into `B_p^d`; returns the
/// accepted mean of `x_1^2` and its standard error.
pub fn rejection_second_moment(d: usize, p: f64, draws: usize, seed: u64) -> (f64, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
    let mut x = vec![0.0; d];
    for _ in 0..draws {
        for v in x.iter_mut() {
            *v = 2.0 * rng.random::<f64>() - 1.0;
        }
        let norm_p: f64 = if p.is_infinite() {
            0.0
        } else {
            x.iter().map(|v| v.abs().powf(p)).sum()
        };
        if norm_p <= 1.0 {
            let v = x[0] * x[0];
            n += 1;
            s += v;
            s2 += v * v;
        }
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt(), n)
}

/// Uniform points in `[lo, hi]^d`, row-major.
pub fn uniform_box(d: usize, n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * d).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}
