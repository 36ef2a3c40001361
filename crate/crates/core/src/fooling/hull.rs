//! Euclidean distance from a point to the convex hull of a finite set.
//!
//! Translating by `x`, the problem becomes the minimum-norm point of
//! `conv{q_i = p_i - x}`, solved with Wolfe's active-set method. Each major
//! step adds the vertex minimizing `<y, q_j>`; minor steps move to the
//! affine minimizer of the active face and drop vertices whose weight would
//! turn negative. When the affine system is numerically singular a
//! Frank-Wolfe step is taken instead.
//!
//! The stopping rule is the duality gap in length units: the current point
//! `y` gives an upper bound `||y||` on the distance and the hyperplane
//! `{z : <y, z> = min_j <y, q_j>}` separates the hull from the origin, so
//! `max(0, min_j <y, q_j>) / ||y||` is a lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Solver settings for [`distance_to_hull`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullSolver {
    /// Target duality gap, in the same units as the points.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HullSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl HullSolver {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid(
                "tolerance",
                format!("must be positive, got {}", self.tolerance),
            ));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullDistance {
    pub dist: f64,
    pub projection: Vec<f64>,
    /// Convex weights over the input points, `projection = Σ w_i p_i`.
    pub weights: Vec<f64>,
    /// Final duality gap; `dist - gap` is a certified lower bound.
    pub gap: f64,
    pub iterations: usize,
    /// The iteration cap was hit before the gap reached the tolerance.
    pub approximate: bool,
}

impl HullDistance {
    pub fn lower_bound(&self) -> f64 {
        (self.dist - self.gap).max(0.0)
    }
}

/// Distance from `x` to `conv(points)`, `points` row-major with `x.len()` columns.
pub fn distance_to_hull(x: &[f64], points: &[f64], tolerance: f64) -> Result<HullDistance> {
    let solver = HullSolver {
        tolerance,
        ..HullSolver::default()
    };
    solve(x, points, &solver)
}

pub fn solve(x: &[f64], points: &[f64], solver: &HullSolver) -> Result<HullDistance> {
    check_inputs(x, points)?;
    solver.validate()?;
    let run = Wolfe::new(x, points).run(solver, None);
    Ok(run.finish(x, points.len() / x.len()))
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub enum Proximity {
    /// Certified `dist(x, hull) > radius`; the solve stopped early.
    Beyond { lower_bound: f64 },
    /// Full solve.
    Within(HullDistance),
}

/// Solve only as far as needed to certify `dist > radius`; otherwise run
/// to convergence.
pub fn classify(x: &[f64], points: &[f64], solver: &HullSolver, radius: f64) -> Result<Proximity> {
    check_inputs(x, points)?;
    solver.validate()?;
    let run = Wolfe::new(x, points).run(solver, Some(radius));
    if run.lower > radius {
        return Ok(Proximity::Beyond { lower_bound: run.lower });
    }
    let full = run.finish(x, points.len() / x.len());
    if full.lower_bound() > radius {
        Ok(Proximity::Beyond {
            lower_bound: full.lower_bound(),
        })
    } else {
        Ok(Proximity::Within(full))
    }
}

fn check_inputs(x: &[f64], points: &[f64]) -> Result<()> {
    let d = x.len();
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if points.is_empty() {
        return Err(invalid("points", "need at least one point"));
    }
    if !points.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: points.len() % d,
        });
    }
    Ok(())
}

struct Wolfe {
    d: usize,
    /// Translated points `p_i - x`, row-major.
    q: Vec<f64>,
    active: Vec<usize>,
    lambda: Vec<f64>,
    y: Vec<f64>,
}

struct Run {
    state: Wolfe,
    lower: f64,
    gap: f64,
    iterations: usize,
    approximate: bool,
}

impl Run {
    fn finish(self, x: &[f64], n: usize) -> HullDistance {
        let mut weights = vec![0.0; n];
        for (&i, &w) in self.state.active.iter().zip(&self.state.lambda) {
            weights[i] += w;
        }
        let projection = x.iter().zip(&self.state.y).map(|(a, b)| a + b).collect();
        HullDistance {
            dist: norm_sq(&self.state.y).sqrt(),
            projection,
            weights,
            gap: self.gap,
            iterations: self.iterations,
            approximate: self.approximate,
        }
    }
}

/// Relative pivot floor for the affine-minimizer Cholesky factorization.
const PIVOT_FLOOR: f64 = 1e-13;

impl Wolfe {
    fn new(x: &[f64], points: &[f64]) -> Self {
        let d = x.len();
        let q: Vec<f64> = points
            .chunks_exact(d)
            .flat_map(|p| p.iter().zip(x).map(|(a, b)| a - b))
            .collect();
        let start = (0..q.len() / d)
            .map(|i| (i, norm_sq(&q[i * d..(i + 1) * d])))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0;
        let y = q[start * d..(start + 1) * d].to_vec();
        Self {
            d,
            q,
            active: vec![start],
            lambda: vec![1.0],
            y,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.d..(i + 1) * self.d]
    }

    fn run(mut self, solver: &HullSolver, beyond: Option<f64>) -> Run {
        let n = self.q.len() / self.d;
        let mut iterations = 0;
        loop {
            let yy = norm_sq(&self.y);
            let ynorm = yy.sqrt();
            let (j, m) = (0..n)
                .map(|i| (i, dot(&self.y, self.row(i))))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            let lower = if ynorm > 0.0 { (m / ynorm).max(0.0) } else { 0.0 };
            let gap = ynorm - lower;
            let decided = beyond.is_some_and(|r| lower > r);
            let stalled = self.active.contains(&j) || yy - m <= 0.0;
            let exhausted = iterations >= solver.max_iterations;
            if gap <= solver.tolerance || decided || stalled || exhausted {
                return Run {
                    state: self,
                    lower,
                    gap,
                    iterations,
                    approximate: gap > solver.tolerance && !decided,
                };
            }
            iterations += 1;
            self.major_step(j);
        }
    }

    fn major_step(&mut self, j: usize) {
        self.active.push(j);
        self.lambda.push(0.0);
        for minor in 0..=self.d + 1 {
            let Some(w) = self.affine_minimizer() else {
                self.active.pop();
                self.lambda.pop();
                self.frank_wolfe_step(j);
                return;
            };
            if w.iter().all(|&v| v > 0.0) {
                self.lambda = w;
                break;
            }
            let (theta, leaving) = self
                .lambda
                .iter()
                .zip(&w)
                .enumerate()
                .filter(|(_, (_, &wi))| wi <= 0.0)
                .map(|(k, (&li, &wi))| (li / (li - wi), k))
                .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best });
            if minor == 0 && self.active[leaving] == j && theta <= 0.0 {
                self.active.pop();
                self.lambda.pop();
                self.frank_wolfe_step(j);
                return;
            }
            for (l, wi) in self.lambda.iter_mut().zip(&w) {
                *l += theta * (wi - *l);
            }
            self.lambda[leaving] = 0.0;
            let mut k = 0;
            while k < self.active.len() {
                if self.lambda[k] <= 0.0 {
                    self.active.swap_remove(k);
                    self.lambda.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = self.lambda.iter().sum();
            self.lambda.iter_mut().for_each(|l| *l /= total);
        }
        self.refresh_y();
    }

    /// Exact line search from `y` towards vertex `j`.
    fn frank_wolfe_step(&mut self, j: usize) {
        let qj = self.row(j).to_vec();
        let diff: Vec<f64> = self.y.iter().zip(&qj).map(|(a, b)| a - b).collect();
        let denom = norm_sq(&diff);
        if denom == 0.0 {
            return;
        }
        let step = (dot(&self.y, &diff) / denom).clamp(0.0, 1.0);
        self.lambda.iter_mut().for_each(|l| *l *= 1.0 - step);
        match self.active.iter().position(|&i| i == j) {
            Some(k) => self.lambda[k] += step,
            None => {
                self.active.push(j);
                self.lambda.push(step);
            }
        }
        self.refresh_y();
    }

    fn refresh_y(&mut self) {
        let mut y = vec![0.0; self.d];
        for (&i, &l) in self.active.iter().zip(&self.lambda) {
            for (acc, v) in y.iter_mut().zip(self.row(i)) {
                *acc += l * v;
            }
        }
        self.y = y;
    }

    /// Weights of the minimum-norm point of the affine hull of the active
    /// vertices, or `None` when they are numerically affinely dependent.
    fn affine_minimizer(&self) -> Option<Vec<f64>> {
        let k = self.active.len();
        if k == 1 {
            return Some(vec![1.0]);
        }
        let base = self.row(self.active[0]);
        let diffs: Vec<Vec<f64>> = self.active[1..]
            .iter()
            .map(|&i| self.row(i).iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let m = k - 1;
        let mut g = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for a in 0..m {
            for b in 0..=a {
                let v = dot(&diffs[a], &diffs[b]);
                g[a * m + b] = v;
                g[b * m + a] = v;
            }
            rhs[a] = -dot(&diffs[a], base);
        }
        let mu = cholesky_solve(&mut g, &mut rhs, m)?;
        let mut w = Vec::with_capacity(k);
        w.push(1.0 - mu.iter().sum::<f64>());
        w.extend(mu);
        Some(w)
    }
}

/// Solve `G μ = r` for symmetric positive definite `G` (overwritten).
fn cholesky_solve(g: &mut [f64], r: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let scale = (0..m).map(|i| g[i * m + i]).fold(0.0, f64::max);
    for j in 0..m {
        let mut diag = g[j * m + j];
        for k in 0..j {
            diag -= g[j * m + k] * g[j * m + k];
        }
        if !(diag > PIVOT_FLOOR * scale) {
            return None;
        }
        let diag = diag.sqrt();
        g[j * m + j] = diag;
        for i in j + 1..m {
            let mut v = g[i * m + j];
            for k in 0..j {
                v -= g[i * m + k] * g[j * m + k];
            }
            g[i * m + j] = v / diag;
        }
    }
    for i in 0..m {
        let mut v = r[i];
        for k in 0..i {
            v -= g[i * m + k] * r[k];
        }
        r[i] = v / g[i * m + i];
    }
    for i in (0..m).rev() {
        let mut v = r[i];
        for k in i + 1..m {
            v -= g[k * m + i] * r[k];
        }
        r[i] = v / g[i * m + i];
    }
    Some(r.to_vec())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn triangle_corner_example() {
        let pts = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let r = distance_to_hull(&[1.0, 1.0], &pts, 1e-12).unwrap();
        assert!((r.dist - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((r.projection[0] - 0.5).abs() < 1e-14 && (r.projection[1] - 0.5).abs() < 1e-14);
        assert!((r.weights[0]).abs() < 1e-14 && (r.weights[1] - 0.5).abs() < 1e-14);
        assert!(!r.approximate);
    }

    #[test]
    fn trivial_cases() {
        let pts = [0.3, -0.2, 1.0, 2.0, -1.0, 0.5];
        let at_point = distance_to_hull(&[1.0, 2.0], &pts, 1e-12).unwrap();
        assert_eq!(at_point.dist, 0.0);
        assert_eq!(at_point.weights, vec![0.0, 1.0, 0.0]);
        let single = distance_to_hull(&[3.0, 4.0], &[0.0, 0.0], 1e-12).unwrap();
        assert_eq!(single.dist, 5.0);
        assert!(distance_to_hull(&[0.0, 0.0], &[], 1e-12).is_err());
        assert!(distance_to_hull(&[0.0, 0.0], &[1.0, 2.0, 3.0], 1e-12).is_err());
        assert!(distance_to_hull(&[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn interior_point_of_simplex() {
        let pts = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let r = distance_to_hull(&[0.2, 0.3, 0.1], &pts, 1e-12).unwrap();
        assert!(r.dist < 1e-14);
        let expect = [0.4, 0.2, 0.3, 0.1];
        for (w, e) in r.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_and_duplicate_points() {
        let pts = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0];
        let r = distance_to_hull(&[2.0, 0.0], &pts, 1e-12).unwrap();
        assert!((r.dist - 2f64.sqrt()).abs() < 1e-12);
        assert!(!r.approximate);
    }

    #[test]
    fn classify_stops_early_when_far() {
        let pts = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        match classify(&[10.0, 10.0], &pts, &HullSolver::default(), 1.0).unwrap() {
            Proximity::Beyond { lower_bound } => assert!(lower_bound > 1.0),
            other => panic!("{other:?}"),
        }
        match classify(&[0.5, 0.6], &pts, &HullSolver::default(), 1.0).unwrap() {
            Proximity::Within(r) => assert!((r.dist - 0.1 / 2f64.sqrt()).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn optimality_conditions(
            d in 1usize..7,
            n in 1usize..25,
            raw in proptest::collection::vec(-1.0f64..1.0, 7 * 26),
            shift in -3.0f64..3.0,
        ) {
            let pts: Vec<f64> = raw[..n * d].to_vec();
            let x: Vec<f64> = raw[n * d..n * d + d].iter().map(|v| v + shift).collect();
            let r = distance_to_hull(&x, &pts, 1e-10).unwrap();
            prop_assert!(!r.approximate);
            prop_assert!(r.gap <= 1e-10);
            let total: f64 = r.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(r.weights.iter().all(|&w| w >= 0.0));
            // projection is the stated combination
            for k in 0..d {
                let comb: f64 = (0..n).map(|i| r.weights[i] * pts[i * d + k]).sum();
                prop_assert!((comb - r.projection[k]).abs() < 1e-12);
            }
            // no vertex is closer than the hull, and the distance is optimal
            // along every vertex direction
            let y: Vec<f64> = r.projection.iter().zip(&x).map(|(a, b)| a - b).collect();
            for i in 0..n {
                let qi: Vec<f64> = pts[i * d..(i + 1) * d].iter().zip(&x).map(|(a, b)| a - b).collect();
                prop_assert!(dot(&y, &qi) >= norm_sq(&y) - 1e-9);
                prop_assert!(norm_sq(&qi).sqrt() >= r.dist - 1e-12);
            }
        }
    }
}
