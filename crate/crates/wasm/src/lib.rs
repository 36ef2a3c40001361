//! Browser bindings for the static demo in `www/`.
//!
//! Every export takes plain numbers and returns a flat `Float64Array`, so the
//! page needs no glue beyond the generated module. Errors surface as thrown
//! strings.

use isocurse::fooling::{admissible_delta, random_point_set, FoolingFunction, HullSolver};
use isocurse::sampling::{sample, Measure};
use isocurse::{Exponent, PBallBody};
use wasm_bindgen::prelude::*;

fn exponent(p: f64) -> Result<Exponent, String> {
    Exponent::new(p).map_err(|e| e.to_string())
}

fn body(d: usize, p: f64) -> Result<PBallBody, String> {
    PBallBody::new(d, exponent(p)?).map_err(|e| e.to_string())
}

/// Rows `d, L, rad/(sqrt(d) L), gamma2` for `d = 1..=d_max`, flattened.
/// Pass `p = Infinity` for the cube.
#[wasm_bindgen]
pub fn geometry_curve(p: f64, d_max: u32) -> Result<Vec<f64>, String> {
    if d_max == 0 {
        return Err("d_max must be at least 1".into());
    }
    let mut out = Vec::with_capacity(4 * d_max as usize);
    for d in 1..=d_max as usize {
        let b = body(d, p)?;
        let ratio = b.radius() / ((d as f64).sqrt() * b.isotropic_constant());
        out.extend([d as f64, b.isotropic_constant(), ratio, b.gamma2()]);
    }
    Ok(out)
}

/// `n` uniform points of the volume-one body `D_p^2` as `x0, y0, x1, y1, ...`.
#[wasm_bindgen]
pub fn sample_points_2d(p: f64, n: u32, seed: u32) -> Result<Vec<f64>, String> {
    let b = body(2, p)?;
    sample(&b, Measure::UniformNormalized, n as usize, seed as u64)
        .map(|batch| batch.points)
        .map_err(|e| e.to_string())
}

/// Fooling function on `D_p^2` vanishing at `n_points` random nodes,
/// evaluated on a `grid x grid` lattice over `[-rad, rad]^2`.
///
/// Output: `rad, delta`, the `2 n_points` node coordinates, then `grid²`
/// values in row-major order with `y` decreasing. Lattice points outside the
/// body are `NaN`. `delta <= 0` selects the default of the admissible window.
#[wasm_bindgen]
pub fn fooling_field(p: f64, n_points: u32, delta: f64, grid: u32, seed: u32) -> Result<Vec<f64>, String> {
    let b = body(2, p)?;
    let window = admissible_delta(&b).map_err(|e| e.to_string())?;
    let delta = if delta > 0.0 { delta } else { window.default };
    if !window.admits(delta) {
        return Err(format!("delta must lie in (0, {:.5})", window.upper));
    }
    let points = random_point_set(&b, n_points as usize, seed as u64).map_err(|e| e.to_string())?;
    let f = FoolingFunction::new(b, points.clone(), delta, HullSolver::default()).map_err(|e| e.to_string())?;
    let rad = b.radius();
    let g = grid.max(2) as usize;
    let mut out = Vec::with_capacity(2 + points.len() + g * g);
    out.extend([rad, delta]);
    out.extend_from_slice(&points);
    for i in 0..g {
        let y = rad - 2.0 * rad * i as f64 / (g - 1) as f64;
        for j in 0..g {
            let x = -rad + 2.0 * rad * j as f64 / (g - 1) as f64;
            let v = if b.contains(&[x, y], 0.0) {
                f.evaluate(&[x, y]).map_err(|e| e.to_string())?.value
            } else {
                f64::NAN
            };
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_curve_rows() {
        let rows = geometry_curve(f64::INFINITY, 5).unwrap();
        assert_eq!(rows.len(), 20);
        for r in rows.chunks_exact(4) {
            assert!((r[2] - 3f64.sqrt()).abs() < 1e-12);
            assert!((r[3] - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(geometry_curve(0.5, 3).is_err());
        assert!(geometry_curve(2.0, 0).is_err());
    }

    #[test]
    fn samples_are_in_the_square() {
        let pts = sample_points_2d(f64::INFINITY, 200, 4).unwrap();
        assert_eq!(pts.len(), 400);
        assert!(pts.iter().all(|v| v.abs() <= 0.5));
        assert_eq!(pts, sample_points_2d(f64::INFINITY, 200, 4).unwrap());
    }

    #[test]
    fn field_vanishes_at_nodes_and_saturates_far_away() {
        let grid = 41;
        let out = fooling_field(2.0, 3, 0.0, grid, 7).unwrap();
        let (rad, delta) = (out[0], out[1]);
        assert!(rad > 0.0 && delta > 0.0);
        let values = &out[2 + 6..];
        assert_eq!(values.len(), (grid * grid) as usize);
        assert!(values.iter().any(|v| v.is_nan()));
        let finite: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        assert!(finite.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(finite.contains(&1.0));
        assert!(fooling_field(2.0, 3, 10.0, grid, 7).is_err());
    }
}
