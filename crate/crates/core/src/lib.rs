//! Executable companion to the curse-of-dimensionality analysis of
//! numerical integration on isotropic convex bodies.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: closed forms for volume-normalized `l_p` balls `D_p^d`
//!   (volume, scale `alpha_{d,p}`, second moment `gamma_{d,p}^2`, isotropic
//!   constant, radius) together with log-gamma / digamma and the
//!   monotonicity certificate behind the `sqrt(3)` radius-ratio bound.
//! * [`sampling`]: exact samplers for the generalized Gaussian, the cone
//!   measure, uniform and isotropic points in `D_p^d`.
//! * [`concentration`]: thin-shell tails, intersection volumes, moment
//!   integrals and empirical `psi_alpha` norms.
//! * [`fooling`]: distance to a convex hull, the `C^1` fooling function and
//!   its certified Lipschitz bounds, the admissible `delta` window.
//! * [`complexity`]: curse-condition predicate, lower-bound counts and
//!   trivial-algorithm upper bounds.
//!
//! All Monte Carlo routines are deterministic functions of their seed and
//! produce identical results for any worker count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod concentration;
pub mod error;
pub mod fooling;
pub mod geometry;
pub mod io;
pub mod parallel;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{Exponent, IsotropicBody, PBallBody};
