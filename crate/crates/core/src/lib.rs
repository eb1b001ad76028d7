//! Numerical laboratory for radial reaction-diffusion flows on model manifolds.
//!
//! The object of study is the Dirichlet problem on a geodesic ball of radius `R`,
//!
//! ```text
//!     u_t = div(|∇u|^{p-2} ∇u) + T_k(u^σ)      (p-laplacian mode)
//!     u_t = Δ(u^m)            + T_k(u^σ)      (porous-medium mode)
//! ```
//!
//! posed on a rotationally symmetric manifold (flat space or hyperbolic space),
//! with `T_k` the truncation at level `k` and nonnegative radial data vanishing
//! on the boundary sphere.  The crate splits into four layers:
//!
//! * [`geometry`] — warping functions, the radial measure, `L^q` norms, ball
//!   volumes, and randomized floors for Poincaré/Sobolev quotients;
//! * [`exponents`] — the closed-form smoothing exponents, iteration ladders,
//!   and smallness thresholds that govern decay and global existence, plus a
//!   residual suite for the algebraic identities tying them together;
//! * [`dynamics`] — an implicit finite-volume solver for the truncated flow with
//!   adaptive time stepping, blow-up detection, and norm recording;
//! * [`harness`] — log-log decay-rate fitting, comparison of measured rates
//!   against the predicted exponents, run classification, and parameter sweeps.

// Validation gates are written as `!(x > 0.0)` on purpose: the negation
// rejects NaN along with the out-of-range values, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod exponents;
pub mod geometry;
pub mod harness;
