//! Rotationally symmetric model manifolds and the radial measure.
//!
//! A model manifold of dimension `N ≥ 3` carries the metric `dr² + ψ(r)² dθ²`
//! with warping function `ψ(r) = r` (flat space) or `ψ(r) = sinh r` (hyperbolic
//! space).  Every integral of a radial function then collapses to a line
//! integral against the weight
//!
//! ```text
//!     dμ = ω_{N-1} ψ(r)^{N-1} dr,      ω_{N-1} = 2 π^{N/2} / Γ(N/2),
//! ```
//!
//! and the radial part of the p-laplacian becomes
//! `ψ^{1-N} (ψ^{N-1} |u_r|^{p-2} u_r)_r`.  This module owns the weight, uniform
//! radial grids on `[0, R]`, weighted `L^q` norms of sampled profiles, exact
//! ball volumes, and randomized lower envelopes ("floors") for the Poincaré
//! quotient `‖∇v‖_p / ‖v‖_p` and the Sobolev quotient `‖∇v‖_p / ‖v‖_{p*}`
//! over compactly supported radial test profiles.
//!
//! Quadrature conventions: norms use the trapezoid rule on the grid nodes
//! (second order in `dr`, and exact about the origin where `ψ(0) = 0` kills the
//! weight); volumes use adaptive Simpson; gradient integrals in the Rayleigh
//! quotients use midpoint values on the grid faces.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("model manifolds need dimension N >= 3 (got {0})")]
    Dimension(u32),
    #[error("radial grid needs r_max > 0 and nr >= 16 (got r_max = {r_max}, nr = {nr})")]
    Grid { r_max: f64, nr: usize },
    #[error("ball radius must be positive and finite (got {0})")]
    Radius(f64),
    #[error("L^q norms are defined for q >= 1 (got q = {0})")]
    NormExponent(f64),
    #[error("profile has {got} samples but the grid carries {expected} nodes")]
    SampleCount { got: usize, expected: usize },
    #[error("the Poincare quotient has no positive floor on the flat model; use the hyperbolic manifold")]
    FlatPoincare,
    #[error("exponent p = {p} is outside the admissible range ({lo}, {hi}) for N = {dim}")]
    ExponentRange { p: f64, lo: f64, hi: f64, dim: u32 },
    #[error("at least one trial profile is required")]
    NoTrials,
}

/// Which warping function the manifold uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    /// ψ(r) = r: flat Euclidean space.
    Euclidean,
    /// ψ(r) = sinh r: hyperbolic space of constant curvature -1.
    Hyperbolic,
}

/// A rotationally symmetric model manifold: a warping kind plus a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub dim: u32,
}

impl ManifoldSpec {
    pub fn new(kind: ManifoldKind, dim: u32) -> Result<Self, GeometryError> {
        let spec = ManifoldSpec { kind, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.dim < 3 {
            return Err(GeometryError::Dimension(self.dim));
        }
        Ok(())
    }

    /// Warping function and its derivative, `(ψ(r), ψ'(r))`.  `r` must be nonnegative.
    pub fn warping(&self, r: f64) -> (f64, f64) {
        assert!(r >= 0.0, "warping is defined for nonnegative r (got {r})");
        match self.kind {
            ManifoldKind::Euclidean => (r, 1.0),
            ManifoldKind::Hyperbolic => (r.sinh(), r.cosh()),
        }
    }

    /// Area `ω_{N-1} = 2 π^{N/2} / Γ(N/2)` of the unit (N-1)-sphere.
    ///
    /// `Γ(N/2)` is evaluated exactly by the recursion `Γ(x+1) = x Γ(x)` seeded
    /// with `Γ(1) = 1` (even N) or `Γ(1/2) = √π` (odd N).
    pub fn unit_sphere_area(&self) -> f64 {
        let half = f64::from(self.dim) / 2.0;
        let (mut x, mut gamma) = if self.dim.is_multiple_of(2) {
            (1.0, 1.0)
        } else {
            (0.5, PI.sqrt())
        };
        while x < half {
            gamma *= x;
            x += 1.0;
        }
        2.0 * PI.powf(half) / gamma
    }

    /// Radial measure density `ω_{N-1} ψ(r)^{N-1}`.
    pub fn measure_weight(&self, r: f64) -> f64 {
        let (psi, _) = self.warping(r);
        self.unit_sphere_area() * psi.powi(self.dim as i32 - 1)
    }
}

/// Uniform grid on `[0, R]` with `nr` interior nodes: `r_j = j·dr` for
/// `j = 0, …, nr+1` and `dr = R / (nr + 1)`.  Node `0` is the origin, node
/// `nr+1` the Dirichlet boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub nr: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, nr: usize) -> Result<Self, GeometryError> {
        let grid = RadialGrid { r_max, nr };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) || self.nr < 16 {
            return Err(GeometryError::Grid {
                r_max: self.r_max,
                nr: self.nr,
            });
        }
        Ok(())
    }

    pub fn dr(&self) -> f64 {
        self.r_max / (self.nr + 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dr()
    }

    /// Total node count including origin and boundary: `nr + 2`.
    pub fn num_nodes(&self) -> usize {
        self.nr + 2
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
fn simpson_rule(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)] // the classic recursion threads its whole frame
fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson_rule(f, a, fa, m, fm);
    let (rm, frm, right) = simpson_rule(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + simpson_recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson_rule(&f, a, fa, b, fb);
    simpson_recurse(&f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Integral of the measure density over `[a, b]`, i.e. the volume of the
/// spherical shell with those radii.
pub fn weight_integral(manifold: &ManifoldSpec, a: f64, b: f64) -> f64 {
    debug_assert!(0.0 <= a && a <= b);
    let omega = manifold.unit_sphere_area();
    let n = manifold.dim as i32 - 1;
    let psi_pow = |r: f64| {
        let (psi, _) = manifold.warping(r);
        psi.powi(n)
    };
    // Tolerance relative to a crude scale of the integrand.
    let scale = (psi_pow(b) * (b - a)).max(1e-30);
    omega * adaptive_simpson(psi_pow, a, b, 1e-13 * scale)
}

/// Volume of the geodesic ball of radius `r`: `∫_0^r ω_{N-1} ψ^{N-1} ds`.
pub fn ball_volume(manifold: &ManifoldSpec, r: f64) -> Result<f64, GeometryError> {
    manifold.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeometryError::Radius(r));
    }
    Ok(weight_integral(manifold, 0.0, r))
}

/// Weighted `L^q` norm of a profile sampled on the grid nodes, `q ∈ [1, ∞]`.
///
/// Finite `q` uses the trapezoid rule against the radial measure; `q = ∞`
/// returns the max of `|values|`.  The origin node carries zero weight because
/// `ψ(0) = 0`, and the boundary node carries the half-cell trapezoid weight.
pub fn lq_norm(
    values: &[f64],
    grid: &RadialGrid,
    manifold: &ManifoldSpec,
    q: f64,
) -> Result<f64, GeometryError> {
    grid.validate()?;
    manifold.validate()?;
    if values.len() != grid.num_nodes() {
        return Err(GeometryError::SampleCount {
            got: values.len(),
            expected: grid.num_nodes(),
        });
    }
    if q.is_nan() || q < 1.0 {
        return Err(GeometryError::NormExponent(q));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
    }
    let dr = grid.dr();
    let omega = manifold.unit_sphere_area();
    let last = values.len() - 1;
    let mut sum = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let (psi, _) = manifold.warping(grid.node(j));
        let trapezoid = if j == 0 || j == last { 0.5 } else { 1.0 };
        sum += trapezoid * dr * omega * psi.powi(manifold.dim as i32 - 1) * v.abs().powf(q);
    }
    Ok(sum.powf(1.0 / q))
}

/// `∫ |v'|^p dμ` approximated with face-midpoint values: the difference
/// quotient on each face `r_{j+1/2}` against the weight at the face.
fn gradient_lp_integral(
    values: &[f64],
    grid: &RadialGrid,
    manifold: &ManifoldSpec,
    p: f64,
) -> f64 {
    let dr = grid.dr();
    let omega = manifold.unit_sphere_area();
    let mut sum = 0.0;
    for j in 0..values.len() - 1 {
        let slope = (values[j + 1] - values[j]) / dr;
        let (psi, _) = manifold.warping(grid.node(j) + 0.5 * dr);
        sum += slope.abs().powf(p) * dr * omega * psi.powi(manifold.dim as i32 - 1);
    }
    sum
}

/// One fixed smooth bump: a centered Gaussian of width `R/4` under the
/// compact-support cutoff `(1 - (r/R)²)²`.
pub fn reference_bump(grid: &RadialGrid) -> Vec<f64> {
    let width = grid.r_max / 4.0;
    (0..grid.num_nodes())
        .map(|j| {
            let r = grid.node(j);
            let cut = 1.0 - (r / grid.r_max).powi(2);
            (-(r / width).powi(2)).exp() * cut * cut
        })
        .collect()
}

/// Random test profile: a mixture of 1–4 Gaussian bumps with random centers,
/// widths, and amplitudes, multiplied by the cutoff `(1 - (r/R)²)²` so the
/// profile vanishes at the boundary with zero slope.
fn random_profile(grid: &RadialGrid, rng: &mut impl Rng) -> Vec<f64> {
    let r_max = grid.r_max;
    let count = rng.random_range(1..=4usize);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.random_range(0.2..1.0),           // amplitude
                rng.random_range(0.0..0.6 * r_max),   // center
                rng.random_range(0.08..0.35) * r_max, // width
            )
        })
        .collect();
    (0..grid.num_nodes())
        .map(|j| {
            let r = grid.node(j);
            let cut = 1.0 - (r / r_max).powi(2);
            let mix: f64 = bumps
                .iter()
                .map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
                .sum();
            mix * cut * cut
        })
        .collect()
}

fn rayleigh_quotient(
    values: &[f64],
    grid: &RadialGrid,
    manifold: &ManifoldSpec,
    p: f64,
    denominator_q: f64,
) -> Result<f64, GeometryError> {
    let num = gradient_lp_integral(values, grid, manifold, p).powf(1.0 / p);
    let den = lq_norm(values, grid, manifold, denominator_q)?;
    Ok(num / den)
}

/// Minimum of the Poincaré quotient `‖∇v‖_p / ‖v‖_p` over the fixed bump and
/// `trials` random test profiles, on the hyperbolic model only.
///
/// On hyperbolic space the quotient is bounded below by a positive constant
/// (for `p = 2` and dimension `N` the sharp floor is `(N-1)/p` as `R → ∞`),
/// while on flat space the infimum over growing balls is zero, so the flat
/// model is rejected.  Requires `1 < p < N`.  The returned minimum is an upper
/// envelope for the true constant: every test profile certifies a value the
/// constant cannot exceed.
pub fn poincare_rayleigh(
    manifold: &ManifoldSpec,
    p: f64,
    grid: &RadialGrid,
    trials: usize,
    seed: u64,
) -> Result<f64, GeometryError> {
    manifold.validate()?;
    grid.validate()?;
    if manifold.kind != ManifoldKind::Hyperbolic {
        return Err(GeometryError::FlatPoincare);
    }
    if !(p > 1.0 && p < f64::from(manifold.dim)) {
        return Err(GeometryError::ExponentRange {
            p,
            lo: 1.0,
            hi: f64::from(manifold.dim),
            dim: manifold.dim,
        });
    }
    if trials == 0 {
        return Err(GeometryError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut floor = rayleigh_quotient(&reference_bump(grid), grid, manifold, p, p)?;
    for _ in 0..trials {
        let profile = random_profile(grid, &mut rng);
        floor = floor.min(rayleigh_quotient(&profile, grid, manifold, p, p)?);
    }
    Ok(floor)
}

/// Minimum of the Sobolev quotient `‖∇v‖_p / ‖v‖_{p*}`, `p* = pN/(N-p)`, over
/// the fixed bump and `trials` random test profiles.  Works on either model;
/// requires `2N/(N+1) < p < N`.  As with [`poincare_rayleigh`], the result is
/// a certified upper envelope for the best constant in
/// `‖v‖_{p*} ≤ (1/C) ‖∇v‖_p`.
pub fn sobolev_ratio_floor(
    manifold: &ManifoldSpec,
    p: f64,
    grid: &RadialGrid,
    trials: usize,
    seed: u64,
) -> Result<f64, GeometryError> {
    manifold.validate()?;
    grid.validate()?;
    let n = f64::from(manifold.dim);
    let lo = 2.0 * n / (n + 1.0);
    if !(p > lo && p < n) {
        return Err(GeometryError::ExponentRange {
            p,
            lo,
            hi: n,
            dim: manifold.dim,
        });
    }
    if trials == 0 {
        return Err(GeometryError::NoTrials);
    }
    let p_star = p * n / (n - p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut floor = rayleigh_quotient(&reference_bump(grid), grid, manifold, p, p_star)?;
    for _ in 0..trials {
        let profile = random_profile(grid, &mut rng);
        floor = floor.min(rayleigh_quotient(&profile, grid, manifold, p, p_star)?);
    }
    Ok(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_closed_forms() {
        // ω_2 = 4π, ω_3 = 2π²
        let s3 = ManifoldSpec::new(ManifoldKind::Euclidean, 3).unwrap();
        let s4 = ManifoldSpec::new(ManifoldKind::Euclidean, 4).unwrap();
        assert!((s3.unit_sphere_area() - 4.0 * PI).abs() < 1e-14);
        assert!((s4.unit_sphere_area() - 2.0 * PI * PI).abs() < 1e-14);
    }

    #[test]
    fn adaptive_simpson_integrates_polynomials() {
        // ∫_0^2 r³ dr = 4
        let v = adaptive_simpson(|r| r * r * r, 0.0, 2.0, 1e-13);
        assert!((v - 4.0).abs() < 1e-12);
    }
}
