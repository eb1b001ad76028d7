//! Deterministic radial solver for the truncated reaction-diffusion flow on a
//! geodesic ball with Dirichlet boundary.
//!
//! The problem is `u_t = div(|∇u|^{p-2}∇u) + T_k(u^σ)` (p-laplacian mode) or
//! `u_t = Δ(u^m) + T_k(u^σ)` (porous-medium mode) for nonnegative radial `u`
//! on `B_R`, `u(R) = 0`.  In radial coordinates the diffusion operator is
//! `ψ^{1-N} (ψ^{N-1} Φ(u_r))_r`, so the scheme is a finite-volume one: node
//! `j` owns the cell `[r_j - dr/2, r_j + dr/2]` with exact volume
//! `V_j = ∫ ω ψ^{N-1} dr`, and the discrete divergence is the difference of
//! face fluxes
//!
//! ```text
//!     F_{j+1/2} = ω ψ(r_{j+1/2})^{N-1} · a_{j+1/2} · (u_{j+1} - u_j)/dr,
//! ```
//!
//! with zero flux through the origin face (`ψ(0) = 0`, matching `u_r(0) = 0`)
//! and `u = 0` at the boundary node.  The coefficient is
//! `a = (|Du|² + ε_reg²)^{(p-2)/2}` from the lagged gradient (p-laplacian) or
//! `a = m·ū^{m-1}` from the lagged face average (porous medium).
//!
//! Time stepping is backward Euler in the diffusion with Picard-lagged
//! coefficients (the linear systems are tridiagonal M-matrices, solved by the
//! Thomas algorithm, hence order-preserving and `ℓ^q`-contractive), and
//! explicit in the truncated reaction.  A step whose Picard sweep does not
//! reach tolerance is rejected, and the driver halves `dt`; accepted steps
//! grow `dt` geometrically under three caps (accuracy, reaction stiffness,
//! landing on `t_end`).  Everything is sequential and deterministic: two runs
//! of the same config produce identical series.

use crate::exponents::{Mode, ProblemParams};
use crate::geometry::{lq_norm, weight_integral, GeometryError, ManifoldSpec, RadialGrid};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

/// Maximum Picard sweeps per implicit solve before the step is rejected.
pub const PICARD_MAX_ITERS: usize = 50;
/// Relative tolerance on successive Picard iterates.
pub const PICARD_RTOL: f64 = 1e-10;
/// A rejection cascade that pushes `dt` below this floor ends the run with
/// status `DtCollapse`.  (A small `dt` imposed by the stiffness caps does not:
/// the run keeps stepping.)
pub const DT_COLLAPSE_FLOOR: f64 = 1e-12;
/// Reaction stiffness cap: `dt ≤ factor·‖u‖_∞/T_k(‖u‖_∞^σ)` while the
/// reaction is on (which is `factor·‖u‖_∞^{1-σ}` wherever the truncation is
/// inactive).  Small enough that explicit integration of `u' = u^σ` tracks
/// the blow-up time to ~1%.
pub const REACTION_DT_FACTOR: f64 = 0.005;
/// Accuracy ceiling `dt ≤ factor·dt0`.  Tying the ceiling to `dt0` keeps the
/// scheme genuinely first-order in the step-size control: halving `dt0`
/// halves every accepted step, so simultaneous `(dr, dt0)` refinement
/// converges.  It also guarantees the geometric recording grid enough
/// accepted steps to land on.
const DT_CEILING_FACTOR: f64 = 50.0;
/// Growth factor applied to `dt` after an accepted step.
const DT_GROWTH: f64 = 1.2;
/// Recorded output times are spaced by this ratio (16 records per decade).
const RECORD_RATIO_LOG10: f64 = 1.0 / 16.0;
/// Hard safety valve on accepted steps per run.
const MAX_STEPS: u64 = 5_000_000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Why a single implicit step was rejected; the driver reacts by halving `dt`.
#[derive(Debug, Error, PartialEq)]
pub enum StepError {
    #[error("picard sweep stalled: relative change {residual:.3e} after {PICARD_MAX_ITERS} iterations")]
    PicardStalled { residual: f64 },
    #[error("non-finite values produced by the implicit solve")]
    NonFinite,
}

/// Truncation `T_k(v) = max(-k, min(v, k))`.
pub fn truncate(v: f64, k: f64) -> f64 {
    assert!(k > 0.0, "truncation level must be positive (got {k})");
    v.clamp(-k, k)
}

/// Excess over the truncation, `G_k(v) = v - T_k(v)`; `T_k + G_k = v` exactly.
pub fn excess(v: f64, k: f64) -> f64 {
    v - truncate(v, k)
}

/// Initial profile menu: nonnegative radial data vanishing at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Datum {
    /// `a·exp(-(r/width)²)`.
    Gaussian { amplitude: f64, width: f64 },
    /// Compact mollifier `a·exp(1 - 1/(1-(r/radius)²))` inside `r < radius`.
    Bump { amplitude: f64, radius: f64 },
    /// `a` on `r ≤ radius`, `0` outside.
    Indicator { amplitude: f64, radius: f64 },
}

impl Datum {
    pub fn amplitude(&self) -> f64 {
        match *self {
            Datum::Gaussian { amplitude, .. }
            | Datum::Bump { amplitude, .. }
            | Datum::Indicator { amplitude, .. } => amplitude,
        }
    }

    /// Same shape, new amplitude (sweep axis).
    pub fn with_amplitude(self, amplitude: f64) -> Self {
        match self {
            Datum::Gaussian { width, .. } => Datum::Gaussian { amplitude, width },
            Datum::Bump { radius, .. } => Datum::Bump { amplitude, radius },
            Datum::Indicator { radius, .. } => Datum::Indicator { amplitude, radius },
        }
    }

    fn eval(&self, r: f64) -> f64 {
        match *self {
            Datum::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            Datum::Bump { amplitude, radius } => {
                let s2 = (r / radius).powi(2);
                if s2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s2)).exp()
                } else {
                    0.0
                }
            }
            Datum::Indicator { amplitude, radius } => {
                if r <= radius {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Samples the profile on the grid nodes, forcing the Dirichlet boundary
    /// value to zero.
    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        let mut v: Vec<f64> = (0..grid.num_nodes()).map(|j| self.eval(grid.node(j))).collect();
        *v.last_mut().expect("grid has nodes") = 0.0;
        v
    }

    fn validate(&self, grid: &RadialGrid) -> Result<(), String> {
        let a = self.amplitude();
        if !(a >= 0.0 && a.is_finite()) {
            return Err(format!("datum amplitude must be nonnegative and finite (got {a})"));
        }
        match *self {
            Datum::Gaussian { width, .. } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(format!("gaussian width must be positive (got {width})"));
                }
            }
            Datum::Bump { radius, .. } | Datum::Indicator { radius, .. } => {
                if !(radius > 0.0 && radius < grid.r_max) {
                    return Err(format!(
                        "datum radius must lie in (0, r_max) = (0, {}) (got {radius})",
                        grid.r_max
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A radial profile at one instant: samples on the grid nodes plus the clock.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl RadialState {
    pub fn from_datum(grid: RadialGrid, datum: &Datum) -> Self {
        RadialState {
            grid,
            values: datum.sample(&grid),
            time: 0.0,
        }
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.values.len() != self.grid.num_nodes() {
            return Err(DynamicsError::Config(format!(
                "state has {} samples for a grid with {} nodes",
                self.values.len(),
                self.grid.num_nodes()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DynamicsError::Config(
                "state values must be finite and nonnegative".into(),
            ));
        }
        if *self.values.last().unwrap() != 0.0 {
            return Err(DynamicsError::Config(
                "boundary node must carry the Dirichlet value 0".into(),
            ));
        }
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(DynamicsError::Config(format!(
                "state time must be nonnegative (got {})",
                self.time
            )));
        }
        Ok(())
    }
}

/// Everything one run needs: geometry, problem parameters, datum, horizon,
/// stepping controls, and which norms to record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub datum: Datum,
    pub t_end: f64,
    pub dt0: f64,
    /// Truncation level `k` of the reaction `T_k(u^σ)`.
    pub truncation_k: f64,
    pub reaction_on: bool,
    pub diffusion_on: bool,
    /// The run reports blow-up once `‖u‖_∞` reaches this.
    pub blowup_threshold: f64,
    /// Additional finite norm exponents recorded per output time (beyond the
    /// always-recorded `L^1` and `L^∞`).
    pub record_qs: Vec<f64>,
}

impl RunConfig {
    /// A config with the standard stepping controls: `k = 10¹²`, threshold
    /// `10⁸`, `dt0 = 10⁻⁴`, recording `L²` and `L⁴`, everything switched on.
    pub fn baseline(
        manifold: ManifoldSpec,
        params: ProblemParams,
        grid: RadialGrid,
        datum: Datum,
        t_end: f64,
    ) -> Self {
        RunConfig {
            manifold,
            params,
            grid,
            datum,
            t_end,
            dt0: 1e-4,
            truncation_k: 1e12,
            reaction_on: true,
            diffusion_on: true,
            blowup_threshold: 1e8,
            record_qs: vec![2.0, 4.0],
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.manifold.validate()?;
        self.grid.validate()?;
        if self.manifold.dim != self.params.dim() {
            return Err(DynamicsError::Config(format!(
                "manifold dimension {} and problem dimension {} disagree",
                self.manifold.dim,
                self.params.dim()
            )));
        }
        self.datum.validate(&self.grid).map_err(DynamicsError::Config)?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(DynamicsError::Config(format!(
                "t_end must be positive and finite (got {})",
                self.t_end
            )));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(DynamicsError::Config(format!(
                "dt0 must be positive and finite (got {})",
                self.dt0
            )));
        }
        if !(self.truncation_k > 0.0) {
            return Err(DynamicsError::Config(format!(
                "truncation_k must be positive (got {})",
                self.truncation_k
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(DynamicsError::Config(format!(
                "blowup_threshold must be positive (got {})",
                self.blowup_threshold
            )));
        }
        for &q in &self.record_qs {
            if !(q >= 1.0 && q.is_finite()) {
                return Err(DynamicsError::Config(format!(
                    "record_qs entries must be finite and >= 1 (got {q})"
                )));
            }
        }
        Ok(())
    }
}

/// One recorded output time: the clock, the step size that reached it, the
/// norms, and the running monitor `S(t) = sup_{τ≤t} τ‖u(τ)‖_∞^{σ-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    pub linf: f64,
    pub l1: f64,
    /// Norms for `RunConfig::record_qs`, in the same order.
    pub lq: Vec<f64>,
    pub s_monitor: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    /// Reached `t_end`.
    Completed,
    /// `‖u‖_∞` reached the blow-up threshold at `t_star`.
    Blowup { t_star: f64 },
    /// Rejection cascade drove `dt` below [`DT_COLLAPSE_FLOOR`] at time `t`
    /// (or the step safety valve tripped).
    DtCollapse { t: f64 },
}

/// Full artifact of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub series: Vec<SeriesRow>,
    pub status: RunStatus,
    /// Total mass removed by clipping negative undershoots to zero.
    pub clipped_mass: f64,
    pub steps: u64,
    pub rejected_steps: u64,
    pub wallclock_s: f64,
}

/// Outcome of one accepted implicit step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: RadialState,
    pub clipped_mass: f64,
    pub picard_iterations: usize,
}

/// Precomputed geometry plus scratch space for the implicit solves of one
/// config.  Cell volumes are exact integrals of the radial measure; face
/// weights carry `ω ψ^{N-1}(r_{j+1/2})/dr`.
pub struct Stepper {
    mode: Mode,
    diff_exp: f64,
    sigma: f64,
    truncation_k: f64,
    reaction_on: bool,
    diffusion_on: bool,
    /// Gradient regularization for the degenerate coefficient:
    /// `1e-8·max(1, ‖u₀‖_∞)/R`.
    eps_reg: f64,
    dr: f64,
    n_unknowns: usize,
    volumes: Vec<f64>,
    face_weight: Vec<f64>,
    // scratch buffers for the Picard/Thomas sweeps
    coeff: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    cprime: Vec<f64>,
    lag: Vec<f64>,
    sol: Vec<f64>,
    prev: Vec<f64>,
}

impl Stepper {
    pub fn new(config: &RunConfig) -> Result<Self, DynamicsError> {
        config.validate()?;
        let grid = config.grid;
        let dr = grid.dr();
        let nr = grid.nr;
        let manifold = config.manifold;
        let omega = manifold.unit_sphere_area();
        // Cell measures: the origin half-cell gets its exact integral; every
        // other cell is mass-lumped to dr·ω·ψ^{N-1}(r_j) — the same weight
        // the trapezoidal L^q quadrature assigns the node.  Conserving
        // exactly the reported L¹ norm (up to boundary outflux and the
        // origin half-cell) is what makes the per-step norm contraction hold
        // to roundoff; exact per-cell integrals would instead conserve a
        // quantity with an O(dr²) bias that drifts as the profile spreads.
        let volumes: Vec<f64> = (0..=nr)
            .map(|j| {
                if j == 0 {
                    weight_integral(&manifold, 0.0, 0.5 * dr)
                } else {
                    let (psi, _) = manifold.warping(grid.node(j));
                    dr * omega * psi.powi(manifold.dim as i32 - 1)
                }
            })
            .collect();
        let face_weight: Vec<f64> = (0..=nr)
            .map(|j| {
                let (psi, _) = manifold.warping(grid.node(j) + 0.5 * dr);
                omega * psi.powi(manifold.dim as i32 - 1) / dr
            })
            .collect();
        let n_unknowns = nr + 1;
        Ok(Stepper {
            mode: config.params.mode(),
            diff_exp: config.params.diffusion_exponent(),
            sigma: config.params.sigma(),
            truncation_k: config.truncation_k,
            reaction_on: config.reaction_on,
            diffusion_on: config.diffusion_on,
            eps_reg: 1e-8 * config.datum.amplitude().max(1.0) / grid.r_max,
            dr,
            n_unknowns,
            volumes,
            face_weight,
            coeff: vec![0.0; n_unknowns],
            lower: vec![0.0; n_unknowns],
            diag: vec![0.0; n_unknowns],
            upper: vec![0.0; n_unknowns],
            rhs: vec![0.0; n_unknowns],
            cprime: vec![0.0; n_unknowns],
            lag: vec![0.0; n_unknowns + 1],
            sol: vec![0.0; n_unknowns + 1],
            prev: vec![0.0; n_unknowns],
        })
    }

    /// Nonlinear face coefficient from the lagged iterate: `a_{j+1/2}`.
    fn face_coefficients(&mut self) {
        let half = 0.5 * (self.diff_exp - 2.0);
        for j in 0..self.n_unknowns {
            self.coeff[j] = match self.mode {
                Mode::PLap => {
                    let slope = (self.lag[j + 1] - self.lag[j]) / self.dr;
                    (slope * slope + self.eps_reg * self.eps_reg).powf(half)
                }
                Mode::Pme => {
                    // Δ(u^m) = div(m u^{m-1} ∇u): harmonic-free arithmetic face average.
                    let mid = 0.5 * (self.lag[j] + self.lag[j + 1]).max(0.0);
                    self.diff_exp * mid.powf(self.diff_exp - 1.0)
                }
            };
        }
    }

    /// Backward-Euler diffusion solve against the explicit right-hand side
    /// `b`, with the current `coeff`.  Writes the solution into `sol[..n]`.
    #[allow(clippy::needless_range_loop)] // stencil code: several arrays share the index
    fn tridiagonal_solve(&mut self, dt: f64, b: &[f64]) {
        let n = self.n_unknowns;
        for j in 0..n {
            let k_left = if j == 0 {
                0.0 // no flux through the origin face
            } else {
                self.face_weight[j - 1] * self.coeff[j - 1]
            };
            let k_right = self.face_weight[j] * self.coeff[j];
            let v_dt = self.volumes[j] / dt;
            self.lower[j] = -k_left;
            self.diag[j] = v_dt + k_left + k_right;
            self.upper[j] = -k_right;
            self.rhs[j] = v_dt * b[j];
            // The boundary neighbor of j = nr holds u = 0, so k_right simply
            // stays on the diagonal with no right-hand side contribution.
        }
        // Thomas sweep: the matrix is strictly diagonally dominant.
        self.cprime[0] = self.upper[0] / self.diag[0];
        self.sol[0] = self.rhs[0] / self.diag[0];
        for j in 1..n {
            let m = self.diag[j] - self.lower[j] * self.cprime[j - 1];
            self.cprime[j] = self.upper[j] / m;
            self.sol[j] = (self.rhs[j] - self.lower[j] * self.sol[j - 1]) / m;
        }
        for j in (0..n - 1).rev() {
            self.sol[j] -= self.cprime[j] * self.sol[j + 1];
        }
        self.sol[n] = 0.0;
    }

    /// One step of size `dt` from `state`.  Errors signal a rejected step.
    #[allow(clippy::needless_range_loop)] // stencil code: several arrays share the index
    pub fn step(&mut self, state: &RadialState, dt: f64) -> Result<StepOutcome, StepError> {
        assert!(dt > 0.0, "step size must be positive (got {dt})");
        let n = self.n_unknowns;
        debug_assert_eq!(state.values.len(), n + 1);

        // Explicit reaction: b = u + dt·T_k(u^σ).
        let mut b = vec![0.0; n];
        for j in 0..n {
            let u = state.values[j];
            b[j] = if self.reaction_on {
                u + dt * truncate(u.powf(self.sigma), self.truncation_k)
            } else {
                u
            };
            if !b[j].is_finite() {
                return Err(StepError::NonFinite);
            }
        }

        let mut iterations = 0;
        if !self.diffusion_on {
            self.sol[..n].copy_from_slice(&b);
            self.sol[n] = 0.0;
        } else {
            // Picard sweep on the lagged coefficient.  For the linear case
            // (p = 2) the coefficient is constant and one solve is exact.
            self.lag.copy_from_slice(&state.values);
            let linear = self.mode == Mode::PLap && self.diff_exp == 2.0;
            let mut residual = f64::INFINITY;
            let mut converged = false;
            let mut have_prev = false;
            while iterations < PICARD_MAX_ITERS {
                self.face_coefficients();
                self.tridiagonal_solve(dt, &b);
                iterations += 1;
                if self.sol.iter().any(|v| !v.is_finite()) {
                    return Err(StepError::NonFinite);
                }
                if linear {
                    converged = true;
                    break;
                }
                if have_prev {
                    let mut delta = 0.0f64;
                    let mut scale = 0.0f64;
                    for j in 0..n {
                        delta = delta.max((self.sol[j] - self.prev[j]).abs());
                        scale = scale.max(self.sol[j].abs());
                    }
                    residual = if scale > 0.0 { delta / scale } else { delta };
                    if residual <= PICARD_RTOL {
                        converged = true;
                        break;
                    }
                }
                self.prev.copy_from_slice(&self.sol[..n]);
                self.lag[..n].copy_from_slice(&self.sol[..n]);
                self.lag[n] = 0.0;
                have_prev = true;
            }
            if !converged {
                return Err(StepError::PicardStalled { residual });
            }
        }

        // Clip negative undershoots (roundoff only: the implicit diffusion is
        // an M-matrix solve and the reaction is nonnegative), recording the
        // removed mass.
        let mut clipped_mass = 0.0;
        let mut values = vec![0.0; n + 1];
        for j in 0..n {
            let v = self.sol[j];
            if v < 0.0 {
                clipped_mass += self.volumes[j] * (-v);
                values[j] = 0.0;
            } else {
                values[j] = v;
            }
        }
        values[n] = 0.0;

        Ok(StepOutcome {
            state: RadialState {
                grid: state.grid,
                values,
                time: state.time + dt,
            },
            clipped_mass,
            picard_iterations: iterations,
        })
    }
}

/// One implicit step via a throwaway [`Stepper`]; convenient for tests.
/// Drivers that step repeatedly should hold a `Stepper` instead.
pub fn step(
    state: &RadialState,
    dt: f64,
    config: &RunConfig,
) -> Result<StepOutcome, DynamicsError> {
    state.validate()?;
    let mut stepper = Stepper::new(config)?;
    Ok(stepper.step(state, dt)?)
}

fn series_row(
    state: &RadialState,
    dt: f64,
    s_monitor: f64,
    config: &RunConfig,
) -> Result<SeriesRow, DynamicsError> {
    let linf = lq_norm(&state.values, &state.grid, &config.manifold, f64::INFINITY)?;
    let l1 = lq_norm(&state.values, &state.grid, &config.manifold, 1.0)?;
    let lq = config
        .record_qs
        .iter()
        .map(|&q| lq_norm(&state.values, &state.grid, &config.manifold, q))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeriesRow {
        t: state.time,
        dt,
        linf,
        l1,
        lq,
        s_monitor,
    })
}

/// Advances the flow from `t = 0` to `t_end` (or until blow-up / step
/// collapse) with adaptive `dt`: halve on rejection, grow ×1.2 on success,
/// capped by the accuracy ceiling `50·dt0`, by the reaction stiffness cap
/// ([`REACTION_DT_FACTOR`]), and by the remaining time.
/// Norms are recorded at geometrically spaced times (16 per decade) plus the
/// initial and final instants.
pub fn run(config: &RunConfig) -> Result<RunRecord, DynamicsError> {
    config.validate()?;
    let start = Instant::now();
    let mut stepper = Stepper::new(config)?;
    let mut state = RadialState::from_datum(config.grid, &config.datum);
    let sigma = config.params.sigma();
    let record_ratio = 10f64.powf(RECORD_RATIO_LOG10);
    let end_slack = 1e-12 * config.t_end;

    let mut series = vec![series_row(&state, config.dt0, 0.0, config)?];
    let mut next_record = config.dt0;
    let mut s_run = 0.0f64;
    let mut clipped_mass = 0.0f64;
    let mut steps = 0u64;
    let mut rejected_steps = 0u64;
    let mut dt = config.dt0;

    let status = loop {
        let remaining = config.t_end - state.time;
        if remaining <= end_slack {
            break RunStatus::Completed;
        }
        let linf = state.linf();
        let mut dt_try = dt.min(DT_CEILING_FACTOR * config.dt0).min(remaining);
        if config.reaction_on && linf > 0.0 {
            // Stiffness cap against the actual (truncated) reaction rate:
            // η·‖u‖_∞^{1-σ} while u^σ < k, η·‖u‖_∞/k once the truncation
            // saturates — the latter keeps the climb to the blow-up
            // threshold logarithmic in step count.
            let rate = truncate(linf.powf(sigma), config.truncation_k);
            if rate > 0.0 {
                dt_try = dt_try.min(REACTION_DT_FACTOR * linf / rate);
            }
        }
        if state.time + dt_try == state.time {
            // dt fell below one ulp of the clock; no further progress is
            // possible.
            series.push(series_row(&state, dt_try, s_run, config)?);
            break RunStatus::DtCollapse { t: state.time };
        }
        match stepper.step(&state, dt_try) {
            Err(_) => {
                rejected_steps += 1;
                dt = 0.5 * dt_try;
                if dt < DT_COLLAPSE_FLOOR {
                    series.push(series_row(&state, dt_try, s_run, config)?);
                    break RunStatus::DtCollapse { t: state.time };
                }
            }
            Ok(outcome) => {
                state = outcome.state;
                clipped_mass += outcome.clipped_mass;
                steps += 1;
                let linf_new = state.linf();
                s_run = s_run.max(state.time * linf_new.powf(sigma - 1.0));
                if linf_new >= config.blowup_threshold {
                    series.push(series_row(&state, dt_try, s_run, config)?);
                    break RunStatus::Blowup { t_star: state.time };
                }
                let at_end = config.t_end - state.time <= end_slack;
                if state.time >= next_record || at_end {
                    series.push(series_row(&state, dt_try, s_run, config)?);
                    next_record = state.time * record_ratio;
                }
                dt = dt_try * DT_GROWTH;
                if steps >= MAX_STEPS {
                    break RunStatus::DtCollapse { t: state.time };
                }
            }
        }
    };

    Ok(RunRecord {
        config: config.clone(),
        series,
        status,
        clipped_mass,
        steps,
        rejected_steps,
        wallclock_s: start.elapsed().as_secs_f64(),
    })
}

/// Running supremum `S(t) = sup_{τ ≤ t} τ‖u(τ)‖_∞^{σ-1}` over the recorded
/// series.
pub fn s_monitor(record: &RunRecord, sigma: f64) -> Vec<(f64, f64)> {
    let mut s = 0.0f64;
    record
        .series
        .iter()
        .map(|row| {
            s = s.max(row.t * row.linf.powf(sigma - 1.0));
            (row.t, s)
        })
        .collect()
}
