//! Closed-form exponents, iteration ladders, and smallness thresholds for the
//! two degenerate diffusion modes.
//!
//! Everything in this module is an explicit rational/power expression in the
//! problem parameters.  The p-laplacian flow `u_t = Δ_p u + u^σ` and the
//! porous-medium flow `u_t = Δ(u^m) + u^σ` share one exponent algebra through
//! the substitution table
//!
//! | quantity                   | p-laplacian       | porous medium     |
//! |----------------------------|-------------------|-------------------|
//! | diffusion order `d`        | `p`               | `2`               |
//! | degeneracy `g`             | `p − 2`           | `m − 1`           |
//! | reaction gap               | `σ − p + 1`       | `σ − m`           |
//! | critical index             | `(σ−p+1)·N/p`     | `(σ−m)·N/2`       |
//! | sup-norm decay rate `α`    | `N/(N(p−2)+p)`    | `N/(N(m−1)+2)`    |
//!
//! and every smoothing pair below is a function of `(d, g, gap, σ, N, q)`
//! alone.  [`DiffusionScaling`] carries the triple; the porous-medium variants
//! of the estimates are obtained by evaluating the same expressions on the
//! substituted triple, and an integration test pins that equivalence on random
//! draws against literal transcriptions of the porous-medium formulas.
//!
//! Conventions used throughout:
//!
//! * a "smoothing pair" `(γ, δ)` means a bound `‖u(t)‖_q ≲ t^{−γ} ‖u₀‖^δ` —
//!   the time exponent and the datum exponent of one regularizing estimate;
//! * the smallness thresholds `ε̃₀, ε̄₀, ε̂₀, ε̃₁` are the explicit radii in the
//!   datum norm under which the global bounds close; they are evaluated
//!   verbatim, including one sign that is almost surely a misprint in the
//!   source formula (see [`ThresholdMode`]);
//! * expressions are evaluated faithfully, so outside their gates they may
//!   produce `NaN`, which is propagated rather than masked.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("model dimension must be at least 3 (got {0})")]
    Dimension(u32),
    #[error("p = {p} must lie in (2N/(N+1), N) = ({lo}, {hi}) for N = {dim}")]
    PRange { p: f64, lo: f64, hi: f64, dim: u32 },
    #[error("porous-medium exponent m = {0} must exceed 1")]
    MRange(f64),
    #[error("sigma = {sigma} must exceed {floor} in this mode")]
    SigmaFloor { sigma: f64, floor: f64 },
    #[error("constant {name} must be positive and finite (got {value})")]
    BadConstant { name: &'static str, value: f64 },
    #[error("mode {mode:?} requires the field `{field}`")]
    MissingField { mode: Mode, field: &'static str },
    #[error("{op} is defined in {expected:?} mode only")]
    WrongMode { op: &'static str, expected: Mode },
    #[error("{family:?}: {requirement}")]
    FamilyGate {
        family: Family,
        requirement: String,
    },
    #[error("q = {q} out of range: {requirement}")]
    QRange { q: f64, requirement: String },
    #[error("sequence base q0 = {0} must exceed 1")]
    SequenceBase(f64),
    #[error("ordering violated: {0}")]
    Ordering(&'static str),
    #[error("S_t = {0} must be nonnegative and finite")]
    NegativeMonitor(f64),
    #[error("the Poincare constant C_p is required for this threshold")]
    MissingPoincare,
    #[error("r = {0} must satisfy r >= 1")]
    RRange(f64),
}

/// Which diffusion nonlinearity the problem uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `u_t = div(|∇u|^{p-2}∇u) + u^σ`
    PLap,
    /// `u_t = Δ(u^m) + u^σ`
    Pme,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::PLap => "plap",
            Mode::Pme => "pme",
        })
    }
}

/// The substitution triple shared by the two modes: diffusion order `d`,
/// degeneracy `g`, and the reaction gap `σ − (subcritical edge)`.  See the
/// module-level table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionScaling {
    pub order: f64,
    pub degeneracy: f64,
    pub sigma_gap: f64,
}

fn serde_raw_error(e: ExponentError) -> String {
    e.to_string()
}

/// Serialization shadow for [`ProblemParams`]: keeps the on-disk form readable
/// (`p` for plap, `m` for pme) while funneling every deserialization through
/// the validating constructors.
#[derive(Serialize, Deserialize)]
struct RawProblemParams {
    mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    m: Option<f64>,
    sigma: f64,
    dim: u32,
    c_sp: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    c_p: Option<f64>,
}

/// Validated problem parameters: mode, diffusion exponent (`p` or `m`), the
/// reaction exponent `σ`, the dimension `N`, the Sobolev constant `C_sp`, and
/// optionally the Poincaré constant `C_p` (hyperbolic runs only).
///
/// Construction enforces the standing assumptions
/// `2N/(N+1) < p < N`, `σ > p − 1` (plap) and `m > 1`, `σ > m` (pme), with
/// `N ≥ 3` in both modes, so downstream code can rely on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblemParams", into = "RawProblemParams")]
pub struct ProblemParams {
    mode: Mode,
    exponent: f64,
    sigma: f64,
    dim: u32,
    c_sp: f64,
    c_p: Option<f64>,
}

impl TryFrom<RawProblemParams> for ProblemParams {
    type Error = String;
    fn try_from(raw: RawProblemParams) -> Result<Self, String> {
        match raw.mode {
            Mode::PLap => {
                let p = raw.p.ok_or_else(|| {
                    serde_raw_error(ExponentError::MissingField {
                        mode: Mode::PLap,
                        field: "p",
                    })
                })?;
                ProblemParams::plap(p, raw.sigma, raw.dim, raw.c_sp, raw.c_p)
                    .map_err(serde_raw_error)
            }
            Mode::Pme => {
                let m = raw.m.ok_or_else(|| {
                    serde_raw_error(ExponentError::MissingField {
                        mode: Mode::Pme,
                        field: "m",
                    })
                })?;
                ProblemParams::pme(m, raw.sigma, raw.dim, raw.c_sp, raw.c_p)
                    .map_err(serde_raw_error)
            }
        }
    }
}

impl From<ProblemParams> for RawProblemParams {
    fn from(p: ProblemParams) -> Self {
        RawProblemParams {
            mode: p.mode,
            p: (p.mode == Mode::PLap).then_some(p.exponent),
            m: (p.mode == Mode::Pme).then_some(p.exponent),
            sigma: p.sigma,
            dim: p.dim,
            c_sp: p.c_sp,
            c_p: p.c_p,
        }
    }
}

fn check_constant(name: &'static str, value: f64) -> Result<(), ExponentError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ExponentError::BadConstant { name, value })
    }
}

impl ProblemParams {
    /// p-laplacian parameters; enforces `N ≥ 3`, `2N/(N+1) < p < N`, `σ > p−1`.
    pub fn plap(
        p: f64,
        sigma: f64,
        dim: u32,
        c_sp: f64,
        c_p: Option<f64>,
    ) -> Result<Self, ExponentError> {
        if dim < 3 {
            return Err(ExponentError::Dimension(dim));
        }
        let n = f64::from(dim);
        let lo = 2.0 * n / (n + 1.0);
        if !(p > lo && p < n) {
            return Err(ExponentError::PRange { p, lo, hi: n, dim });
        }
        if !(sigma > p - 1.0) || !sigma.is_finite() {
            return Err(ExponentError::SigmaFloor {
                sigma,
                floor: p - 1.0,
            });
        }
        check_constant("C_sp", c_sp)?;
        if let Some(cp) = c_p {
            check_constant("C_p", cp)?;
        }
        Ok(ProblemParams {
            mode: Mode::PLap,
            exponent: p,
            sigma,
            dim,
            c_sp,
            c_p,
        })
    }

    /// Porous-medium parameters; enforces `N ≥ 3`, `m > 1`, `σ > m`.
    pub fn pme(
        m: f64,
        sigma: f64,
        dim: u32,
        c_sp: f64,
        c_p: Option<f64>,
    ) -> Result<Self, ExponentError> {
        if dim < 3 {
            return Err(ExponentError::Dimension(dim));
        }
        if !(m > 1.0) || !m.is_finite() {
            return Err(ExponentError::MRange(m));
        }
        if !(sigma > m) || !sigma.is_finite() {
            return Err(ExponentError::SigmaFloor { sigma, floor: m });
        }
        check_constant("C_sp", c_sp)?;
        if let Some(cp) = c_p {
            check_constant("C_p", cp)?;
        }
        Ok(ProblemParams {
            mode: Mode::Pme,
            exponent: m,
            sigma,
            dim,
            c_sp,
            c_p,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The diffusion exponent: `p` in plap mode, `m` in pme mode.
    pub fn diffusion_exponent(&self) -> f64 {
        self.exponent
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn dim_f(&self) -> f64 {
        f64::from(self.dim)
    }

    pub fn c_sp(&self) -> f64 {
        self.c_sp
    }

    pub fn c_p(&self) -> Option<f64> {
        self.c_p
    }

    /// The `(d, g, gap)` substitution triple for this mode.
    pub fn scaling(&self) -> DiffusionScaling {
        match self.mode {
            Mode::PLap => DiffusionScaling {
                order: self.exponent,
                degeneracy: self.exponent - 2.0,
                sigma_gap: self.sigma - self.exponent + 1.0,
            },
            Mode::Pme => DiffusionScaling {
                order: 2.0,
                degeneracy: self.exponent - 1.0,
                sigma_gap: self.sigma - self.exponent,
            },
        }
    }

    fn require_mode(&self, op: &'static str, expected: Mode) -> Result<(), ExponentError> {
        if self.mode == expected {
            Ok(())
        } else {
            Err(ExponentError::WrongMode { op, expected })
        }
    }
}

/// Critical index of the declared mode: `σ₀ = (σ−p+1)N/p` (plap) or
/// `σ₁ = (σ−m)N/2` (pme).
pub fn sigma_critical(params: &ProblemParams) -> f64 {
    let s = params.scaling();
    s.sigma_gap * params.dim_f() / s.order
}

/// `σ₀ = (σ − p + 1)·N/p`, the critical datum integrability index (plap mode).
pub fn sigma_zero(params: &ProblemParams) -> Result<f64, ExponentError> {
    params.require_mode("sigma_zero", Mode::PLap)?;
    Ok(sigma_critical(params))
}

/// `σ₁ = (σ − m)·N/2`, the critical datum integrability index (pme mode).
pub fn sigma_one(params: &ProblemParams) -> Result<f64, ExponentError> {
    params.require_mode("sigma_one", Mode::Pme)?;
    Ok(sigma_critical(params))
}

/// The Fujita-type supercriticality gate: `σ > p − 1 + p/N` (plap) or
/// `σ > m + 2/N` (pme); equivalent to the critical index exceeding 1.
///
/// Evaluated as the direct comparison (not via [`sigma_critical`]) so the
/// boundary case `σ = p − 1 + p/N` lands on `false` exactly.
pub fn fujita_gate(params: &ProblemParams) -> bool {
    let edge = match params.mode {
        Mode::PLap => params.exponent - 1.0 + params.exponent / params.dim_f(),
        Mode::Pme => params.exponent + 2.0 / params.dim_f(),
    };
    params.sigma > edge
}

/// Sup-norm decay rate of the reaction-free flow from integrable data:
/// `α = N/(N(p−2)+p)` (plap) or `N/(N(m−1)+2)` (pme).  The companion datum
/// exponent is `d/(Ng+d)`; see [`linfty_bound_exponents`] for the `L^r` scale.
pub fn alpha_smoothing(params: &ProblemParams) -> f64 {
    let s = params.scaling();
    let n = params.dim_f();
    n / (n * s.degeneracy + s.order)
}

/// The regularizing estimates whose `(time, datum)` exponent pairs
/// [`smoothing_pair`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `L^{σ₀} → L^q` bound of the supercritical small-data theory (plap, finite q).
    Thm1ii,
    /// `L^{q0} → L^q` bound for the reaction-free flow (plap, finite q).
    Prop42,
    /// `L^{σ₀} → L^∞` endpoint bound (plap, q = ∞ only).
    Thm2,
    /// `L^s → L^q` bound in the Poincaré-assisted regime (plap with p > 2, finite q).
    Thm3,
    /// `L^{q0} → L^q` reaction-free bound in the same regime (plap with p > 2, finite q).
    Prop71,
    /// Porous-medium analogue of the supercritical family (finite q, or q = ∞
    /// for the endpoint bound).
    PmeThm,
}

fn family_gate(family: Family, requirement: impl Into<String>) -> ExponentError {
    ExponentError::FamilyGate {
        family,
        requirement: requirement.into(),
    }
}

/// `(γ_q, δ_q)` of the supercritical family on the scaling triple:
/// `γ = (1/(σ−1))(1 − N·gap/(dq))`, `δ = (gap/(σ−1))(1 + N·g/(dq))`.
fn supercritical_pair(s: DiffusionScaling, sigma: f64, n: f64, q: f64) -> (f64, f64) {
    let gamma = (1.0 / (sigma - 1.0)) * (1.0 - n * s.sigma_gap / (s.order * q));
    let delta = (s.sigma_gap / (sigma - 1.0)) * (1.0 + n * s.degeneracy / (s.order * q));
    (gamma, delta)
}

/// `(γ_q, δ_q)` of the reaction-free `L^{q0} → L^q` family:
/// `γ = (1/q0 − 1/q)·N q0/(d q0 + N g)`, `δ = (q0/q)(q + (N/d)g)/(q0 + (N/d)g)`.
fn reaction_free_pair(s: DiffusionScaling, n: f64, q0: f64, q: f64) -> (f64, f64) {
    let gamma = (1.0 / q0 - 1.0 / q) * n * q0 / (s.order * q0 + n * s.degeneracy);
    let delta = (q0 / q) * (q + (n / s.order) * s.degeneracy) / (q0 + (n / s.order) * s.degeneracy);
    (gamma, delta)
}

/// `(γ_q, δ_q)` of the Poincaré-assisted family: `γ = (s/g)(1/s − 1/q)`, `δ = s/q`.
fn poincare_pair(degeneracy: f64, s: f64, q: f64) -> (f64, f64) {
    ((s / degeneracy) * (1.0 / s - 1.0 / q), s / q)
}

/// The `(time exponent, datum exponent)` pair of the requested estimate:
/// a bound of the form `‖u(t)‖_q ≤ C t^{−γ} ‖u₀‖^δ` (datum norm fixed by the
/// family: `L^{σ₀}` for `Thm1ii`/`Thm2`, `L^{q0}` for `Prop42`/`Prop71`,
/// `L^s` for `Thm3`, `L^{σ₁}` for `PmeThm`).
///
/// `q0_or_s` is the datum index for `Prop42`/`Prop71` (`q0`) and `Thm3` (`s`);
/// the other families carry their datum index in the parameters and ignore it.
/// `q = ∞` is accepted only where the underlying estimate has a sup-norm form:
/// `Thm2` (only `q = ∞`) and `PmeThm`.
pub fn smoothing_pair(
    family: Family,
    q0_or_s: f64,
    q: f64,
    params: &ProblemParams,
) -> Result<(f64, f64), ExponentError> {
    let s = params.scaling();
    let n = params.dim_f();
    let sigma = params.sigma();
    match family {
        Family::Thm1ii => {
            params.require_mode("smoothing_pair(thm1ii)", Mode::PLap)?;
            if !fujita_gate(params) {
                return Err(family_gate(family, "needs sigma > p - 1 + p/N"));
            }
            let s0 = sigma_critical(params);
            if q.is_infinite() {
                return Err(family_gate(family, "finite q only; the q = infinity endpoint is a separate estimate (thm2)"));
            }
            if !(q >= s0 * (1.0 - 1e-12)) {
                return Err(ExponentError::QRange {
                    q,
                    requirement: format!("needs q >= sigma0 = {s0}"),
                });
            }
            Ok(supercritical_pair(s, sigma, n, q))
        }
        Family::Prop42 => {
            params.require_mode("smoothing_pair(prop42)", Mode::PLap)?;
            if !fujita_gate(params) {
                return Err(family_gate(family, "needs sigma > p - 1 + p/N"));
            }
            let q0 = q0_or_s;
            if !(q0 >= 1.0) || !q0.is_finite() {
                return Err(ExponentError::QRange {
                    q: q0,
                    requirement: "needs 1 <= q0".into(),
                });
            }
            if q.is_infinite() {
                return Err(family_gate(family, "finite q only; the estimate does not pass to q = infinity"));
            }
            if !(q >= q0) {
                return Err(ExponentError::QRange {
                    q,
                    requirement: format!("needs q0 <= q with q0 = {q0}"),
                });
            }
            Ok(reaction_free_pair(s, n, q0, q))
        }
        Family::Thm2 => {
            params.require_mode("smoothing_pair(thm2)", Mode::PLap)?;
            if !fujita_gate(params) {
                return Err(family_gate(family, "needs sigma > p - 1 + p/N"));
            }
            if !q.is_infinite() {
                return Err(family_gate(family, "sup-norm endpoint only: pass q = infinity"));
            }
            Ok((1.0 / (sigma - 1.0), s.sigma_gap / (sigma - 1.0)))
        }
        Family::Thm3 => {
            params.require_mode("smoothing_pair(thm3)", Mode::PLap)?;
            if s.degeneracy <= 0.0 {
                return Err(family_gate(family, "needs p > 2"));
            }
            let datum_s = q0_or_s;
            let s0 = sigma_critical(params);
            if !(datum_s > s0.max(1.0)) {
                return Err(ExponentError::QRange {
                    q: datum_s,
                    requirement: format!("needs s > max(sigma0, 1) = {}", s0.max(1.0)),
                });
            }
            if q.is_infinite() {
                return Err(family_gate(family, "finite q only; the sup-norm bound is parameterized by beta_qs"));
            }
            if !(q >= datum_s) {
                return Err(ExponentError::QRange {
                    q,
                    requirement: format!("needs s <= q with s = {datum_s}"),
                });
            }
            Ok(poincare_pair(s.degeneracy, datum_s, q))
        }
        Family::Prop71 => {
            params.require_mode("smoothing_pair(prop71)", Mode::PLap)?;
            if s.degeneracy <= 0.0 {
                return Err(family_gate(family, "needs p > 2"));
            }
            let q0 = q0_or_s;
            if !(q0 > 1.0) || !q0.is_finite() {
                return Err(ExponentError::QRange {
                    q: q0,
                    requirement: "needs 1 < q0".into(),
                });
            }
            if q.is_infinite() {
                return Err(family_gate(family, "finite q only"));
            }
            if !(q >= q0) {
                return Err(ExponentError::QRange {
                    q,
                    requirement: format!("needs q0 <= q with q0 = {q0}"),
                });
            }
            Ok(poincare_pair(s.degeneracy, q0, q))
        }
        Family::PmeThm => {
            params.require_mode("smoothing_pair(pme_thm)", Mode::Pme)?;
            if !fujita_gate(params) {
                return Err(family_gate(family, "needs sigma > m + 2/N"));
            }
            let s1 = sigma_critical(params);
            if q.is_infinite() {
                // Sup-norm endpoint of the porous-medium family.
                return Ok((1.0 / (sigma - 1.0), s.sigma_gap / (sigma - 1.0)));
            }
            if !(q >= s1 * (1.0 - 1e-12)) {
                return Err(ExponentError::QRange {
                    q,
                    requirement: format!("needs q >= sigma1 = {s1}"),
                });
            }
            Ok(supercritical_pair(s, sigma, n, q))
        }
    }
}

/// `β_{q,s} = (1/(p−2))(1 − ps/(N(p−2)+pq))`: the sup-norm time exponent of
/// the Poincaré-assisted `L^s` theory, parameterized by the working index
/// `q ≥ s`.  Requires plap mode with `p > 2` and `s > max(σ₀, 1)`; the
/// diagonal `q = s` is admitted (β is still positive there since
/// `ps < N(p−2) + ps`).
pub fn beta_qs(s: f64, q: f64, params: &ProblemParams) -> Result<f64, ExponentError> {
    params.require_mode("beta_qs", Mode::PLap)?;
    let sc = params.scaling();
    if sc.degeneracy <= 0.0 {
        return Err(ExponentError::Ordering("beta_qs needs p > 2"));
    }
    let s0 = sigma_critical(params);
    if !(s > s0.max(1.0)) {
        return Err(ExponentError::QRange {
            q: s,
            requirement: format!("needs s > max(sigma0, 1) = {}", s0.max(1.0)),
        });
    }
    if !(q >= s) || !q.is_finite() {
        return Err(ExponentError::QRange {
            q,
            requirement: format!("needs s <= q < infinity with s = {s}"),
        });
    }
    let n = params.dim_f();
    Ok((1.0 / sc.degeneracy) * (1.0 - sc.order * s / (n * sc.degeneracy + sc.order * q)))
}

fn qn_gates(q0: f64, params: &ProblemParams) -> Result<(f64, f64), ExponentError> {
    params.require_mode("qn_sequence", Mode::PLap)?;
    if !(q0 > 1.0) || !q0.is_finite() {
        return Err(ExponentError::SequenceBase(q0));
    }
    Ok((params.diffusion_exponent(), params.dim_f()))
}

/// Closed form of the Sobolev iteration ladder
/// `q_n = (N/(N−p))^n q0 + (N/(N−p))(p−2) Σ_{i<n} (N/(N−p))^i`.
pub fn qn_sequence(q0: f64, n: u32, params: &ProblemParams) -> Result<f64, ExponentError> {
    let (p, nf) = qn_gates(q0, params)?;
    let ratio = nf / (nf - p);
    let power = ratio.powi(n as i32);
    // Geometric sum Σ_{i=0}^{n-1} ratio^i = (ratio^n − 1)/(ratio − 1); ratio > 1 always.
    let geom = (power - 1.0) / (ratio - 1.0);
    Ok(power * q0 + ratio * (p - 2.0) * geom)
}

/// The same ladder by direct recursion `q_n = (N/(N−p))(p + q_{n−1} − 2)`;
/// agrees with [`qn_sequence`] to rounding (asserted in tests).
pub fn qn_sequence_recursive(
    q0: f64,
    n: u32,
    params: &ProblemParams,
) -> Result<f64, ExponentError> {
    let (p, nf) = qn_gates(q0, params)?;
    let ratio = nf / (nf - p);
    let mut q = q0;
    for _ in 0..n {
        q = ratio * (p + q - 2.0);
    }
    Ok(q)
}

/// Arithmetic ladder `q_m = q0 + m(p−2)` of the Poincaré-assisted iteration;
/// requires `p > 2`.
pub fn qm_sequence(q0: f64, m_idx: u32, params: &ProblemParams) -> Result<f64, ExponentError> {
    params.require_mode("qm_sequence", Mode::PLap)?;
    if params.diffusion_exponent() <= 2.0 {
        return Err(ExponentError::Ordering("qm_sequence needs p > 2"));
    }
    if !(q0 > 1.0) || !q0.is_finite() {
        return Err(ExponentError::SequenceBase(q0));
    }
    Ok(q0 + f64::from(m_idx) * (params.diffusion_exponent() - 2.0))
}

/// How to evaluate the second branch of the `ε̃₀`/`ε̄₀` thresholds, whose
/// printed denominator `(p − σ₀ − 2)` is almost surely a misprint for
/// `(p + σ₀ − 2)`: the printed form is negative for typical parameters and
/// only squares away for even `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Evaluate the printed denominator `(p − σ₀ − 2)` verbatim; may yield NaN.
    AsWritten,
    /// Use the repaired denominator `(p + σ₀ − 2)`.
    #[default]
    Corrected,
}

/// The explicit smallness radii of the supercritical theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eps0Thresholds {
    /// Ladder threshold from the given `q0`.
    pub eps_tilde0: f64,
    /// Single-rung threshold at `q` (no ladder, no halving).
    pub eps_bar0: f64,
    /// Ladder threshold restarted from `q0 = σ₀`.
    pub eps_hat0: f64,
    /// `ε = ε̄₀ ∧ ε̂₀`, the radius used by the sup-norm endpoint.
    pub eps_min: f64,
}

/// `min` that propagates NaN instead of discarding it (IEEE `min` would).
fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

/// One rung of the dissipation coefficient: `(p (x−1)^{1/p} / (p+x−2))^p`.
fn dissipation_rung(p: f64, x: f64) -> f64 {
    (p * (x - 1.0).powf(1.0 / p) / (p + x - 2.0)).powf(p)
}

/// Minimum of the rung over the Sobolev ladder started at `q0`, up to and
/// including the first rung `q_n ≥ q`.
fn ladder_rung_min(p: f64, nf: f64, q0: f64, q: f64) -> f64 {
    let ratio = nf / (nf - p);
    let mut x = q0;
    let mut best = dissipation_rung(p, x);
    let mut guard = 0u32;
    while x < q {
        x = ratio * (p + x - 2.0);
        best = best.min(dissipation_rung(p, x));
        guard += 1;
        if guard > 100_000 {
            break; // unreachable: ratio > 1 makes the ladder diverge
        }
    }
    best
}

fn eps0_second_branch(p: f64, s0: f64, mode: ThresholdMode) -> f64 {
    let den = match mode {
        ThresholdMode::AsWritten => p - s0 - 2.0,
        ThresholdMode::Corrected => p + s0 - 2.0,
    };
    (p * (s0 - 1.0).powf(1.0 / p) / den).powf(p)
}

/// The supercritical smallness radii:
///
/// ```text
///   ε̃₀ = [ min{ min_{n ≤ n̄} rung(q_n) ; rung_σ₀ } · C_sp^p / 2 ]^{1/(σ−p+1)}
///   ε̄₀ = [ min{ rung(q) · C_sp^p ; rung_σ₀ · C_sp^p } ]^{1/(σ−p+1)}
///   ε̂₀ = ε̃₀ with q0 = σ₀,      ε = ε̄₀ ∧ ε̂₀
/// ```
///
/// with `rung(x) = (p(x−1)^{1/p}/(p+x−2))^p`, `n̄` the first ladder index with
/// `q_{n̄} ≥ q`, and `rung_σ₀` the second branch controlled by `mode`.
/// Requires plap mode past the Fujita gate, `q0 > 1`, and `q ≥ q0`.
pub fn threshold_eps0(
    q: f64,
    q0: f64,
    params: &ProblemParams,
    mode: ThresholdMode,
) -> Result<Eps0Thresholds, ExponentError> {
    params.require_mode("threshold_eps0", Mode::PLap)?;
    if !fujita_gate(params) {
        return Err(ExponentError::SigmaFloor {
            sigma: params.sigma(),
            floor: params.diffusion_exponent() - 1.0
                + params.diffusion_exponent() / params.dim_f(),
        });
    }
    if !(q0 > 1.0) || !q0.is_finite() {
        return Err(ExponentError::SequenceBase(q0));
    }
    if !(q >= q0) || !q.is_finite() {
        return Err(ExponentError::QRange {
            q,
            requirement: format!("needs q0 <= q < infinity with q0 = {q0}"),
        });
    }
    let p = params.diffusion_exponent();
    let nf = params.dim_f();
    let s0 = sigma_critical(params);
    let gap = params.scaling().sigma_gap;
    let csp_p = params.c_sp().powf(p);
    let second = eps0_second_branch(p, s0, mode);

    let tilde = |base: f64| -> f64 {
        let inner = nan_min(ladder_rung_min(p, nf, base, q), second) * csp_p / 2.0;
        inner.powf(1.0 / gap)
    };
    let eps_tilde0 = tilde(q0);
    let eps_hat0 = tilde(s0);
    let eps_bar0 = nan_min(dissipation_rung(p, q) * csp_p, second * csp_p).powf(1.0 / gap);
    Ok(Eps0Thresholds {
        eps_tilde0,
        eps_bar0,
        eps_hat0,
        eps_min: nan_min(eps_bar0, eps_hat0),
    })
}

/// Interpolation exponent `θ(q) = (p−1)(p+q−2)/(σ(σ+q−1))` of the
/// Poincaré-assisted energy estimate (plap mode).
pub fn theta_interpolation(q: f64, params: &ProblemParams) -> Result<f64, ExponentError> {
    params.require_mode("theta_interpolation", Mode::PLap)?;
    if !(q > 1.0) || !q.is_finite() {
        return Err(ExponentError::QRange {
            q,
            requirement: "needs 1 < q < infinity".into(),
        });
    }
    let p = params.diffusion_exponent();
    let sigma = params.sigma();
    Ok((p - 1.0) * (p + q - 2.0) / (sigma * (sigma + q - 1.0)))
}

/// `C̃(q) = (1/C_sp)^{p(1−θ)(σ+q−1)/(σ+p+q−2)}`: the constant the Sobolev
/// step contributes when absorbing the gradient factor of the reaction term.
pub fn c_tilde(q: f64, params: &ProblemParams) -> Result<f64, ExponentError> {
    let theta = theta_interpolation(q, params)?;
    let p = params.diffusion_exponent();
    let sigma = params.sigma();
    Ok((1.0 / params.c_sp())
        .powf(p * (1.0 - theta) * (sigma + q - 1.0) / (sigma + p + q - 2.0)))
}

/// The Poincaré-assisted smallness radius and its building blocks at the
/// working index `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eps1Threshold {
    pub eps_tilde1: f64,
    /// `θ(q)` at the working index.
    pub theta: f64,
    /// `C̃(q)` at the working index.
    pub c_tilde: f64,
}

/// The smallness radius of the `p > 2` theory on the arithmetic ladder
/// `q_m = q0 + m(p−2)`:
///
/// ```text
///   ε̃₁ = min{ min_{m ≤ m̄} f(q_m) ; f(σN/p) },
///   f(x) = [ rung(x) · C̃(x) · C_p^{p(p−1)/σ} ]^{(σ+p+x−2)/(σ(σ+x−1)−p(p+x−2))}
/// ```
///
/// with `rung` as in [`threshold_eps0`] and `m̄` the first index with
/// `q_{m̄} ≥ q`.  Requires plap mode with `p > 2`, the Poincaré constant
/// `C_p`, `q0 > 1`, and `q ≥ q0`.  The expression is evaluated verbatim; NaN
/// propagates where it degenerates.
pub fn threshold_eps1(
    q: f64,
    q0: f64,
    params: &ProblemParams,
) -> Result<Eps1Threshold, ExponentError> {
    params.require_mode("threshold_eps1", Mode::PLap)?;
    let p = params.diffusion_exponent();
    if p <= 2.0 {
        return Err(ExponentError::Ordering("threshold_eps1 needs p > 2"));
    }
    let cp = params.c_p().ok_or(ExponentError::MissingPoincare)?;
    if !(q0 > 1.0) || !q0.is_finite() {
        return Err(ExponentError::SequenceBase(q0));
    }
    if !(q >= q0) || !q.is_finite() {
        return Err(ExponentError::QRange {
            q,
            requirement: format!("needs q0 <= q < infinity with q0 = {q0}"),
        });
    }
    let sigma = params.sigma();
    let nf = params.dim_f();
    let cp_factor = cp.powf(p * (p - 1.0) / sigma);
    let branch = |x: f64| -> Result<f64, ExponentError> {
        let exponent = (sigma + p + x - 2.0) / (sigma * (sigma + x - 1.0) - p * (p + x - 2.0));
        Ok((dissipation_rung(p, x) * c_tilde(x, params)? * cp_factor).powf(exponent))
    };

    let mut x = q0;
    let mut best = branch(x)?;
    let mut guard = 0u32;
    while x < q {
        x += p - 2.0;
        best = nan_min(best, branch(x)?);
        guard += 1;
        if guard > 1_000_000 {
            break; // unreachable for p > 2
        }
    }
    let eps_tilde1 = nan_min(best, branch(sigma * nf / p)?);
    Ok(Eps1Threshold {
        eps_tilde1,
        theta: theta_interpolation(q, params)?,
        c_tilde: c_tilde(q, params)?,
    })
}

fn degiorgi_gates(a1: f64, a2: f64, tau1: f64, tau2: f64) -> Result<(), ExponentError> {
    if !(a1 > a2 && a2 > 0.0) || !a1.is_finite() {
        return Err(ExponentError::Ordering("needs a1 > a2 > 0"));
    }
    if !(tau1 > tau2 && tau2 > 0.0) || !tau1.is_finite() {
        return Err(ExponentError::Ordering("needs tau1 > tau2 > 0"));
    }
    Ok(())
}

/// The truncation-level and time-cutoff sequences of the De Giorgi iteration:
/// `k_i = a2 + (a1−a2) 2^{−i}`, `θ_i = τ2 + (τ1−τ2) 2^{−i}`.
pub fn degiorgi_sequences(
    a1: f64,
    a2: f64,
    tau1: f64,
    tau2: f64,
    i: u32,
) -> Result<(f64, f64), ExponentError> {
    degiorgi_gates(a1, a2, tau1, tau2)?;
    let w = 0.5f64.powi(i as i32);
    Ok((a2 + (a1 - a2) * w, tau2 + (tau1 - tau2) * w))
}

/// The iteration constant `C₁ = 1/(τ₁−τ₂) + (S_t/τ₁)·2a₁/(a₁−a₂)`, where
/// `S_t = sup_{0<τ<t} τ‖u(τ)‖_∞^{σ−1}` is the reaction-strength monitor.
pub fn degiorgi_c1(
    s_t: f64,
    tau1: f64,
    tau2: f64,
    a1: f64,
    a2: f64,
) -> Result<f64, ExponentError> {
    degiorgi_gates(a1, a2, tau1, tau2)?;
    if !(s_t >= 0.0) || !s_t.is_finite() {
        return Err(ExponentError::NegativeMonitor(s_t));
    }
    Ok(1.0 / (tau1 - tau2) + s_t / tau1 * 2.0 * a1 / (a1 - a2))
}

/// `(time, datum)` exponents of the reaction-free `L^r → L^∞` bound
/// `‖u(t)‖_∞ ≲ t^{−N/(N(p−2)+pr)} ‖u₀‖_r^{p/(N(p−2)+pr)}` (plap mode, `r ≥ 1`).
pub fn linfty_bound_exponents(
    r: f64,
    params: &ProblemParams,
) -> Result<(f64, f64), ExponentError> {
    params.require_mode("linfty_bound_exponents", Mode::PLap)?;
    if !(r >= 1.0) || r.is_nan() {
        return Err(ExponentError::RRange(r));
    }
    let p = params.diffusion_exponent();
    let nf = params.dim_f();
    if r.is_infinite() {
        return Ok((0.0, 0.0));
    }
    let den = nf * (p - 2.0) + p * r;
    Ok((nf / den, p / den))
}

/// Residual bound under which [`IdentityReport::passed`] reports success.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
}

/// Worst-case residuals of the exponent identities over randomized admissible
/// parameter draws.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub samples: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.max_residual))
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= IDENTITY_TOLERANCE && !self.checks.is_empty()
    }
}

/// Admissible draw in the supercritical regime, with margins keeping every
/// gate strict: `N ∈ [3,8]`, `2N/(N+1) < p < N`, `σ` past the Fujita edge,
/// `σ₀ < q0 < q`.
fn draw_supercritical(rng: &mut impl Rng) -> (ProblemParams, f64, f64) {
    let dim = rng.random_range(3u32..=8);
    let nf = f64::from(dim);
    let lo = 2.0 * nf / (nf + 1.0);
    let p = rng.random_range((lo + 0.05)..(nf - 0.2));
    let edge = p - 1.0 + p / nf;
    let sigma = rng.random_range((edge + 0.05)..(edge + 3.0));
    let params = ProblemParams::plap(p, sigma, dim, 1.0, None)
        .expect("draw is admissible by construction");
    let s0 = sigma_critical(&params);
    let q0 = rng.random_range((s0.max(1.0) + 0.05)..(s0.max(1.0) + 4.0));
    let q = rng.random_range((q0 + 0.3)..(q0 + 25.0));
    (params, q0, q)
}

/// Admissible draw in the `p > 2` Poincaré-assisted regime, with
/// `max(σ₀, 1) < s < q`.
fn draw_poincare_regime(rng: &mut impl Rng) -> (ProblemParams, f64, f64) {
    let dim = rng.random_range(3u32..=8);
    let nf = f64::from(dim);
    let p = rng.random_range(2.05..(nf - 0.2));
    let sigma = rng.random_range((p - 1.0 + 0.05)..(p + 3.0));
    let params = ProblemParams::plap(p, sigma, dim, 1.0, None)
        .expect("draw is admissible by construction");
    let s_lo = sigma_critical(&params).max(1.0) + 0.05;
    let s = rng.random_range(s_lo..(s_lo + 4.0));
    let q = rng.random_range((s + 0.3)..(s + 20.0));
    (params, s, q)
}

/// Evaluates every implemented exponent identity on `samples` random
/// admissible draws and reports the worst absolute residual per identity
/// (ratio-of-ladder identities use residuals relative to the value size).
///
/// The identities covered, with both sides evaluated through the public API
/// wherever possible:
///
/// 1. the supercritical `(γ, δ)` pair equals the reaction-free pair at
///    `q0 = σ₀`;
/// 2. `−N/B − γ_q·pq/B = −1/(σ−1)` with `B = N(p−2)+pq` (time/mass exponent
///    cancellation of the sup-norm bound);
/// 3. `δ_q·pq/B = (σ−p+1)/(σ−1)` (datum exponent cancellation);
/// 4. `1 − N(σ−1)/B − γ_q·pq(σ−1)/B = 0` for the supercritical `γ_q`;
/// 5. `−N/B − γ_q·pq/B = −β_{q,s}` for the Poincaré-assisted `γ_q`;
/// 6. the ladder interpolation `NA/B'·(1−θ) = γ_q` with
///    `A = (N/(N−p))^{n̄} − 1`, `B' = N(p−2)A + pq0(A+1)`,
///    `θ = (q0/q)(q_{n̄}−q)/(q_{n̄}−q0)`;
/// 7. its companion `pq0(A+1)/B'·(1−θ) + θ = δ_q`;
/// 8. the ladder closed form against the recursion, `n ≤ 8`.
pub fn identity_suite(samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "supercritical_pair_equals_reaction_free_at_sigma0",
        "time_mass_exponent_cancellation",
        "datum_exponent_cancellation",
        "sup_bound_exponent_cancellation",
        "beta_exponent_cancellation",
        "ladder_interpolation_gamma",
        "ladder_interpolation_delta",
        "qn_closed_form_vs_recursion",
    ];
    let mut residuals = [0.0f64; 8];

    for _ in 0..samples {
        // Identities 1-4 live in the supercritical regime with q0 = σ₀.
        let (params, _, q) = draw_supercritical(&mut rng);
        let p = params.diffusion_exponent();
        let nf = params.dim_f();
        let sigma = params.sigma();
        let s0 = sigma_critical(&params);
        let (g1, d1) = smoothing_pair(Family::Thm1ii, s0, q, &params).unwrap();
        let (g2, d2) = smoothing_pair(Family::Prop42, s0, q, &params).unwrap();
        residuals[0] = residuals[0].max((g1 - g2).abs().max((d1 - d2).abs()));

        let (time_exp, mass_exp) = linfty_bound_exponents(q, &params).unwrap();
        residuals[1] =
            residuals[1].max((time_exp + g2 * q * mass_exp - 1.0 / (sigma - 1.0)).abs());
        residuals[2] = residuals[2]
            .max((d2 * q * mass_exp - (sigma - p + 1.0) / (sigma - 1.0)).abs());
        let b = nf * (p - 2.0) + p * q;
        residuals[3] = residuals[3]
            .max((1.0 - nf * (sigma - 1.0) / b - g1 * p * q * (sigma - 1.0) / b).abs());

        // Identity 5 lives in the p > 2 regime.
        let (params3, s, q3) = draw_poincare_regime(&mut rng);
        let (g3, _) = smoothing_pair(Family::Thm3, s, q3, &params3).unwrap();
        let beta = beta_qs(s, q3, &params3).unwrap();
        let (t3, m3) = linfty_bound_exponents(q3, &params3).unwrap();
        residuals[4] = residuals[4].max((-t3 - g3 * q3 * m3 + beta).abs());

        // Identities 6-7: ladder interpolation against the reaction-free pair,
        // general q0 > max(σ₀, 1).
        let (params4, q0, q4) = draw_supercritical(&mut rng);
        let p4 = params4.diffusion_exponent();
        let nf4 = params4.dim_f();
        let ratio = nf4 / (nf4 - p4);
        let mut nbar = 0u32;
        let mut qn = q0;
        while qn < q4 {
            nbar += 1;
            qn = ratio * (p4 + qn - 2.0);
        }
        // q4 > q0 forces n̄ ≥ 1, so A > 0 and the interpolation weight is defined.
        let a = ratio.powi(nbar as i32) - 1.0;
        let bp = nf4 * (p4 - 2.0) * a + p4 * q0 * (a + 1.0);
        let theta = (q0 / q4) * (qn - q4) / (qn - q0);
        let (g4, d4) = smoothing_pair(Family::Prop42, q0, q4, &params4).unwrap();
        residuals[5] = residuals[5].max((nf4 * a / bp * (1.0 - theta) - g4).abs());
        residuals[6] =
            residuals[6].max((p4 * q0 * (a + 1.0) / bp * (1.0 - theta) + theta - d4).abs());

        // Identity 8: closed form vs recursion, relative residual.
        for n in 0..=8u32 {
            let cf = qn_sequence(q0, n, &params4).unwrap();
            let rec = qn_sequence_recursive(q0, n, &params4).unwrap();
            residuals[7] = residuals[7].max((cf - rec).abs() / rec.abs().max(1.0));
        }
    }

    IdentityReport {
        samples,
        checks: names
            .iter()
            .zip(residuals)
            .map(|(&name, max_residual)| IdentityCheck { name, max_residual })
            .collect(),
    }
}

/// Which functional-inequality toolkit is available for the given parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Only the Sobolev inequality: flat model or no Poincaré constant given.
    SobolevOnly,
    /// Sobolev and Poincaré both available (hyperbolic model with `C_p`).
    SobolevPoincare,
}

/// Flat summary of every exponent the parameters determine, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub mode: Mode,
    /// `σ₀` (plap) or `σ₁` (pme).
    pub sigma_crit: f64,
    pub fujita_gate: bool,
    pub alpha: f64,
    /// `q ↦ γ_q` of the mode's supercritical family, on the requested grid
    /// (empty when the Fujita gate fails).
    pub gamma_q: Vec<(f64, f64)>,
    /// `q ↦ δ_q`, same grid.
    pub delta_q: Vec<(f64, f64)>,
    /// `β_{q,s}` when `(s, q)` was requested and its gates hold.
    pub beta_qs: Option<f64>,
    /// Named thresholds at the largest requested `q` (empty when gated out).
    pub thresholds: Vec<(&'static str, f64)>,
    pub regime: Regime,
}

/// Assembles an [`ExponentReport`]: per-q smoothing pairs on `qs`, the
/// thresholds at `max(qs)` (default mode), and optionally `β_{q,s}`.
pub fn exponent_report(
    params: &ProblemParams,
    qs: &[f64],
    beta_request: Option<(f64, f64)>,
) -> ExponentReport {
    let family = match params.mode() {
        Mode::PLap => Family::Thm1ii,
        Mode::Pme => Family::PmeThm,
    };
    let mut gamma_q = Vec::new();
    let mut delta_q = Vec::new();
    for &q in qs {
        if let Ok((g, d)) = smoothing_pair(family, sigma_critical(params), q, params) {
            gamma_q.push((q, g));
            delta_q.push((q, d));
        }
    }
    let mut thresholds = Vec::new();
    if params.mode() == Mode::PLap && fujita_gate(params) {
        let s0 = sigma_critical(params);
        let q = qs.iter().cloned().fold(s0.max(1.0 + 1e-9), f64::max);
        let q0 = s0.max(1.0 + 1e-9);
        if let Ok(t) = threshold_eps0(q, q0, params, ThresholdMode::Corrected) {
            thresholds.push(("eps_tilde0", t.eps_tilde0));
            thresholds.push(("eps_bar0", t.eps_bar0));
            thresholds.push(("eps_hat0", t.eps_hat0));
            thresholds.push(("eps_min", t.eps_min));
        }
        if let Ok(t) = threshold_eps1(q, q0, params) {
            thresholds.push(("eps_tilde1", t.eps_tilde1));
        }
    }
    ExponentReport {
        mode: params.mode(),
        sigma_crit: sigma_critical(params),
        fujita_gate: fujita_gate(params),
        alpha: alpha_smoothing(params),
        gamma_q,
        delta_q,
        beta_qs: beta_request.and_then(|(s, q)| beta_qs(s, q, params).ok()),
        thresholds,
        regime: if params.c_p().is_some() {
            Regime::SobolevPoincare
        } else {
            Regime::SobolevOnly
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plap(p: f64, sigma: f64, dim: u32) -> ProblemParams {
        ProblemParams::plap(p, sigma, dim, 1.0, None).unwrap()
    }

    #[test]
    fn constructors_enforce_gates() {
        assert!(ProblemParams::plap(1.4, 3.0, 3, 1.0, None).is_err()); // p ≤ 2N/(N+1)
        assert!(ProblemParams::plap(3.0, 3.0, 3, 1.0, None).is_err()); // p ≥ N
        assert!(ProblemParams::plap(2.0, 0.9, 3, 1.0, None).is_err()); // σ ≤ p−1
        assert!(ProblemParams::pme(1.0, 3.0, 3, 1.0, None).is_err()); // m ≤ 1
        assert!(ProblemParams::pme(2.0, 2.0, 3, 1.0, None).is_err()); // σ ≤ m
        assert!(ProblemParams::plap(2.0, 3.0, 2, 1.0, None).is_err()); // N < 3
        assert!(ProblemParams::plap(2.0, 3.0, 3, 0.0, None).is_err()); // C_sp ≤ 0
    }

    #[test]
    fn scaling_triple_matches_modes() {
        let a = plap(3.0, 4.0, 4).scaling();
        assert_eq!((a.order, a.degeneracy, a.sigma_gap), (3.0, 1.0, 2.0));
        let b = ProblemParams::pme(2.0, 3.0, 3, 1.0, None).unwrap().scaling();
        assert_eq!((b.order, b.degeneracy, b.sigma_gap), (2.0, 1.0, 1.0));
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = plap(2.5, 3.0, 4);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"p\":2.5"));
        let back: ProblemParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        // An out-of-gate payload must be rejected at parse time.
        let bad = json.replace("2.5", "9.0");
        assert!(serde_json::from_str::<ProblemParams>(&bad).is_err());
    }
}
