//! Experiment orchestration on top of the solver: log-log decay-slope fits
//! against predicted exponents, global-vs-blowup classification of runs, and
//! reproducible on-disk artifacts (per-run CSV series + JSON manifest, sweep
//! index).
//!
//! The measurable claim behind a smoothing estimate `‖u(t)‖_q ≤ C t^{-γ}
//! ‖u₀‖^δ` is the time exponent: on a completed run the harness fits the
//! slope of `log ‖u(t)‖_q` against `log t` over the last recorded decade and
//! compares it with `-γ` from the exponent module.  Constants are fitted as
//! intercepts, never assumed.

use crate::dynamics::{run, DynamicsError, RunConfig, RunRecord, RunStatus};
use crate::exponents::{
    alpha_smoothing, smoothing_pair, ExponentError, Family, Mode, ProblemParams,
};
use crate::geometry::ManifoldSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("fit window [{lo:.6e}, {hi:.6e}] holds {found} samples; at least 8 required")]
    InsufficientWindow { found: usize, lo: f64, hi: f64 },
    #[error("decay fit needs positive times and values (got value {value:.6e} at t = {t:.6e})")]
    NonpositiveSample { t: f64, value: f64 },
    #[error("fit window is degenerate: all sample times coincide")]
    DegenerateWindow,
    #[error("smoothing comparison needs a completed run (status: {status:?})")]
    NotCompleted { status: RunStatus },
    #[error("norm exponent q = {0} was not recorded by the run")]
    UnrecordedNorm(f64),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ordinary least squares of `log value` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// Standard error of the slope estimate (0 when the fit is exact or has
    /// no residual degrees of freedom).
    pub stderr: f64,
    /// Intercept in log space: `log value ≈ intercept + slope·log t`.
    pub intercept: f64,
}

/// Fits `value ≈ exp(intercept)·t^{slope}` over the samples with
/// `t ∈ [window.0, window.1]`.  Requires at least 8 samples in the window,
/// all with positive time and value.
pub fn fit_decay_slope(
    series: &[(f64, f64)],
    window: (f64, f64),
) -> Result<SlopeFit, HarnessError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 8 {
        return Err(HarnessError::InsufficientWindow {
            found: pts.len(),
            lo: window.0,
            hi: window.1,
        });
    }
    for &(t, value) in &pts {
        if !(t > 0.0) || !(value > 0.0) {
            return Err(HarnessError::NonpositiveSample { t, value });
        }
    }
    if pts.iter().all(|&(t, _)| t == pts[0].0) {
        return Err(HarnessError::DegenerateWindow);
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let xbar = logs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let ybar = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::DegenerateWindow);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = logs
        .iter()
        .map(|&(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let dof = n - 2.0;
    let stderr = if dof > 0.0 { (sse / dof / sxx).sqrt() } else { 0.0 };
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    /// The windowed series could not support a fit (too few samples or a norm
    /// that reached zero).
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Where the predicted decay exponent of `‖u(t)‖_q` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SlopePrediction {
    /// The intrinsic sup-norm rate `α = N/(N·g + d)` of the reaction-free
    /// flow (meant for `q = ∞`).
    SupNormAlpha,
    /// The time exponent `γ_q` of a smoothing-estimate family;
    /// `datum_index` is `q0` (or `s`) where the family takes one.
    Family { family: Family, datum_index: f64 },
}

impl SlopePrediction {
    pub fn predicted(&self, q: f64, params: &ProblemParams) -> Result<f64, ExponentError> {
        match *self {
            SlopePrediction::SupNormAlpha => Ok(alpha_smoothing(params)),
            SlopePrediction::Family {
                family,
                datum_index,
            } => Ok(smoothing_pair(family, datum_index, q, params)?.0),
        }
    }
}

/// One comparison to carry out: which norm to fit and which prediction to
/// hold it against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRequest {
    /// Norm exponent; `f64::INFINITY` for the sup norm.
    pub q: f64,
    pub prediction: SlopePrediction,
}

/// Outcome of one fitted-versus-predicted comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub q: f64,
    pub fitted_slope: f64,
    pub stderr: f64,
    /// Predicted decay exponent `γ` (the claim is `value ~ t^{-γ}`).
    pub predicted: f64,
    pub window: (f64, f64),
    pub verdict: Verdict,
}

fn verdict(fitted_slope: f64, predicted: f64, stderr: f64) -> Verdict {
    if !fitted_slope.is_finite() || !stderr.is_finite() || !predicted.is_finite() {
        return Verdict::Inconclusive;
    }
    if (fitted_slope + predicted).abs() <= (0.1 * predicted.abs()).max(2.0 * stderr) {
        Verdict::Match
    } else {
        Verdict::Mismatch
    }
}

/// The `(t, ‖u(t)‖_q)` series of a record; `q` must be `1`, `∞`, or one of
/// the recorded exponents.
fn norm_series(record: &RunRecord, q: f64) -> Result<Vec<(f64, f64)>, HarnessError> {
    let rows = &record.series;
    if q.is_infinite() {
        Ok(rows.iter().map(|r| (r.t, r.linf)).collect())
    } else if q == 1.0 {
        Ok(rows.iter().map(|r| (r.t, r.l1)).collect())
    } else {
        let idx = record
            .config
            .record_qs
            .iter()
            .position(|&rq| rq == q)
            .ok_or(HarnessError::UnrecordedNorm(q))?;
        Ok(rows.iter().map(|r| (r.t, r.lq[idx])).collect())
    }
}

/// Default fit window: the last decade of recorded times.
pub fn last_decade(record: &RunRecord) -> (f64, f64) {
    let t_hi = record.series.last().map_or(0.0, |r| r.t);
    (t_hi / 10.0, t_hi)
}

/// Fits each requested norm over the last recorded decade and compares the
/// slope with the predicted exponent.  The run must have completed; family
/// gate violations (a prediction that does not exist for these parameters)
/// are errors, while a window that cannot support a fit yields an
/// `inconclusive` report.
pub fn smoothing_report(
    record: &RunRecord,
    params: &ProblemParams,
    requests: &[SmoothingRequest],
) -> Result<Vec<DecayReport>, HarnessError> {
    if record.status != RunStatus::Completed {
        return Err(HarnessError::NotCompleted {
            status: record.status,
        });
    }
    let window = last_decade(record);
    requests
        .iter()
        .map(|req| {
            let predicted = req.prediction.predicted(req.q, params)?;
            let series = norm_series(record, req.q)?;
            match fit_decay_slope(&series, window) {
                Ok(fit) => Ok(DecayReport {
                    q: req.q,
                    fitted_slope: fit.slope,
                    stderr: fit.stderr,
                    predicted,
                    window,
                    verdict: verdict(fit.slope, predicted, fit.stderr),
                }),
                Err(
                    HarnessError::InsufficientWindow { .. }
                    | HarnessError::NonpositiveSample { .. }
                    | HarnessError::DegenerateWindow,
                ) => Ok(DecayReport {
                    q: req.q,
                    fitted_slope: f64::NAN,
                    stderr: f64::NAN,
                    predicted,
                    window,
                    verdict: Verdict::Inconclusive,
                }),
                Err(other) => Err(other),
            }
        })
        .collect()
}

/// Verdict of the smallness dichotomy for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Completed with the monitor `S(t) ≤ 1` throughout: the small-data
    /// global regime.
    Global,
    /// The sup norm reached the blow-up threshold.  Exploratory: large-data
    /// blow-up is observed, not predicted, in this setting.
    Blowup,
    /// Anything else (step collapse, or completion with `S > 1`).
    Undecided,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Global => "global",
            Classification::Blowup => "blowup",
            Classification::Undecided => "undecided",
        })
    }
}

pub fn classify_record(record: &RunRecord) -> Classification {
    match record.status {
        RunStatus::Blowup { .. } => Classification::Blowup,
        RunStatus::Completed => {
            let s_max = record
                .series
                .iter()
                .fold(0.0f64, |acc, r| acc.max(r.s_monitor));
            if s_max <= 1.0 {
                Classification::Global
            } else {
                Classification::Undecided
            }
        }
        RunStatus::DtCollapse { .. } => Classification::Undecided,
    }
}

/// Executes the config and classifies the outcome.
pub fn classify_run(config: &RunConfig) -> Result<Classification, HarnessError> {
    Ok(classify_record(&run(config)?))
}

fn fmt_q(q: f64) -> String {
    if q.is_finite() && q.fract() == 0.0 && q.abs() < 1e15 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// The per-run CSV: `t,dt,linf,l1[,l<q>…],s_monitor`, floats with 17
/// significant digits.  Byte-identical across repeated identical runs.
pub fn series_csv(record: &RunRecord) -> String {
    let mut out = String::from("t,dt,linf,l1");
    for &q in &record.config.record_qs {
        out.push_str(",l");
        out.push_str(&fmt_q(q));
    }
    out.push_str(",s_monitor\n");
    for row in &record.series {
        out.push_str(&fmt_f(row.t));
        out.push(',');
        out.push_str(&fmt_f(row.dt));
        out.push(',');
        out.push_str(&fmt_f(row.linf));
        out.push(',');
        out.push_str(&fmt_f(row.l1));
        for &v in &row.lq {
            out.push(',');
            out.push_str(&fmt_f(v));
        }
        out.push(',');
        out.push_str(&fmt_f(row.s_monitor));
        out.push('\n');
    }
    out
}

pub fn write_series_csv(path: &Path, record: &RunRecord) -> Result<(), HarnessError> {
    fs::write(path, series_csv(record)).map_err(io_at(path))
}

/// The run manifest: status, the final time (`t_star` for blow-up, `t_end`
/// otherwise), a config echo that re-parses to an equivalent config, and the
/// run accounting.
pub fn run_manifest_json(record: &RunRecord) -> serde_json::Value {
    let mut doc = json!({
        "status": record.status,
        "config": record.config,
        "clipped_mass": record.clipped_mass,
        "steps": record.steps,
        "rejected_steps": record.rejected_steps,
        "wallclock_s": record.wallclock_s,
    });
    let obj = doc.as_object_mut().expect("manifest is an object");
    match record.status {
        RunStatus::Blowup { t_star } => {
            obj.insert("t_star".into(), json!(t_star));
        }
        RunStatus::Completed => {
            obj.insert("t_end".into(), json!(record.config.t_end));
        }
        RunStatus::DtCollapse { t } => {
            obj.insert("t_end".into(), json!(t));
        }
    }
    doc
}

pub fn write_run_manifest(path: &Path, record: &RunRecord) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(&run_manifest_json(record))
        .expect("manifest serializes");
    fs::write(path, text + "\n").map_err(io_at(path))
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Amplitude,
    Sigma,
    P,
    M,
    Dim,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Amplitude => "amplitude",
            SweepAxis::Sigma => "sigma",
            SweepAxis::P => "p",
            SweepAxis::M => "m",
            SweepAxis::Dim => "dim",
        })
    }
}

fn rebuild_params(
    base: &ProblemParams,
    diff_exp: f64,
    sigma: f64,
    dim: u32,
) -> Result<ProblemParams, String> {
    match base.mode() {
        Mode::PLap => ProblemParams::plap(diff_exp, sigma, dim, base.c_sp(), base.c_p()),
        Mode::Pme => ProblemParams::pme(diff_exp, sigma, dim, base.c_sp(), base.c_p()),
    }
    .map_err(|e| e.to_string())
}

/// The base config with one axis moved to `value`; re-validates every
/// parameter gate.
pub fn apply_axis(base: &RunConfig, axis: SweepAxis, value: f64) -> Result<RunConfig, String> {
    let mut config = base.clone();
    let p = &base.params;
    match axis {
        SweepAxis::Amplitude => {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(format!("amplitude must be nonnegative and finite (got {value})"));
            }
            config.datum = config.datum.with_amplitude(value);
        }
        SweepAxis::Sigma => {
            config.params = rebuild_params(p, p.diffusion_exponent(), value, p.dim())?;
        }
        SweepAxis::P => {
            if p.mode() != Mode::PLap {
                return Err("the p axis needs p-laplacian mode".into());
            }
            config.params = rebuild_params(p, value, p.sigma(), p.dim())?;
        }
        SweepAxis::M => {
            if p.mode() != Mode::Pme {
                return Err("the m axis needs porous-medium mode".into());
            }
            config.params = rebuild_params(p, value, p.sigma(), p.dim())?;
        }
        SweepAxis::Dim => {
            if value.fract() != 0.0 || !(3.0..=64.0).contains(&value) {
                return Err(format!("dim must be an integer in [3, 64] (got {value})"));
            }
            let dim = value as u32;
            config.params = rebuild_params(p, p.diffusion_exponent(), p.sigma(), dim)?;
            config.manifold =
                ManifoldSpec::new(config.manifold.kind, dim).map_err(|e| e.to_string())?;
        }
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

/// One line of the sweep index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub id: String,
    pub value: f64,
    /// `completed` | `blowup` | `dt_collapse` | `error`.
    pub status: String,
    pub classification: Option<Classification>,
    /// Max of the recorded monitor `S(t)`.
    pub s_max: Option<f64>,
    /// Last-decade decay slopes: `L^∞` first, then one per recorded `q`.
    /// `None` where no fit is available (non-completed runs, short series).
    pub slopes: Vec<Option<f64>>,
    /// Failure message for `error` rows.
    pub note: Option<String>,
}

fn status_label(status: &RunStatus) -> &'static str {
    match status {
        RunStatus::Completed => "completed",
        RunStatus::Blowup { .. } => "blowup",
        RunStatus::DtCollapse { .. } => "dt_collapse",
    }
}

fn sweep_row(
    id: String,
    value: f64,
    base: &RunConfig,
    axis: SweepAxis,
    dir: &Path,
) -> SweepRow {
    let error_row = |note: String| SweepRow {
        id: id.clone(),
        value,
        status: "error".into(),
        classification: None,
        s_max: None,
        slopes: vec![None; base.record_qs.len() + 1],
        note: Some(note),
    };
    let config = match apply_axis(base, axis, value) {
        Ok(c) => c,
        Err(note) => return error_row(note),
    };
    let record = match run(&config) {
        Ok(r) => r,
        Err(e) => return error_row(e.to_string()),
    };
    if let Err(e) = fs::create_dir_all(dir)
        .map_err(io_at(dir))
        .and_then(|()| write_series_csv(&dir.join("series.csv"), &record))
        .and_then(|()| write_run_manifest(&dir.join("manifest.json"), &record))
    {
        return error_row(e.to_string());
    }
    let s_max = record
        .series
        .iter()
        .fold(0.0f64, |acc, r| acc.max(r.s_monitor));
    let window = last_decade(&record);
    let mut slopes = Vec::with_capacity(base.record_qs.len() + 1);
    let mut qs = vec![f64::INFINITY];
    qs.extend_from_slice(&record.config.record_qs);
    for q in qs {
        let slope = if record.status == RunStatus::Completed {
            norm_series(&record, q)
                .ok()
                .and_then(|s| fit_decay_slope(&s, window).ok())
                .map(|f| f.slope)
        } else {
            None
        };
        slopes.push(slope);
    }
    SweepRow {
        id,
        value,
        status: status_label(&record.status).into(),
        classification: Some(classify_record(&record)),
        s_max: Some(s_max),
        slopes,
        note: None,
    }
}

fn index_csv(axis: SweepAxis, rows: &[SweepRow], record_qs: &[f64]) -> String {
    let mut out = String::from("id,axis,value,status,classification,s_max,slope_linf");
    for &q in record_qs {
        out.push_str(",slope_l");
        out.push_str(&fmt_q(q));
    }
    out.push_str(",note\n");
    for row in rows {
        let opt = |v: Option<f64>| v.map(fmt_f).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}",
            row.id,
            axis,
            fmt_f(row.value),
            row.status,
            row.classification.map(|c| c.to_string()).unwrap_or_default(),
        ));
        out.push(',');
        out.push_str(&opt(row.s_max));
        for &slope in &row.slopes {
            out.push(',');
            out.push_str(&opt(slope));
        }
        out.push(',');
        if let Some(note) = &row.note {
            out.push_str(&note.replace([',', '\n'], ";"));
        }
        out.push('\n');
    }
    out
}

/// Runs the base config once per axis value (in parallel — runs share
/// nothing), writing `runs/<id>/series.csv` and `runs/<id>/manifest.json`
/// under `out_dir`, then writes `runs/index.csv` from the coordinator.
/// Per-run failures become `error` rows; the sweep itself only fails on an
/// invalid base config or an unwritable index.
pub fn sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    out_dir: &Path,
) -> Result<Vec<SweepRow>, HarnessError> {
    base.validate()?;
    let runs_dir = out_dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(io_at(&runs_dir))?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let id = format!("{i:03}_{axis}_{value:e}");
            let dir = runs_dir.join(&id);
            sweep_row(id, value, base, axis, &dir)
        })
        .collect();
    let index_path = runs_dir.join("index.csv");
    fs::write(&index_path, index_csv(axis, &rows, &base.record_qs)).map_err(io_at(&index_path))?;
    Ok(rows)
}
