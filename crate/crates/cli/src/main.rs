//! `radlab` — command-line front end of the radial reaction-diffusion
//! laboratory.
//!
//! Every subcommand reads the same flat configuration (defaults, then
//! `--config` file, then `--set` overrides in order, then named flags) and
//! drives the core crate from it.  The process stays single-threaded; the
//! only parallelism lives inside the sweep driver.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 3 when a run ends
//! in blow-up, 4 when the time step collapses.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use radlab_core::dynamics::{run, RunRecord, RunStatus};
use radlab_core::exponents::{
    exponent_report, identity_suite, sigma_critical, threshold_eps0, threshold_eps1, Mode, Regime,
    ThresholdMode,
};
use radlab_core::harness::{
    smoothing_report, sweep, write_run_manifest, write_series_csv, SlopePrediction,
    SmoothingRequest,
};

use config::CliConfig;

#[derive(Parser)]
#[command(
    name = "radlab",
    version,
    about = "Numerical laboratory for truncated reaction-diffusion on radial manifolds",
    after_help = config::CONFIG_HELP
)]
struct Cli {
    /// Configuration file (flat `section.key = value` lines), applied before
    /// any --set override.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// One `section.key=value` override; repeatable, applied in order after
    /// the config file.  Named flags apply last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form exponents of one parameter set as `key=value`
    /// lines.
    Exponents(ParamArgs),
    /// Print the smallness-threshold table over the q grid as CSV.
    Thresholds(ParamArgs),
    /// Integrate one run; write series.csv and manifest.json under --out.
    Simulate(RunArgs),
    /// Integrate one run, then compare fitted decay slopes against the
    /// predicted exponents over the last recorded decade.
    Verify(RunArgs),
    /// Integrate the base configuration once per value of one swept axis;
    /// write per-run outputs and runs/index.csv under --out.
    Sweep(SweepArgs),
    /// Check the exponent identities over randomized admissible parameter
    /// draws; print PASS or FAIL.
    Identities(IdentitiesArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Diffusion exponent p (selects problem.mode = plap).
    #[arg(long, conflicts_with = "m")]
    p: Option<f64>,
    /// Diffusion exponent m (selects problem.mode = pme).
    #[arg(long)]
    m: Option<f64>,
    /// Reaction exponent sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Dimension N.
    #[arg(long = "N")]
    dim: Option<u32>,
    /// Comma-separated q grid (replaces query.qs).
    #[arg(long)]
    q: Option<String>,
}

impl ParamArgs {
    fn fold_into(&self, config: &mut CliConfig) -> Result<()> {
        if let Some(p) = self.p {
            config.mode = Mode::PLap;
            config.p = p;
        }
        if let Some(m) = self.m {
            config.mode = Mode::Pme;
            config.m = m;
        }
        if let Some(sigma) = self.sigma {
            config.sigma = sigma;
        }
        if let Some(dim) = self.dim {
            config.dim = dim;
        }
        if let Some(qs) = &self.q {
            config.set("query.qs", qs)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Initial datum amplitude (same as --set datum.amplitude=...).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept axis: amplitude | sigma | p | m | dim.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated axis values.
    #[arg(long)]
    values: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct IdentitiesArgs {
    /// Number of random parameter draws.
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version arrive here too; only genuine usage errors
            // exit nonzero.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let mut config = CliConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        config
            .apply_document(&text)
            .with_context(|| format!("config file {}", path.display()))?;
    }
    for pair in &cli.set {
        config.apply_override(pair)?;
    }
    match &cli.command {
        Command::Exponents(args) => {
            args.fold_into(&mut config)?;
            cmd_exponents(&config)
        }
        Command::Thresholds(args) => {
            args.fold_into(&mut config)?;
            cmd_thresholds(&config)
        }
        Command::Simulate(args) => {
            if let Some(a) = args.amplitude {
                config.amplitude = a;
            }
            cmd_simulate(&config, &args.out).map(|(code, _)| code)
        }
        Command::Verify(args) => {
            if let Some(a) = args.amplitude {
                config.amplitude = a;
            }
            cmd_verify(&config, &args.out)
        }
        Command::Sweep(args) => {
            if let Some(axis) = &args.axis {
                config.set("sweep.axis", axis)?;
            }
            if let Some(values) = &args.values {
                config.set("sweep.values", values)?;
            }
            cmd_sweep(&config, &args.out)
        }
        Command::Identities(args) => {
            if let Some(samples) = args.samples {
                config.samples = samples;
            }
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            cmd_identities(&config)
        }
    }
}

/// `2` for `2.0`, `2.5` for `2.5` — keeps `key=value` names readable.
fn fmt_q(q: f64) -> String {
    if q.is_finite() && q == q.trunc() {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

fn cmd_exponents(config: &CliConfig) -> Result<u8> {
    let params = config.problem_params()?;
    let report = exponent_report(&params, &config.qs, config.beta);
    match report.mode {
        Mode::PLap => {
            println!("mode=plap");
            println!("p={}", params.diffusion_exponent());
        }
        Mode::Pme => {
            println!("mode=pme");
            println!("m={}", params.diffusion_exponent());
        }
    }
    println!("sigma={}", params.sigma());
    println!("dim={}", params.dim());
    match report.mode {
        Mode::PLap => println!("sigma0={}", report.sigma_crit),
        Mode::Pme => println!("sigma1={}", report.sigma_crit),
    }
    println!("fujita_gate={}", report.fujita_gate);
    println!("alpha={}", report.alpha);
    for ((q, gamma), (_, delta)) in report.gamma_q.iter().zip(&report.delta_q) {
        println!("gamma_{}={gamma}", fmt_q(*q));
        println!("delta_{}={delta}", fmt_q(*q));
    }
    if let Some(beta) = report.beta_qs {
        println!("beta={beta}");
    }
    for (name, value) in &report.thresholds {
        println!("{name}={value}");
    }
    println!(
        "regime={}",
        match report.regime {
            Regime::SobolevOnly => "sobolev_only",
            Regime::SobolevPoincare => "sobolev_poincare",
        }
    );
    Ok(0)
}

fn cmd_thresholds(config: &CliConfig) -> Result<u8> {
    let params = config.problem_params()?;
    let q0 = config
        .q0
        .unwrap_or_else(|| sigma_critical(&params).max(1.0 + 1e-9));
    println!("q,eps_tilde0,eps_bar0,eps_hat0,eps_min,eps_tilde1");
    for &q in &config.qs {
        if !q.is_finite() || q < q0 {
            eprintln!("note: q={q} outside the ladder [{q0}, inf); row skipped");
            continue;
        }
        let t = threshold_eps0(q, q0, &params, ThresholdMode::Corrected)?;
        // The Poincaré-assisted radius exists only for p > 2 with C_p given;
        // its column stays empty otherwise.
        let e1 = threshold_eps1(q, q0, &params)
            .map(|t| format!("{:.16e}", t.eps_tilde1))
            .unwrap_or_default();
        println!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{e1}",
            fmt_q(q),
            t.eps_tilde0,
            t.eps_bar0,
            t.eps_hat0,
            t.eps_min
        );
    }
    Ok(0)
}

fn status_exit(status: &RunStatus) -> u8 {
    match status {
        RunStatus::Completed => 0,
        RunStatus::Blowup { .. } => 3,
        RunStatus::DtCollapse { .. } => 4,
    }
}

fn print_run_summary(record: &RunRecord, out: &std::path::Path) {
    match record.status {
        RunStatus::Completed => {
            println!("status=completed");
            println!("t_end={}", record.config.t_end);
        }
        RunStatus::Blowup { t_star } => {
            println!("status=blowup");
            println!("t_star={t_star}");
        }
        RunStatus::DtCollapse { t } => {
            println!("status=dt_collapse");
            println!("t={t}");
        }
    }
    let s_max = record
        .series
        .iter()
        .fold(f64::NEG_INFINITY, |acc, row| acc.max(row.s_monitor));
    println!("steps={}", record.steps);
    println!("rejected_steps={}", record.rejected_steps);
    println!("s_max={s_max}");
    println!("wrote={}", out.join("series.csv").display());
    println!("wrote={}", out.join("manifest.json").display());
}

fn cmd_simulate(config: &CliConfig, out: &std::path::Path) -> Result<(u8, RunRecord)> {
    let run_config = config.run_config()?;
    let record = run(&run_config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_series_csv(&out.join("series.csv"), &record)?;
    write_run_manifest(&out.join("manifest.json"), &record)?;
    print_run_summary(&record, out);
    Ok((status_exit(&record.status), record))
}

fn cmd_verify(config: &CliConfig, out: &std::path::Path) -> Result<u8> {
    let (code, record) = cmd_simulate(config, out)?;
    if record.status != RunStatus::Completed {
        // Nothing to fit; the status and exit code already tell the story.
        return Ok(code);
    }
    let mut requests = vec![SmoothingRequest {
        q: f64::INFINITY,
        prediction: SlopePrediction::SupNormAlpha,
    }];
    if let Some(family) = config.family {
        for &q in &record.config.record_qs {
            requests.push(SmoothingRequest {
                q,
                prediction: SlopePrediction::Family {
                    family,
                    datum_index: config.datum_index,
                },
            });
        }
    }
    let reports = smoothing_report(&record, &record.config.params, &requests)?;
    for report in &reports {
        println!(
            "q={} fitted={} predicted={} stderr={} window=[{},{}] verdict={}",
            fmt_q(report.q),
            report.fitted_slope,
            -report.predicted,
            report.stderr,
            report.window.0,
            report.window.1,
            report.verdict
        );
    }
    Ok(code)
}

fn cmd_sweep(config: &CliConfig, out: &std::path::Path) -> Result<u8> {
    let base = config.run_config()?;
    let rows = sweep(&base, config.axis, &config.values, out)?;
    for row in &rows {
        let classification = row
            .classification
            .map(|c| c.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "row id={} value={} status={} classification={classification}",
            row.id, row.value, row.status
        );
        if let Some(note) = &row.note {
            println!("note id={} {note}", row.id);
        }
    }
    println!("wrote={}", out.join("runs").join("index.csv").display());
    Ok(0)
}

fn cmd_identities(config: &CliConfig) -> Result<u8> {
    let report = identity_suite(config.samples, config.seed);
    println!("samples={}", report.samples);
    for check in &report.checks {
        println!("check {} max_residual={:e}", check.name, check.max_residual);
    }
    if report.passed() {
        println!("PASS");
        Ok(0)
    } else {
        println!("FAIL");
        Ok(1)
    }
}
