//! End-to-end checks of the `radlab` binary: exit codes, printed output, and
//! the files each subcommand leaves behind.

use std::path::Path;
use std::process::{Command, Output};

use radlab_core::dynamics::RunConfig;

fn radlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radlab"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

fn assert_exit(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout:\n{}\nstderr:\n{}",
        stdout_of(output),
        stderr_of(output)
    );
}

/// Fast supercritical run: completes in well under a second.
const FAST_RUN: &[&str] = &[
    "--set",
    "problem.p=3",
    "--set",
    "problem.dim=4",
    "--set",
    "grid.r_max=20",
    "--set",
    "grid.nr=96",
    "--set",
    "run.t_end=0.5",
    "--set",
    "run.dt0=1e-3",
    "--set",
    "datum.amplitude=1e-3",
];

#[test]
fn exponents_prints_the_critical_pair() {
    let output = radlab(&["exponents", "--p", "2", "--sigma", "3", "--N", "3"]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.lines().any(|l| l == "sigma0=3"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "alpha=1.5"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "fujita_gate=true"), "{stdout}");
}

#[test]
fn pme_exponents_use_their_own_critical_index() {
    let output = radlab(&["exponents", "--m", "2", "--sigma", "3", "--N", "3"]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.lines().any(|l| l == "mode=pme"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "sigma1=1.5"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "alpha=0.6"), "{stdout}");
}

#[test]
fn identities_pass_and_exit_zero() {
    let output = radlab(&["identities", "--samples", "200", "--seed", "7"]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert_eq!(stdout.lines().last(), Some("PASS"), "{stdout}");
    assert!(stdout.lines().any(|l| l == "samples=200"), "{stdout}");
}

#[test]
fn thresholds_emit_the_ladder_table() {
    let args = ["thresholds", "--p", "3", "--sigma", "3", "--N", "4", "--q", "4,8"];
    let output = radlab(&args);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next(),
        Some("q,eps_tilde0,eps_bar0,eps_hat0,eps_min,eps_tilde1")
    );
    let row4 = lines.next().unwrap();
    assert!(row4.starts_with("4,"), "{row4}");
    // No Poincaré constant configured: the last column is empty.
    assert!(row4.ends_with(','), "{row4}");

    let with_cp = radlab(&[&args[..], &["--set", "problem.c_p=1"]].concat());
    assert_exit(&with_cp, 0);
    let stdout = stdout_of(&with_cp);
    let row4 = stdout.lines().nth(1).unwrap();
    assert!(!row4.ends_with(','), "{row4}");
    assert_eq!(row4.split(',').count(), 6);
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let output = radlab(&["frobnicate"]);
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("Usage"), "{}", stderr_of(&output));
}

#[test]
fn unknown_and_malformed_config_keys_are_rejected() {
    let output = radlab(&["exponents", "--set", "problem.widht=3"]);
    assert_exit(&output, 1);
    assert!(
        stderr_of(&output).contains("unknown config key `problem.widht`"),
        "{}",
        stderr_of(&output)
    );

    let output = radlab(&["exponents", "--set", "grid.nr=ninety"]);
    assert_exit(&output, 1);

    // Same rejection when the key arrives through a config file.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "problem.p = 3\nproblem.widht = 3\n").unwrap();
    let output = radlab(&["exponents", "--config", path.to_str().unwrap()]);
    assert_exit(&output, 1);
    let stderr = stderr_of(&output);
    assert!(stderr.contains("unknown config key"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn parameter_gates_fail_the_invocation() {
    // p = 5 is outside (2N/(N+1), N) for N = 3.
    let output = radlab(&["exponents", "--p", "5"]);
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("must lie in"), "{}", stderr_of(&output));
}

fn manifest_config(out_dir: &Path) -> RunConfig {
    let text = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    serde_json::from_value(doc["config"].clone()).expect("config echo re-parses")
}

#[test]
fn config_file_then_overrides_feed_the_manifest_echo() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# fast supercritical run\n\
         problem.p = 3\n\
         problem.dim = 4\n\
         grid.r_max = 20\n\
         grid.nr = 96\n\
         run.t_end = 0.5\n\
         run.dt0 = 1e-3\n\
         datum.amplitude = 1e-3\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = radlab(&[
        "simulate",
        "--config",
        conf.to_str().unwrap(),
        "--set",
        "datum.amplitude=2e-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    assert!(stdout_of(&output).contains("status=completed"));
    assert!(out.join("series.csv").is_file());

    // The echoed config shows the effective values: file keys, the later
    // --set override, and untouched defaults.
    let config = manifest_config(&out);
    assert_eq!(config.datum.amplitude(), 2e-3);
    assert_eq!(config.grid.nr, 96);
    assert_eq!(config.params.diffusion_exponent(), 3.0);
    assert_eq!(config.truncation_k, 1e12);
    assert_eq!(config.record_qs, vec![2.0, 4.0]);
}

#[test]
fn simulate_blowup_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = radlab(&[
        "simulate",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "run.diffusion=false",
        "--set",
        "problem.sigma=2",
        "--set",
        "datum.kind=indicator",
        "--set",
        "datum.amplitude=1",
        "--set",
        "datum.radius=5",
        "--set",
        "grid.r_max=10",
        "--set",
        "grid.nr=64",
        "--set",
        "run.t_end=2",
        "--set",
        "run.dt0=1e-3",
    ]);
    assert_exit(&output, 3);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("status=blowup"), "{stdout}");
    assert!(stdout.contains("t_star="), "{stdout}");
    let text = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["status"]["kind"], "blowup");
}

#[test]
fn verify_reports_decay_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = radlab(&[
        "verify",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "run.reaction=false",
        "--set",
        "datum.amplitude=1",
        "--set",
        "datum.width=0.5",
        "--set",
        "grid.r_max=20",
        "--set",
        "grid.nr=200",
        "--set",
        "run.t_end=10",
        "--set",
        "run.dt0=5e-4",
        "--set",
        "run.record_qs=2",
        "--set",
        "query.family=prop42",
    ]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    let sup_line = stdout
        .lines()
        .find(|l| l.starts_with("q=inf "))
        .unwrap_or_else(|| panic!("no sup-norm verdict in:\n{stdout}"));
    assert!(sup_line.contains("predicted=-1.5"), "{sup_line}");
    assert!(sup_line.ends_with("verdict=match"), "{sup_line}");
    let l2_line = stdout.lines().find(|l| l.starts_with("q=2 ")).unwrap();
    assert!(l2_line.contains("predicted=-0.75"), "{l2_line}");
    assert!(l2_line.ends_with("verdict=match"), "{l2_line}");
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&out_a, &out_b] {
        let output = radlab(&[&["simulate", "--out", out.to_str().unwrap()], FAST_RUN].concat());
        assert_exit(&output, 0);
    }
    assert_eq!(
        std::fs::read(out_a.join("series.csv")).unwrap(),
        std::fs::read(out_b.join("series.csv")).unwrap(),
        "identical configs produced different series"
    );
    assert_eq!(manifest_config(&out_a), manifest_config(&out_b));
}

#[test]
fn sweep_writes_the_index_and_per_run_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = radlab(&[
        &[
            "sweep",
            "--axis",
            "amplitude",
            "--values",
            "1e-3,2e-3",
            "--out",
            out.to_str().unwrap(),
        ],
        FAST_RUN,
    ]
    .concat());
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("row ")).count(), 2);
    assert!(stdout.contains("status=completed"), "{stdout}");

    let index = std::fs::read_to_string(out.join("runs/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 3);
    assert!(out.join("runs/000_amplitude_1e-3/series.csv").is_file());
    assert!(out.join("runs/001_amplitude_2e-3/manifest.json").is_file());
}

#[test]
fn help_documents_the_config_keys() {
    let output = radlab(&["--help"]);
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("problem.p"), "{stdout}");
    assert!(stdout.contains("run.record_qs"), "{stdout}");
    assert!(stdout.contains("sweep.values"), "{stdout}");
}
