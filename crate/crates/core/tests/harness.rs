//! Harness layer: slope fitting, decay-rate verdicts, run classification, and
//! the sweep driver's on-disk deliverables.

use approx::assert_relative_eq;
use radlab_core::dynamics::{run, Datum, RunConfig, RunRecord, RunStatus, SeriesRow};
use radlab_core::exponents::{Family, ProblemParams};
use radlab_core::geometry::{ManifoldKind, ManifoldSpec, RadialGrid};
use radlab_core::harness::{
    apply_axis, classify_record, classify_run, fit_decay_slope, last_decade, run_manifest_json,
    series_csv, smoothing_report, sweep, Classification, HarnessError, SlopePrediction,
    SmoothingRequest, SweepAxis, Verdict,
};

fn log_spaced(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let t = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            (t, f(t))
        })
        .collect()
}

// --- slope fitting ----------------------------------------------------------

#[test]
fn exact_power_law_recovers_slope_and_intercept() {
    let series = log_spaced(1.0, 100.0, 60, |t| 5.0 * t.powf(-0.5));
    let fit = fit_decay_slope(&series, (1.0, 100.0)).unwrap();
    assert!((fit.slope + 0.5).abs() <= 1e-12);
    assert!(fit.stderr <= 1e-12);
    assert_relative_eq!(fit.intercept.exp(), 5.0, max_relative = 1e-10);
}

#[test]
fn log_periodic_perturbation_stays_within_tolerance() {
    let series = log_spaced(1.0, 100.0, 120, |t| {
        3.0 * t.powf(-1.5) * (1.0 + 0.01 * t.ln().sin())
    });
    let fit = fit_decay_slope(&series, (1.0, 100.0)).unwrap();
    assert!(
        (fit.slope + 1.5).abs() <= 0.02,
        "slope {} strayed from -1.5",
        fit.slope
    );
}

#[test]
fn constant_series_has_zero_slope() {
    let series = log_spaced(1.0, 10.0, 20, |_| 4.2);
    let fit = fit_decay_slope(&series, (1.0, 10.0)).unwrap();
    assert!(fit.slope.abs() <= 1e-12);
}

#[test]
fn slope_is_invariant_under_time_and_value_rescaling() {
    let shape = |t: f64| 2.0 * t.powf(-0.8) * (1.0 + 0.03 * (2.0 * t.ln()).cos());
    let series = log_spaced(0.5, 50.0, 64, shape);
    let moved: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (2.0 * t, 9.0 * v)).collect();
    let a = fit_decay_slope(&series, (0.5, 50.0)).unwrap();
    let b = fit_decay_slope(&moved, (1.0, 100.0)).unwrap();
    assert!((a.slope - b.slope).abs() <= 1e-12);
}

#[test]
fn fit_rejects_thin_or_degenerate_windows() {
    let series = log_spaced(1.0, 10.0, 7, |t| t.powf(-1.0));
    assert!(matches!(
        fit_decay_slope(&series, (1.0, 10.0)),
        Err(HarnessError::InsufficientWindow { found: 7, .. })
    ));

    // Points outside the window don't count toward the minimum.
    let wide = log_spaced(0.01, 10.0, 40, |t| t.powf(-1.0));
    assert!(matches!(
        fit_decay_slope(&wide, (9.0, 10.0)),
        Err(HarnessError::InsufficientWindow { .. })
    ));

    let flat: Vec<(f64, f64)> = (0..10).map(|_| (3.0, 1.0)).collect();
    assert!(matches!(
        fit_decay_slope(&flat, (1.0, 10.0)),
        Err(HarnessError::DegenerateWindow)
    ));

    let mut bad = log_spaced(1.0, 10.0, 20, |t| t.powf(-1.0));
    bad[10].1 = 0.0;
    assert!(matches!(
        fit_decay_slope(&bad, (1.0, 10.0)),
        Err(HarnessError::NonpositiveSample { .. })
    ));
}

// --- run configurations used below ------------------------------------------

fn euclidean(dim: u32) -> ManifoldSpec {
    ManifoldSpec::new(ManifoldKind::Euclidean, dim).unwrap()
}

/// Reaction-free heat flow resolving one decay decade: the narrow datum makes
/// the window t ∈ [1, 10] sit well inside the self-similar regime.
fn heat_config() -> RunConfig {
    let mut config = RunConfig::baseline(
        euclidean(3),
        ProblemParams::plap(2.0, 3.0, 3, 1.0, None).unwrap(),
        RadialGrid::new(20.0, 400).unwrap(),
        Datum::Gaussian {
            amplitude: 1.0,
            width: 0.5,
        },
        10.0,
    );
    config.reaction_on = false;
    config.dt0 = 2e-4;
    config
}

/// Reaction-free degenerate diffusion; the compact front never reaches the
/// boundary by t = 100 (it travels like t^{1/7}), so the free-space rate
/// applies.
fn plap_decay_config() -> RunConfig {
    let mut config = RunConfig::baseline(
        euclidean(4),
        ProblemParams::plap(3.0, 3.0, 4, 1.0, None).unwrap(),
        RadialGrid::new(15.0, 300).unwrap(),
        Datum::Gaussian {
            amplitude: 2.0,
            width: 1.0,
        },
        100.0,
    );
    config.reaction_on = false;
    config.dt0 = 1e-3;
    config
}

/// Porous-medium analogue (front speed t^{1/5}).
fn pme_decay_config() -> RunConfig {
    let mut config = RunConfig::baseline(
        euclidean(3),
        ProblemParams::pme(2.0, 3.0, 3, 1.0, None).unwrap(),
        RadialGrid::new(15.0, 300).unwrap(),
        Datum::Gaussian {
            amplitude: 2.0,
            width: 1.0,
        },
        100.0,
    );
    config.reaction_on = false;
    config.dt0 = 1e-3;
    config
}

/// Small-data supercritical run: completes with the monitor below one.
fn small_data_config() -> RunConfig {
    let mut config = RunConfig::baseline(
        euclidean(4),
        ProblemParams::plap(3.0, 3.0, 4, 1.0, None).unwrap(),
        RadialGrid::new(40.0, 150).unwrap(),
        Datum::Gaussian {
            amplitude: 1e-2,
            width: 3.0,
        },
        5.0,
    );
    config.dt0 = 1e-3;
    config
}

/// Reaction-only flow from u ≡ 1 with σ = 2: blows up at t* = 1 exactly.
fn ode_blowup_config() -> RunConfig {
    let mut config = RunConfig::baseline(
        euclidean(3),
        ProblemParams::plap(2.0, 2.0, 3, 1.0, None).unwrap(),
        RadialGrid::new(10.0, 64).unwrap(),
        Datum::Indicator {
            amplitude: 1.0,
            radius: 5.0,
        },
        2.0,
    );
    config.diffusion_on = false;
    config.dt0 = 1e-3;
    config
}

/// A synthetic completed record with a prescribed norm history, for tests
/// that need full control of the series.
fn synthetic_record(rows: Vec<SeriesRow>, status: RunStatus) -> RunRecord {
    RunRecord {
        config: small_data_config(),
        series: rows,
        status,
        clipped_mass: 0.0,
        steps: 0,
        rejected_steps: 0,
        wallclock_s: 0.0,
    }
}

fn power_law_rows(t_lo: f64, t_hi: f64, n: usize, alpha: f64) -> Vec<SeriesRow> {
    log_spaced(t_lo, t_hi, n, |t| t.powf(-alpha))
        .into_iter()
        .map(|(t, v)| SeriesRow {
            t,
            dt: 1e-3,
            linf: v,
            l1: 1.0,
            lq: vec![v.sqrt(), v],
            s_monitor: 0.5,
        })
        .collect()
}

// --- decay verdicts on real runs --------------------------------------------

#[test]
fn heat_flow_matches_its_predicted_rates() {
    let record = run(&heat_config()).unwrap();
    let reports = smoothing_report(
        &record,
        &record.config.params,
        &[
            SmoothingRequest {
                q: f64::INFINITY,
                prediction: SlopePrediction::SupNormAlpha,
            },
            SmoothingRequest {
                q: 2.0,
                prediction: SlopePrediction::Family {
                    family: Family::Prop42,
                    datum_index: 1.0,
                },
            },
        ],
    )
    .unwrap();

    assert_eq!(reports.len(), 2);
    let sup = &reports[0];
    assert_eq!(sup.predicted, 1.5);
    assert_eq!(sup.verdict, Verdict::Match, "fitted {}", sup.fitted_slope);
    assert_eq!(sup.window, last_decade(&record));

    // L¹ → L² smoothing decays like t^{-3/4}.
    let l2 = &reports[1];
    assert_eq!(l2.predicted, 0.75);
    assert_eq!(l2.verdict, Verdict::Match, "fitted {}", l2.fitted_slope);
}

#[test]
fn degenerate_diffusion_matches_its_predicted_rate() {
    let record = run(&plap_decay_config()).unwrap();
    assert_eq!(record.status, RunStatus::Completed);
    let reports = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: f64::INFINITY,
            prediction: SlopePrediction::SupNormAlpha,
        }],
    )
    .unwrap();
    assert_relative_eq!(reports[0].predicted, 4.0 / 7.0, max_relative = 1e-15);
    assert_eq!(
        reports[0].verdict,
        Verdict::Match,
        "fitted {} vs predicted {}",
        reports[0].fitted_slope,
        reports[0].predicted
    );
}

#[test]
fn porous_medium_flow_matches_its_predicted_rate() {
    let record = run(&pme_decay_config()).unwrap();
    assert_eq!(record.status, RunStatus::Completed);
    let reports = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: f64::INFINITY,
            prediction: SlopePrediction::SupNormAlpha,
        }],
    )
    .unwrap();
    assert_eq!(reports[0].predicted, 0.6);
    assert_eq!(
        reports[0].verdict,
        Verdict::Match,
        "fitted {} vs predicted {}",
        reports[0].fitted_slope,
        reports[0].predicted
    );
}

// --- report gating ----------------------------------------------------------

#[test]
fn report_requires_a_completed_run() {
    let record = run(&ode_blowup_config()).unwrap();
    assert!(matches!(record.status, RunStatus::Blowup { .. }));
    let result = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: f64::INFINITY,
            prediction: SlopePrediction::SupNormAlpha,
        }],
    );
    assert!(matches!(result, Err(HarnessError::NotCompleted { .. })));
}

#[test]
fn report_rejects_norms_that_were_not_recorded() {
    let record = synthetic_record(power_law_rows(0.1, 10.0, 64, 1.0), RunStatus::Completed);
    let result = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: 3.0,
            prediction: SlopePrediction::SupNormAlpha,
        }],
    );
    assert!(matches!(result, Err(HarnessError::UnrecordedNorm(q)) if q == 3.0));
}

#[test]
fn report_propagates_family_gate_violations() {
    let record = synthetic_record(power_law_rows(0.1, 10.0, 64, 1.0), RunStatus::Completed);
    // The Poincaré-assisted family needs p > 2; these parameters have p = 3,
    // but the datum index 1.0 violates s > max(σ₀, 1).
    let result = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: 4.0,
            prediction: SlopePrediction::Family {
                family: Family::Thm3,
                datum_index: 1.0,
            },
        }],
    );
    assert!(matches!(result, Err(HarnessError::Exponent(_))));
}

#[test]
fn unfittable_windows_yield_inconclusive_not_errors() {
    // Three rows cannot support a fit; the report records the failure instead
    // of aborting the whole request list.
    let record = synthetic_record(power_law_rows(1.0, 10.0, 3, 1.0), RunStatus::Completed);
    let reports = smoothing_report(
        &record,
        &record.config.params,
        &[SmoothingRequest {
            q: f64::INFINITY,
            prediction: SlopePrediction::SupNormAlpha,
        }],
    )
    .unwrap();
    assert_eq!(reports[0].verdict, Verdict::Inconclusive);
    assert!(reports[0].fitted_slope.is_nan());
}

#[test]
fn last_decade_is_the_trailing_tenth() {
    let record = synthetic_record(power_law_rows(0.01, 50.0, 32, 0.5), RunStatus::Completed);
    let (lo, hi) = last_decade(&record);
    assert_relative_eq!(lo, 5.0, max_relative = 1e-12);
    assert_relative_eq!(hi, 50.0, max_relative = 1e-12);
}

// --- classification ---------------------------------------------------------

#[test]
fn small_data_runs_classify_as_global() {
    let record = run(&small_data_config()).unwrap();
    assert_eq!(record.status, RunStatus::Completed);
    assert_eq!(classify_record(&record), Classification::Global);
    // The classification claims the monitor stayed small; hold it to that.
    for row in &record.series {
        assert!(row.s_monitor <= 1.0 + 1e-9);
    }
}

#[test]
fn blowup_runs_classify_as_blowup() {
    assert_eq!(
        classify_run(&ode_blowup_config()).unwrap(),
        Classification::Blowup
    );
}

#[test]
fn ambiguous_records_classify_as_undecided() {
    let mut rows = power_law_rows(0.1, 10.0, 16, 0.5);
    for row in &mut rows {
        row.s_monitor = 1.5; // completed, but the smallness certificate fails
    }
    let record = synthetic_record(rows.clone(), RunStatus::Completed);
    assert_eq!(classify_record(&record), Classification::Undecided);

    let collapsed = synthetic_record(rows, RunStatus::DtCollapse { t: 3.0 });
    assert_eq!(classify_record(&collapsed), Classification::Undecided);
}

// --- serialization of results -----------------------------------------------

#[test]
fn series_csv_is_shaped_and_round_trips_exactly() {
    let record = run(&small_data_config()).unwrap();
    let csv = series_csv(&record);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,dt,linf,l1,l2,l4,s_monitor");
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), record.series.len());

    // 17-significant-digit floats parse back to the exact bits.
    for (line, row) in data.iter().zip(&record.series) {
        let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0].to_bits(), row.t.to_bits());
        assert_eq!(fields[2].to_bits(), row.linf.to_bits());
        assert_eq!(fields[6].to_bits(), row.s_monitor.to_bits());
    }
}

#[test]
fn identical_runs_serialize_identically() {
    let a = series_csv(&run(&small_data_config()).unwrap());
    let b = series_csv(&run(&small_data_config()).unwrap());
    assert_eq!(a, b);
}

#[test]
fn manifest_echoes_a_reparsable_config() {
    let record = run(&small_data_config()).unwrap();
    let manifest = run_manifest_json(&record);
    assert_eq!(manifest["status"]["kind"], "completed");
    assert_eq!(manifest["t_end"], 5.0);
    assert_eq!(manifest["steps"], record.steps);

    let echoed: RunConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed, record.config);
}

#[test]
fn blowup_manifest_records_the_blowup_time() {
    let record = run(&ode_blowup_config()).unwrap();
    let RunStatus::Blowup { t_star } = record.status else {
        panic!("expected blow-up, got {:?}", record.status);
    };
    let manifest = run_manifest_json(&record);
    assert_eq!(manifest["status"]["kind"], "blowup");
    assert_eq!(manifest["t_star"].as_f64().unwrap(), t_star);
}

// --- sweep axes -------------------------------------------------------------

#[test]
fn axes_rewrite_exactly_one_knob() {
    let base = small_data_config();

    let amp = apply_axis(&base, SweepAxis::Amplitude, 0.5).unwrap();
    assert_eq!(amp.datum.amplitude(), 0.5);
    assert_eq!(amp.params, base.params);

    let sigma = apply_axis(&base, SweepAxis::Sigma, 4.0).unwrap();
    assert_eq!(sigma.params.sigma(), 4.0);

    let dim = apply_axis(&base, SweepAxis::Dim, 5.0).unwrap();
    assert_eq!(dim.params.dim(), 5);
    assert_eq!(dim.manifold.dim, 5);

    // Revalidation catches values that break the standing assumptions.
    assert!(apply_axis(&base, SweepAxis::Sigma, 0.5).is_err()); // σ ≤ p−1
    assert!(apply_axis(&base, SweepAxis::Amplitude, -1.0).is_err());
    assert!(apply_axis(&base, SweepAxis::Dim, 3.5).is_err());
    assert!(apply_axis(&base, SweepAxis::M, 2.0).is_err()); // plap base
    let pme_base = pme_decay_config();
    assert!(apply_axis(&pme_base, SweepAxis::P, 2.5).is_err());
}

// --- the sweep deliverable --------------------------------------------------

#[test]
fn empty_sweep_writes_only_the_index_header() {
    let out = tempfile::tempdir().unwrap();
    let rows = sweep(&small_data_config(), SweepAxis::Amplitude, &[], out.path()).unwrap();
    assert!(rows.is_empty());
    let index = std::fs::read_to_string(out.path().join("runs/index.csv")).unwrap();
    assert_eq!(
        index,
        "id,axis,value,status,classification,s_max,slope_linf,slope_l2,slope_l4,note\n"
    );
    // No run directories: the runs dir holds the index alone.
    let entries: Vec<_> = std::fs::read_dir(out.path().join("runs")).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn amplitude_sweep_crosses_from_global_to_blowup_once() {
    // Six decades straddling the stability boundary.  Width-3 datum on
    // R = 60 = 20 widths keeps the threshold above the truncated problem's
    // steady ceiling, so blow-up is detectable.
    let mut base = small_data_config();
    base.grid = RadialGrid::new(60.0, 150).unwrap();
    let values = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];
    let out = tempfile::tempdir().unwrap();
    let rows = sweep(&base, SweepAxis::Amplitude, &values, out.path()).unwrap();
    assert_eq!(rows.len(), 6);

    let classes: Vec<Classification> = rows.iter().map(|r| r.classification.unwrap()).collect();
    assert_eq!(classes.first(), Some(&Classification::Global));
    assert_eq!(classes.last(), Some(&Classification::Blowup));
    let transitions = classes.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(transitions, 1, "classifications {classes:?}");

    for row in &rows {
        assert!(row.note.is_none(), "unexpected failure: {:?}", row.note);
        let dir = out.path().join("runs").join(&row.id);
        assert!(dir.join("series.csv").is_file());
        assert!(dir.join("manifest.json").is_file());
        // Completed rows carry fitted slopes; blow-up rows don't.
        if row.status == "completed" {
            assert!(row.s_max.unwrap() <= 1.0);
        } else {
            assert_eq!(row.status, "blowup");
            assert!(row.slopes.iter().all(Option::is_none));
        }
    }

    let index = std::fs::read_to_string(out.path().join("runs/index.csv")).unwrap();
    assert_eq!(index.lines().count(), 7);
    assert!(index.lines().nth(1).unwrap().starts_with("000_amplitude_"));
}

#[test]
fn sweeps_are_deterministic_across_repeats() {
    let mut base = small_data_config();
    base.t_end = 1.0;
    let values = [5e-3, 2e-2];
    let (out_a, out_b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let rows_a = sweep(&base, SweepAxis::Amplitude, &values, out_a.path()).unwrap();
    let rows_b = sweep(&base, SweepAxis::Amplitude, &values, out_b.path()).unwrap();
    assert_eq!(rows_a, rows_b);

    let read = |root: &std::path::Path, rel: &str| std::fs::read(root.join(rel)).unwrap();
    for rel in [
        "runs/index.csv",
        "runs/000_amplitude_5e-3/series.csv",
        "runs/001_amplitude_2e-2/series.csv",
    ] {
        assert_eq!(
            read(out_a.path(), rel),
            read(out_b.path(), rel),
            "{rel} differs between identical sweeps"
        );
    }

    // Manifests are deterministic up to the one measured field.
    let manifest = |root: &std::path::Path| -> serde_json::Value {
        let bytes = read(root, "runs/001_amplitude_2e-2/manifest.json");
        let mut doc: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        doc.as_object_mut().unwrap().remove("wallclock_s").unwrap();
        doc
    };
    assert_eq!(manifest(out_a.path()), manifest(out_b.path()));
}

#[test]
fn sigma_sweep_flips_the_supercriticality_gate() {
    // Tiny datum so both runs complete; the gate flag lives in the manifest's
    // config echo.  The edge for p = 2, N = 3 sits at σ = 1 + 2/3.
    let mut base = heat_config();
    base.t_end = 0.5;
    base.dt0 = 1e-3;
    base.datum = Datum::Gaussian {
        amplitude: 1e-3,
        width: 1.0,
    };
    base.reaction_on = true;
    let out = tempfile::tempdir().unwrap();
    let rows = sweep(&base, SweepAxis::Sigma, &[1.5, 1.8], out.path()).unwrap();
    assert!(rows.iter().all(|r| r.status == "completed"));

    let gate_of = |id: &str| {
        let path = out.path().join("runs").join(id).join("manifest.json");
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let config: RunConfig = serde_json::from_value(doc["config"].clone()).unwrap();
        radlab_core::exponents::fujita_gate(&config.params)
    };
    assert!(!gate_of(&rows[0].id));
    assert!(gate_of(&rows[1].id));
}

#[test]
fn per_run_failures_are_recorded_without_stopping_the_sweep() {
    let mut base = small_data_config();
    base.t_end = 0.5;
    let out = tempfile::tempdir().unwrap();
    let rows = sweep(&base, SweepAxis::Dim, &[4.0, 4.5], out.path()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].status, "completed");
    assert_eq!(rows[1].status, "error");
    assert!(rows[1].classification.is_none());
    assert!(rows[1].note.as_deref().unwrap().contains("integer"));

    // The failure lands in the index too, with separators sanitized away.
    let index = std::fs::read_to_string(out.path().join("runs/index.csv")).unwrap();
    let error_line = index.lines().nth(2).unwrap();
    assert!(error_line.contains("error"));
    assert_eq!(error_line.matches(',').count(), index.lines().next().unwrap().matches(',').count());
}
