use trainrec::error::{CurveError, Stage, StageError};
use trainrec::metrics;
use trainrec::pipeline::{
    plot_data, reconstruct, results_csv, run_experiment, summary_csv, ExperimentConfig, ReconstructOptions,
    TrialOutcome,
};
use trainrec::sampler::{sample_cloud, NoiseModel, PointCloud};
use trainrec::signal::{make_chirp_like, PeriodicSignal};
use trainrec::solver::coordinate_estimates;

/// Noiseless trains at equally spaced start times: the idealized data of the
/// exact algorithm, with no sampling error in the phase distribution.
fn equispaced_cloud(signal: &PeriodicSignal, tau: f64, d: usize, n: usize) -> PointCloud {
    let mut coords = vec![0.0; n * d];
    for (j, chunk) in coords.chunks_exact_mut(d).enumerate() {
        signal.fill_train(signal.period() * (j as f64 + 0.5) / n as f64, tau, chunk);
    }
    PointCloud::new(d, coords, tau).unwrap()
}

#[test]
fn ideal_data_recovers_sine() {
    let signal = PeriodicSignal::sine(1.0, 2.0).unwrap();
    let cloud = equispaced_cloud(&signal, 0.39, 3, 5000);
    let result = reconstruct(&cloud, 0.1, &ReconstructOptions::default()).unwrap();
    let report = metrics::evaluate(&signal, &result.signal_estimate, 2048);
    assert!(report.eps_2 < 1e-3 * 2.0, "{report:?}");
    assert!(report.eps_t < 1e-4, "{report:?}");
}

#[test]
fn ideal_data_recovers_chirp() {
    let signal = make_chirp_like(1.0).unwrap();
    let cloud = equispaced_cloud(&signal, 0.39, 3, 5000);
    let result = reconstruct(&cloud, 0.1, &ReconstructOptions::default()).unwrap();
    let report = metrics::evaluate(&signal, &result.signal_estimate, 2048);
    assert!(report.eps_2 < 1e-3 * 2.0, "{report:?}");
    assert!(report.eps_t < 1e-4, "{report:?}");
}

#[test]
fn ten_points_are_too_few() {
    let signal = make_chirp_like(1.0).unwrap();
    let cloud = sample_cloud(&signal, 0.39, 3, 10, NoiseModel::gaussian(0.02), 0.0, 3).unwrap();
    let err = reconstruct(&cloud, 0.1, &ReconstructOptions::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Curve);
    assert!(matches!(err.source, StageError::Curve(CurveError::TooFewPoints(10))));
    assert!(err.to_string().starts_with("curve stage failed"));
}

#[test]
fn radius_too_small_is_reported_by_stage() {
    let signal = make_chirp_like(1.0).unwrap();
    let cloud = sample_cloud(&signal, 0.39, 3, 500, NoiseModel::gaussian(0.02), 0.0, 3).unwrap();
    let err = reconstruct(&cloud, 0.005, &ReconstructOptions::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Curve);
}

#[test]
fn coordinate_estimates_agree_within_three_sigma() {
    let sigma = 0.02;
    let signal = make_chirp_like(1.0).unwrap();
    let cloud = sample_cloud(&signal, 0.39, 3, 20000, NoiseModel::gaussian(sigma), 0.0, 11).unwrap();
    let result = reconstruct(&cloud, 5.0 * sigma, &ReconstructOptions::default()).unwrap();
    let est = coordinate_estimates(&result.curve, &result.offset, 0.39, 1024);
    for k in 0..3 {
        for l in k + 1..3 {
            let rms = (est[k]
                .iter()
                .zip(&est[l])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / 1024.0)
                .sqrt();
            assert!(rms < 3.0 * sigma, "pair ({k}, {l}): {rms}");
        }
    }
}

#[test]
fn reconstruction_document_round_trips() {
    let signal = PeriodicSignal::sine(1.0, 2.0).unwrap();
    let cloud = sample_cloud(&signal, 0.39, 3, 3000, NoiseModel::gaussian(0.01), 0.0, 5).unwrap();
    let result = reconstruct(&cloud, 0.05, &ReconstructOptions::default()).unwrap();
    let doc = result.to_document();
    assert_eq!(doc.metadata.seed, Some(5));
    assert_eq!(doc.metadata.n, 3000);
    assert_eq!(doc.signal.len(), 2048);
    let text = serde_json::to_string(&doc).unwrap();
    let back: trainrec::solver::ResultDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.signal_estimate().unwrap(), result.signal_estimate);
}

fn small_config(threads: usize) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{
            "signal": {{"builtin": "chirp"}},
            "tau_ratio": 0.39,
            "d_values": [3],
            "n_values": [10, 3000],
            "sigma": 0.02,
            "radius": {{"sigma_multiple": 5.0}},
            "trials": 3,
            "master_seed": 17,
            "threads": {threads}
        }}"#
    ))
    .unwrap()
}

#[test]
fn experiment_counts_rows_and_records_failures() {
    let output = run_experiment(&small_config(0)).unwrap();
    assert_eq!(output.rows.len(), 6);
    assert_eq!(output.summaries.len(), 2);
    let csv = results_csv(&output.rows);
    assert_eq!(csv.lines().count(), 1 + 6);
    let summary = summary_csv(&output.summaries);
    assert_eq!(summary.lines().count(), 1 + 2);

    // n = 10 fails in the curve stage without aborting the sweep.
    for row in output.rows.iter().filter(|r| r.n == 10) {
        match &row.outcome {
            TrialOutcome::Failure { stage, .. } => assert_eq!(stage, "curve"),
            other => panic!("unexpected {other:?}"),
        }
    }
    assert_eq!(output.summaries[0].failures, 3);
    assert!(output.summaries[0].stats.iter().all(Option::is_none));
    assert_eq!(output.summaries[1].successes, 3);
    assert!(csv.lines().nth(1).unwrap().contains(",failed,curve,"));
}

#[test]
fn trials_do_not_depend_on_thread_count() {
    let one = results_csv(&run_experiment(&small_config(1)).unwrap().rows);
    let three = results_csv(&run_experiment(&small_config(3)).unwrap().rows);
    assert_eq!(one, three);
}

#[test]
fn plot_data_reads_results_table() {
    let output = run_experiment(&small_config(0)).unwrap();
    let table = plot_data(&results_csv(&output.rows)).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "metric,d,n,count,min,q1,median,q3,max");
    // 4 metrics x 2 cells.
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines.iter().any(|l| l.starts_with("eps_2,3,3000,3,")));
    assert!(lines.iter().any(|l| l.starts_with("eps_2,3,10,0,")));
    assert!(plot_data("d,n\n1,2\n").is_err());
}

#[test]
fn shipped_config_parses() {
    let text = include_str!("../configs/experiment.json");
    let config = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(config.d_values, vec![3, 4]);
    assert_eq!(config.n_values, vec![1000, 4000, 16000]);
    assert!((config.radius_value() - 0.1).abs() < 1e-15);
}
