use std::path::Path;
use std::process::{Command, Output};

fn trainrec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trainrec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn full_workflow_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(trainrec(&["synth", "--kind", "sine", "--amplitude", "2", "--out", "sine.json"], p));
    ok(trainrec(
        &[
            "sample", "--signal", "sine.json", "--tau", "0.39", "--n", "3000", "--sigma", "0.01", "--seed", "4",
            "--out", "cloud.csv",
        ],
        p,
    ));
    let cloud = std::fs::read_to_string(p.join("cloud.csv")).unwrap();
    assert!(cloud.starts_with("# tau=0.39 d=3 seed=4"));
    assert_eq!(cloud.lines().count(), 1 + 3000);

    let out = ok(trainrec(&["reconstruct", "--cloud", "cloud.csv", "--radius", "0.05", "--out", "result.json"], p));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T = "));

    let out = ok(trainrec(&["evaluate", "--result", "result.json", "--reference", "sine.json"], p));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["eps_t"].as_f64().unwrap() < 1e-2, "{report}");
    assert!(report["eps_2"].as_f64().unwrap() < 0.05, "{report}");
}

#[test]
fn experiment_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("config.json"),
        r#"{"signal": {"builtin": "sine"}, "tau_ratio": 0.39, "d_values": [3], "n_values": [2000],
            "sigma": 0.01, "radius": {"absolute": 0.05}, "trials": 2, "master_seed": 1,
            "output": {"results": "results.csv", "summary": "summary.csv"}}"#,
    )
    .unwrap();
    ok(trainrec(&["experiment", "--config", "config.json", "--trials", "3"], p));
    let results = std::fs::read_to_string(p.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 3);
    let summary = std::fs::read_to_string(p.join("summary.csv")).unwrap();
    assert!(summary.starts_with("d,n,successes,failures,eps_t_min,"));

    let out = ok(trainrec(&["plot-data", "--results", "results.csv"], p));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("eps_2,3,2000,3,")));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    let out = trainrec(&["reconstruct", "--cloud", "missing.csv", "--radius", "0.1"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    // A headerless cloud needs --tau.
    std::fs::write(p.join("bare.csv"), "0,1,2\n1,2,3\n").unwrap();
    let out = trainrec(&["reconstruct", "--cloud", "bare.csv", "--radius", "0.1"], p);
    assert!(!out.status.success());

    // Too few points for a curve.
    let out = trainrec(&["reconstruct", "--cloud", "bare.csv", "--tau", "0.3", "--radius", "0.1"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("curve stage failed"));

    ok(trainrec(&["synth", "--out", "chirp.json"], p));
    let out = trainrec(&["sample", "--signal", "chirp.json", "--tau", "-1", "--n", "10"], p);
    assert!(!out.status.success());

    std::fs::write(p.join("bad.json"), r#"{"signal": {"builtin": "sine"}, "bogus": 1}"#).unwrap();
    let out = trainrec(&["experiment", "--config", "bad.json"], p);
    assert!(!out.status.success());
}

#[test]
fn undersampling_warning_is_printed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(trainrec(&["synth", "--out", "chirp.json"], p));
    let out = ok(trainrec(&["sample", "--signal", "chirp.json", "--tau", "0.6", "--n", "10"], p));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning:"));
}
