//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn semicont(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semicont"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A small hand-written dataset with two covariates and a zero-inflated
/// response, written into `dir`.
fn write_covariate_csv(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("cov.csv");
    let mut csv = String::from("y,x1,x2\n");
    for i in 0..80 {
        let x1 = (i % 7) as f64 / 3.0 - 1.0;
        let x2 = (i % 5) as f64 / 4.0;
        // Deterministic zero-inflated pattern, roughly log-linear in x1.
        let y = if i % 4 == 0 { 0.0 } else { (0.4 + 0.8 * x1 + 0.3 * x2).exp() * (1.0 + (i % 3) as f64 * 0.4) };
        csv.push_str(&format!("{y},{x1},{x2}\n"));
    }
    std::fs::write(&path, csv).unwrap();
    path
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "50", "--seed", "9", "--out", "a.csv"],
        dir.path(),
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "50", "--seed", "9", "--out", "b.csv"],
        dir.path(),
    );
    assert!(b.status.success());
    let c = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "50", "--seed", "10", "--out", "c.csv"],
        dir.path(),
    );
    assert!(c.status.success());

    let bytes_a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b.csv")).unwrap();
    let bytes_c = std::fs::read(dir.path().join("c.csv")).unwrap();
    assert_eq!(bytes_a, bytes_b);
    assert_ne!(bytes_a, bytes_c);

    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text.lines().next(), Some("y"));
    // Zeros print as plain zeros, and every value parses back.
    for line in text.lines().skip(1) {
        let v: f64 = line.parse().unwrap();
        assert!(v >= 0.0);
        assert!(!line.starts_with('-'));
    }
}

#[test]
fn summary_reports_the_response_distribution() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("y.csv"), "y\n0\n0\n2\n6\n").unwrap();
    let out = semicont(&["summary", "--data", "y.csv", "--response", "y"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("n: 4"));
    assert!(text.contains("zero fraction: 0.5000"));
    assert!(text.contains("mean: 2.0000"));
    assert!(text.contains("max: 6.0000"));
}

#[test]
fn fit_writes_model_json_for_all_three_families() {
    let dir = tempfile::tempdir().unwrap();
    let sim = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "600", "--seed", "9", "--out", "y.csv"],
        dir.path(),
    );
    assert!(sim.status.success());

    for (model, file) in [
        ("tweedie", "fit_tweedie.json"),
        ("twopart", "fit_twopart.json"),
        ("tobit", "fit_tobit.json"),
    ] {
        let out = semicont(
            &["fit", "--model", model, "--power", "1.5", "--data", "y.csv", "--response", "y", "--covariates", "", "--out", "fits"],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{model}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("fits").join(file)).unwrap())
                .unwrap();
        assert_eq!(json["model"], model);
    }

    let tweedie: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fits/fit_tweedie.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(tweedie["power"], 1.5);
    assert_eq!(tweedie["power_estimated"], false);
    assert_eq!(tweedie["coefficients"].as_array().unwrap().len(), 1);
    assert!(tweedie["converged"].as_bool().unwrap());

    let tobit: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fits/fit_tobit.json")).unwrap(),
    )
    .unwrap();
    assert!(tobit["sigma"].as_f64().unwrap() > 0.0);
}

#[test]
fn fit_with_estimated_power_reports_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let sim = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "600", "--seed", "4", "--out", "y.csv"],
        dir.path(),
    );
    assert!(sim.status.success());
    let out = semicont(
        &["fit", "--model", "tweedie", "--data", "y.csv", "--response", "y", "--covariates", "", "--out", "."],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fit_tweedie.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["power_estimated"], true);
    let p = json["power"].as_f64().unwrap();
    assert!(p > 1.0 && p < 2.0);
    // The profile curve is reported alongside the estimate.
    assert!(json["profile"].as_array().unwrap().len() >= 19);
}

#[test]
fn fit_respects_covariate_selection_and_order() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_covariate_csv(dir.path());
    let out = semicont(
        &[
            "fit", "--model", "tweedie", "--power", "1.5",
            "--data", csv.to_str().unwrap(),
            "--response", "y", "--covariates", "x2,x1", "--out", ".",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fit_tweedie.json")).unwrap(),
    )
    .unwrap();
    let coefs = json["coefficients"].as_array().unwrap();
    let names: Vec<&str> =
        coefs.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["intercept", "x2", "x1"]);
}

#[test]
fn compare_writes_a_reproducible_report() {
    let dir = tempfile::tempdir().unwrap();
    let sim = semicont(
        &["simulate", "--mu", "2", "--phi", "1.5", "--p", "1.5", "--n", "600", "--seed", "9", "--out", "y.csv"],
        dir.path(),
    );
    assert!(sim.status.success());

    for out_dir in ["cmp1", "cmp2"] {
        let out = semicont(
            &[
                "compare", "--data", "y.csv", "--response", "y", "--covariates", "",
                "--train-n", "500", "--test-n", "100", "--seed", "7", "--out", out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        assert!(text.contains("tweedie"));
        assert!(text.contains("tobit"));
    }

    for file in [
        "report.json",
        "qq_tweedie.csv",
        "qq_twopart.csv",
        "qq_tobit.csv",
        "pred_tweedie.csv",
        "pred_twopart.csv",
        "pred_tobit.csv",
        "meanvar.csv",
        "fig_qq.svg",
        "fig_pred.svg",
        "fig_meanvar.svg",
    ] {
        assert!(dir.path().join("cmp1").join(file).exists(), "missing {file}");
    }
    let a = std::fs::read(dir.path().join("cmp1/report.json")).unwrap();
    let b = std::fs::read(dir.path().join("cmp2/report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exit_codes_distinguish_usage_data_and_model_errors() {
    let dir = tempfile::tempdir().unwrap();

    // Usage errors → 1.
    let unknown = semicont(&["fit", "--bogus"], dir.path());
    assert_eq!(unknown.status.code(), Some(1));
    let bad_power = semicont(
        &["fit", "--model", "tweedie", "--power", "2.5", "--data", "y.csv", "--response", "y"],
        dir.path(),
    );
    assert_eq!(bad_power.status.code(), Some(1));

    // Data errors → 2.
    let missing = semicont(&["summary", "--data", "nope.csv", "--response", "y"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(dir.path().join("allpos.csv"), "y\n1.0\n2.0\n3.5\n4.0\n").unwrap();
    let degenerate = semicont(
        &["fit", "--model", "twopart", "--data", "allpos.csv", "--response", "y", "--covariates", ""],
        dir.path(),
    );
    assert_eq!(degenerate.status.code(), Some(2));

    std::fs::write(dir.path().join("gap.csv"), "y,x\n1.0,2\n,3\n0.0,\n2.0,1\n").unwrap();
    let missing_cells = semicont(
        &["fit", "--model", "tobit", "--data", "gap.csv", "--response", "y", "--covariates", "x"],
        dir.path(),
    );
    assert_eq!(missing_cells.status.code(), Some(2));
    let err = String::from_utf8_lossy(&missing_cells.stderr);
    assert!(err.contains("row"), "unhelpful error: {err}");

    // Success and help → 0.
    let help = semicont(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
}
