//! CLI acceptance: determinism of the machine-readable report, exit codes,
//! and the documented file schemas, exercised through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn verify() -> Command {
    Command::new(env!("CARGO_BIN_EXE_verify"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    verify().args(args).output().expect("binary runs")
}

const SMALL_SPURIOSITY: &str = r#"
kind = "spuriosity"
seed = 7

[grid]
type = "polar"
r_max = 8.0
nr = 32
nphi = 64

[params]
nu_list = [0.0, 0.5, 1.0]
wavenumber = 1.0
coefficient_counts = [64]
"#;

/// Criterion: identical config and seed produce byte-identical report.json.
#[test]
fn c10_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.toml", SMALL_SPURIOSITY);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = run(&[
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
            "--jobs",
            "2",
        ]);
        assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports differ between identical runs");
    println!("[acceptance] C10 identical config + seed give byte-identical report.json: PASS");
}

#[test]
fn malformed_config_names_the_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.toml",
        r#"
kind = "quantization"
[potential]
name = "harmonic"
[params]
nu_list = [0.0]
"#,
    );
    let output = run(&[config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("potential.omega"), "stderr: {stderr}");
}

#[test]
fn spuriosity_verdicts_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.toml", SMALL_SPURIOSITY);
    let out = dir.path().join("out");
    let output = run(&[config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "spuriosity");
    assert_eq!(report["all_pass"], true);
    let cases = report["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 3);
    assert_eq!(cases[0]["verdicts"]["verdict"], "physical");
    assert_eq!(cases[1]["verdicts"]["verdict"], "spurious");
    assert_eq!(cases[2]["verdicts"]["verdict"], "physical");
    // documented CSV headers
    let cases_csv = std::fs::read_to_string(out.join("cases.csv")).unwrap();
    assert!(cases_csv.starts_with("case_id,pass,metric,value\n"));
    let jump_csv = std::fs::read_to_string(out.join("branch_jump_vs_nu.csv")).unwrap();
    assert!(jump_csv.starts_with("nu,branch_jump\n"));
    assert!(out.join("plot.py").exists());
    assert!(out.join("summary.txt").exists());
}

#[test]
fn equivalence_convergence_table_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.toml",
        r#"
kind = "equivalence"

[potential]
name = "free"

[params]
nu_list = [1.0]
n_list = [0]
r_max = 1.0
annulus = [0.06, 0.97]
levels = [[32, 64], [64, 128]]
"#,
    );
    let out = dir.path().join("out");
    let output = run(&[config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let tables = report["convergence_tables"].as_array().unwrap();
    assert_eq!(tables.len(), 2); // energy balance and continuity
    for table in tables {
        assert_eq!(table["rows"].as_array().unwrap().len(), 2);
    }
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("case_id,quantity,level,h,norm,observed_order\n"));
    assert_eq!(csv.lines().count(), 1 + 4); // header + 2 quantities x 2 levels
}

#[test]
fn quantization_round_trip_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.toml",
        r#"
kind = "quantization"

[potential]
name = "harmonic"
omega = 1.0

[grid]
type = "cartesian"
half_width = 6.0
n = 96

[params]
nu_list = [-1.0, 0.0, 1.0]
n_list = [0]
r_max = 12.0

[[loops]]
center = [0.0, 0.0]
radius = 1.5
samples = 360

[[loops]]
center = [0.0, 0.0]
radius = 2.5
samples = 360
"#,
    );
    let out_env = dir.path().join("from-env");
    let output = verify()
        .arg(config.to_str().unwrap())
        .env("VERIFY_OUT_DIR", out_env.to_str().unwrap())
        .env("VERIFY_JOBS", "1")
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out_env.join("report.json").exists(), "env override directs output");

    // a flag beats the environment
    let out_flag = dir.path().join("from-flag");
    let output = verify()
        .arg(config.to_str().unwrap())
        .arg("--out")
        .arg(out_flag.to_str().unwrap())
        .env("VERIFY_OUT_DIR", dir.path().join("ignored").to_str().unwrap())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(out_flag.join("report.json").exists());
    assert!(!dir.path().join("ignored").exists());

    // the full report round-trips through its schema
    let text = std::fs::read_to_string(out_flag.join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["all_pass"], true);
    for case in report["cases"].as_array().unwrap() {
        let winding = case["metrics"]["loop0_winding"].as_f64().unwrap();
        let nu = case["metrics"]["nu"].as_f64().unwrap();
        assert_eq!(winding, nu);
        assert!(case["metrics"]["loop0_defect"].as_f64().unwrap() <= 1e-3);
    }
}

#[test]
fn sum_rule_miniature_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.toml",
        r#"
kind = "sum-rule"
seed = 3

[grid]
type = "cartesian"
half_width = 3.0
n = 96

[params]
trials = 5
max_vortices = 3
probe = false
"#,
    );
    let out = dir.path().join("out");
    let output = run(&[config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let cases = report["cases"].as_array().unwrap();
    // 5 trials + pair + empty loop
    assert_eq!(cases.len(), 7);
    assert!(cases.iter().all(|c| c["pass"] == true));
}
