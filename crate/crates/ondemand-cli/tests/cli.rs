//! End-to-end checks of the `ondemand` binary: subcommand output, exit
//! codes, file artifacts, and bitwise reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ondemand"))
}

fn slow_family_args(gamma: f64) -> Vec<String> {
    [
        ("lambda", "2"),
        ("r", "1000"),
        ("alpha", "0.9"),
        ("beta", "0.05"),
        ("mu", "0.5"),
        ("delta", "0.01"),
        ("theta", "0.01"),
        ("epsilon", "1"),
    ]
    .iter()
    .flat_map(|(k, v)| ["--set".to_string(), format!("{k}={v}")])
    .chain(["--set".to_string(), format!("gamma={gamma}")])
    .collect()
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn stability_report_booleans() {
    let output = bin()
        .arg("stability")
        .args(slow_family_args(5.0))
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["condition_i"]["satisfied"], false);
    assert_eq!(json["condition_ii"]["satisfied"], false);
    assert_eq!(json["surplus_hurwitz"], true);
    assert_eq!(json["corollaries"].as_array().unwrap().len(), 12);
}

#[test]
fn parameter_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("params.txt");
    std::fs::write(
        &file,
        "lambda = 2\nr = 1000\nalpha = 0.9\nbeta = 0.05\nmu = 0.5\ndelta = 0.01\ntheta = 0.01\ngamma = 1\nepsilon = 1\n",
    )
    .unwrap();
    let output = bin()
        .arg("stability")
        .arg("--params")
        .arg(&file)
        .args(["--set", "gamma=10"])
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["condition_i"]["satisfied"], true);
}

#[test]
fn usage_and_validation_errors_exit_one() {
    // Unknown subcommand.
    let output = bin().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Missing parameters entirely.
    let output = bin().arg("stability").output().unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Constraint violation names the offending parameter.
    let mut args = slow_family_args(5.0);
    args.extend(["--set".to_string(), "alpha=1".to_string()]);
    let output = bin().arg("stability").args(args).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("alpha must lie in [0,1)"), "stderr: {stderr}");

    // Malformed parameter file.
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "lambda = 2\nwhat is this\n").unwrap();
    let output = bin()
        .arg("stability")
        .arg("--params")
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn numerical_divergence_exits_two() {
    // The boundary-free low-gain system grows without bound; pushed far
    // enough it overflows and the integrator reports divergence.
    let output = bin()
        .arg("fluid")
        .args(slow_family_args(1.0))
        .args([
            "--initial",
            "1000,6000,2000",
            "--unbounded",
            "--T",
            "150000",
            "--dt",
            "0.02",
            "--sample-dt",
            "10000",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("divergence"), "stderr: {stderr}");
}

#[test]
fn simulate_is_reproducible_per_seed() {
    let run = |seed: &str| {
        let output = bin()
            .arg("simulate")
            .args(slow_family_args(10.0))
            .args([
                "--initial", "1000,6000,2000",
                "--T", "5",
                "--sample-dt", "0.5",
                "--seed", seed,
            ])
            .output()
            .unwrap();
        assert!(output.status.success());
        output.stdout
    };
    let a = run("42");
    let b = run("42");
    let c = run("43");
    assert_eq!(a, b, "same seed must give identical output bytes");
    assert_ne!(a, c, "different seeds must differ");
}

#[test]
fn fluid_csv_headers_match_coordinate_choice() {
    let centered = bin()
        .arg("fluid")
        .args(slow_family_args(10.0))
        .args(["--T", "1", "--sample-dt", "0.5"])
        .output()
        .unwrap();
    assert!(centered.status.success());
    let text = String::from_utf8(centered.stdout).unwrap();
    assert!(text.starts_with("t,x,y,v\n"), "got: {}", &text[..20.min(text.len())]);

    let raw = bin()
        .arg("fluid")
        .args(slow_family_args(10.0))
        .args(["--T", "1", "--sample-dt", "0.5", "--coords", "raw"])
        .output()
        .unwrap();
    let text = String::from_utf8(raw.stdout).unwrap();
    assert!(text.starts_with("t,X,Y,V,Z\n"));
}

#[test]
fn simulate_csv_has_raw_header_and_integer_counts() {
    let output = bin()
        .arg("simulate")
        .args(slow_family_args(10.0))
        .args(["--T", "1", "--sample-dt", "0.5", "--initial", "10,-3,7"])
        .output()
        .unwrap();
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,X,Y,Z,Xtarget"));
    let first = lines.next().unwrap();
    assert_eq!(first, "0,10,-3,7,");
}

#[test]
fn compare_reports_consistent_distances() {
    let output = bin()
        .arg("compare")
        .args(slow_family_args(10.0))
        .args([
            "--initial", "1000,6000,2000",
            "--T", "10",
            "--sample-dt", "0.1",
            "--seed", "7",
        ])
        .output()
        .unwrap();
    let json = stdout_json(&output);
    let sup = json["comparison"]["sup"].as_f64().unwrap();
    let per: Vec<f64> = json["comparison"]["per_component"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let max_comp = per.iter().cloned().fold(0.0_f64, f64::max);
    assert!(sup >= max_comp);
}

#[test]
fn example_writes_the_artifact_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let output = bin()
        .arg("example")
        .arg("ex1a")
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    assert_eq!(json["fluid_converged"], true);

    for file in ["params.txt", "stability.json", "fluid.csv", "sim.csv", "report.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["preset"], "ex1a");
    assert_eq!(report["fluid"]["converged"], true);

    // Unknown preset id is a usage error.
    let output = bin().args(["example", "nope"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn example_reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let output = bin()
            .arg("example")
            .arg("ex1a")
            .arg("--seed")
            .arg("9")
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    for file in ["params.txt", "stability.json", "fluid.csv", "sim.csv", "report.json"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between reruns");
    }
}

#[test]
fn gain_sweep_crosses_the_ratio_threshold() {
    let output = bin()
        .arg("sweep")
        .args(slow_family_args(1.0))
        .args([
            "--param", "gamma",
            "--values", "8.7,8.9",
            "--no-sim",
            "--no-fluid",
        ])
        .output()
        .unwrap();
    let json = stdout_json(&output);
    let points = json["points"].as_array().unwrap();
    assert_eq!(points[0]["cond_i"], false, "gamma 8.7 below the threshold");
    assert_eq!(points[1]["cond_i"], true, "gamma 8.9 above the threshold");
}

#[test]
fn sweep_csv_format() {
    let output = bin()
        .arg("sweep")
        .args(slow_family_args(1.0))
        .args([
            "--param", "gamma",
            "--from", "1",
            "--to", "3",
            "--steps", "3",
            "--no-sim",
            "--no-fluid",
            "--format", "csv",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("value,cond_i,cond_ii,cqlf,fluid_converged,sim_converged")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn example_defaults_to_runs_directory() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .arg("example")
        .arg("ex1a")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.path().join("runs/ex1a/report.json").exists());
}

#[test]
fn battery_probe_is_gamma_only() {
    let output = bin()
        .arg("sweep")
        .args(slow_family_args(1.0))
        .args(["--param", "epsilon", "--values", "1,2", "--battery", "--no-sim"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    let output = bin()
        .arg("fluid")
        .args(slow_family_args(1.0))
        .args(["--initial", "1,2,3,4", "--T", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Sweep grids must be strictly increasing.
    let output = bin()
        .arg("sweep")
        .args(slow_family_args(1.0))
        .args(["--values", "5,3", "--no-sim", "--no-fluid"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn sweep_writes_into_directory() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .arg("sweep")
        .args(slow_family_args(1.0))
        .args(["--values", "10", "--no-sim", "--no-fluid"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(Path::new(dir.path()).join("sweep.json").exists());
}
