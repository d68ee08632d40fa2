use std::f64::consts::PI;
use std::process::{Command, Output};

use hillspec_core::spectrum::{SpectrumReport, DISTINCT_TOL};
use serde_json::Value;

const EXAMPLE: [&str; 8] = ["--n", "3", "--H", "0", "--l", "2", "--m", "3"];

fn hillspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hillspec")).args(args).output().expect("binary runs")
}

fn run(cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd];
    args.extend(EXAMPLE);
    args.extend(extra);
    hillspec(&args)
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
#[allow(clippy::excessive_precision)]
fn profile_summary_for_the_closed_example() {
    let json: Value = serde_json::from_str(&stdout(&run("profile", &[]))).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert!((json["c"].as_f64().unwrap() - 2.8284247911397589).abs() < 1e-4);
    assert!((json["T"].as_f64().unwrap() - 2.6722005616).abs() < 1e-4);
    assert!((json["theta_T"].as_f64().unwrap() - 4.0 * PI / 3.0).abs() < 1e-9);
    assert_eq!((json["l"].as_u64(), json["m"].as_u64()), (Some(2), Some(3)));
}

#[test]
fn profile_from_c_reports_the_angle() {
    let out = hillspec(&["profile", "--n", "3", "--H", "0", "--c", "2.8284247911397589"]);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((json["theta_T"].as_f64().unwrap() - 4.0 * PI / 3.0).abs() < 1e-4);
}

#[test]
fn trajectory_csv_lies_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let summary = stdout(&run("profile", &["--samples", "301", "--trajectory", path.to_str().unwrap()]));
    assert!(summary.contains("\"theta_T\""));
    let (header, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header, ["t", "r", "r_prime", "theta", "x", "y"]);
    assert_eq!(rows.len(), 301);
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[1] * v[1] + v[4] * v[4] + v[5] * v[5] - 1.0).abs() < 1e-12);
    }
    let last: f64 = rows[300][3].parse().unwrap();
    assert!((last - 4.0 * PI).abs() < 1e-8, "curve closes after theta = 4 pi");
}

#[test]
fn profile_csv_goes_to_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run("profile", &["--format", "csv", "--samples", "11", "--out", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    assert_eq!(csv_rows(&std::fs::read_to_string(&path).unwrap()).1.len(), 11);
}

#[test]
fn validation_errors_exit_with_one() {
    let cases: [&[&str]; 5] = [
        &["profile", "--n", "3"],
        &["profile", "--n", "3", "--c", "3", "--l", "2", "--m", "3"],
        &["profile", "--n", "3", "--l", "2", "--m", "4"],
        &["profile", "--n", "3", "--c", "3", "--tol-ode", "0"],
        &["profile", "--n", "3", "--c", "3", "--bogus"],
    ];
    for args in cases {
        assert_eq!(hillspec(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(hillspec(&["--help"]).status.code(), Some(0));
}

#[test]
fn numeric_failures_exit_with_two() {
    // 2.9 gives an open curve, so there is no periodic problem to solve
    let out = hillspec(&["spectrum", "--n", "3", "--c", "2.9", "--operator", "laplace"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn discriminant_grid_over_the_laplace_window() {
    let text = stdout(&run(
        "discriminant",
        &["--operator", "laplace", "--lambda-min", "-0.1", "--lambda-max", "3.3", "--lambda-step", "0.001"],
    ));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["lambda", "delta"]);
    assert_eq!(rows.len(), 3401);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    for target in [0.0, 0.4404, 3.0] {
        let closest = points
            .iter()
            .filter(|(l, _)| (l - target).abs() < 5e-3)
            .map(|(_, d)| (d - 2.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-3, "delta near {target} stays {closest} away from 2");
    }
    assert!(rows.iter().all(|r| r[1].contains('e') && r[1].split('e').next().unwrap().len() >= 18));
}

#[test]
fn jacobi_discriminant_crossings_sit_in_the_expected_windows() {
    let text = stdout(&run(
        "discriminant",
        &["--operator", "jacobi", "--lambda-min", "-9", "--lambda-max", "1", "--lambda-step", "0.001"],
    ));
    let points: Vec<(f64, f64)> =
        csv_rows(&text).1.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(points.len(), 10001);
    let crossings: Vec<f64> = points
        .windows(2)
        .filter(|w| (w[0].1 - 2.0).signum() != (w[1].1 - 2.0).signum())
        .map(|w| 0.5 * (w[0].0 + w[1].0))
        .collect();
    assert!(!crossings.is_empty());
    for x in crossings {
        assert!((-8.7..=-8.5).contains(&x) || (-3.1..=0.001).contains(&x), "crossing at {x}");
    }
}

#[test]
fn single_point_discriminant() {
    let text = stdout(&run(
        "discriminant",
        &["--operator", "laplace", "--lambda-min", "0.5", "--lambda-max", "0.5", "--format", "json"],
    ));
    let json: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 1);
    assert_eq!(json["multiplier"], 3);
}

#[test]
fn laplace_spectrum_json() {
    let report: SpectrumReport =
        serde_json::from_str(&stdout(&run("spectrum", &["--operator", "laplace", "--ceiling", "3.05"]))).unwrap();
    let mults: Vec<u64> = report.distinct(DISTINCT_TOL).iter().map(|d| d.multiplicity).collect();
    assert_eq!(mults, vec![1, 2, 5]);
    assert_eq!(report.schema_version, 1);
}

#[test]
fn jacobi_index_with_a_capped_thread_pool() {
    let mut args = vec!["spectrum"];
    args.extend(EXAMPLE);
    args.extend(["--operator", "jacobi", "--ceiling", "0"]);
    let out = Command::new(env!("CARGO_BIN_EXE_hillspec")).args(&args).env("HILLSPEC_THREADS", "2").output().unwrap();
    let report: SpectrumReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.count_below(-1e-7), 15);
}

#[test]
fn bad_thread_count_is_a_validation_error() {
    let mut args = vec!["profile"];
    args.extend(EXAMPLE);
    let out =
        Command::new(env!("CARGO_BIN_EXE_hillspec")).args(&args).env("HILLSPEC_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn laplace_spectrum_below_zero_is_empty() {
    let text = stdout(&run("spectrum", &["--operator", "laplace", "--ceiling", "-0.5", "--format", "csv"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[0], "eigenvalue");
    assert!(rows.is_empty());
}

fn checks(text: &str) -> Vec<Value> {
    serde_json::from_str::<Value>(text).unwrap()["checks"].as_array().unwrap().clone()
}

#[test]
fn verify_passes_on_the_example() {
    let list = checks(&stdout(&run("verify", &[])));
    for category in ["conservation", "wronskian", "oracle", "haupt", "otsuki", "index"] {
        assert!(list.iter().any(|c| c["category"] == category), "{category} missing");
    }
    assert!(list.iter().all(|c| c["status"] == "pass"), "{list:#?}");
}

#[test]
fn verify_skips_the_band_for_cmc_profiles() {
    let out = hillspec(&["verify", "--n", "3", "--H", "0.5", "--l", "1", "--m", "2", "--lambda-step", "2e-3"]);
    let list = checks(&stdout(&out));
    let band = list.iter().find(|c| c["category"] == "otsuki").unwrap();
    assert_eq!(band["status"], "skip");
    assert!(band["note"].as_str().unwrap().contains("H = 0"));
}

#[test]
fn loose_integration_fails_verification() {
    let out = hillspec(&["verify", "--n", "3", "--c", "2.8284471738153", "--tol-ode", "1e-2"]);
    assert_eq!(out.status.code(), Some(3));
    let list = checks(&String::from_utf8(out.stdout).unwrap());
    let conservation = list.iter().find(|c| c["category"] == "conservation").unwrap();
    assert_eq!(conservation["status"], "fail");
    assert!(conservation["measured"].as_f64().unwrap() > 1e-9);
}
