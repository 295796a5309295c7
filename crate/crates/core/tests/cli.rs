use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn alphag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alphag"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eval_euclidean_grid() {
    let m = fixture("euclidean.metric");
    let out = alphag(&[
        "eval",
        "--metric",
        path_str(&m),
        "--point",
        "0,0,0,0",
        "--d",
        "3,4,0,0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["real"], -7.0);
    assert_eq!(v["mu"], 0.0);
    assert_eq!(v["class"], "EUCLIDEAN_PATTERN");
    assert_eq!(v["expanded"], v["grouped"]);
}

#[test]
fn eval_picks_up_time_component_in_mu() {
    let m = fixture("alpha_g44.metric");
    let out = alphag(&[
        "eval",
        "--metric",
        path_str(&m),
        "--point",
        "0,0,0,0",
        "--d",
        "0,0,0,2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["mu"], -4.0);
    assert_eq!(v["class"], "GENERAL_ALPHA");
}

#[test]
fn zero_metric_evaluates_to_zero() {
    let m = fixture("zero.metric");
    let out = alphag(&[
        "eval",
        "--metric",
        path_str(&m),
        "--point",
        "1,2,3,4",
        "--d",
        "1,1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for k in ["real", "i", "mu", "imu"] {
        assert_eq!(v[k], 0.0);
    }
}

#[test]
fn malformed_metric_reports_line_and_column() {
    let m = fixture("malformed.metric");
    let out = alphag(&["classify", "--metric", path_str(&m)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error[parse]:"), "{err}");
    assert!(err.contains("line 3"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_is_an_io_error() {
    let out = alphag(&["classify", "--metric", "/nonexistent/nothing.metric"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]:"));
}

#[test]
fn geodesic_writes_path_and_length_reads_it_back() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("path.csv");
    let m = fixture("euclidean.metric");
    let out = alphag(&[
        "geodesic",
        "--metric",
        path_str(&m),
        "--from",
        "0,0,0,0",
        "--to",
        "1,1,0,0",
        "--segments",
        "8",
        "--path-out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!(v["converged"].as_bool().unwrap());
    let l = v["real_length"].as_f64().unwrap();
    assert!((l - 2f64.sqrt()).abs() < 1e-6);

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,y,z,t\n"));
    assert_eq!(text.lines().count(), 10);

    let out = alphag(&[
        "length",
        "--metric",
        path_str(&m),
        "--path-in",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let back = json(&out)["real_length"].as_f64().unwrap();
    assert!((back - l).abs() < 1e-12, "{back} vs {l}");

    let out = alphag(&[
        "length",
        "--metric",
        path_str(&m),
        "--path-in",
        path_str(&csv),
        "--mode",
        "alpha",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(json(&out)["length"].is_object());
}

#[test]
fn general_alpha_metric_has_no_riemannian_geodesic() {
    let m = fixture("alpha_g44.metric");
    let out = alphag(&[
        "geodesic",
        "--metric",
        path_str(&m),
        "--from",
        "0,0,0,0",
        "--to",
        "1,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.starts_with("error[not-riemannian]:") && err.contains("g44"),
        "{err}"
    );
}

#[test]
fn iteration_cap_exits_four_with_result() {
    let m = fixture("sphere.metric");
    let out = alphag(&[
        "geodesic",
        "--metric",
        path_str(&m),
        "--from",
        "0.7854,0",
        "--to",
        "0.7854,1.5708",
        "--segments",
        "16",
        "--max-iter",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert_eq!(json(&out)["converged"], false);
    assert!(stderr(&out).starts_with("error[no-convergence]:"));
}

#[test]
fn selftest_passes_and_detects_broken_table() {
    let out = alphag(&["selftest", "--cases", "200"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    let out = alphag(&["selftest", "--cases", "200", "--fault", "i-squared-one"]);
    assert_eq!(out.status.code(), Some(5));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn outputs_are_deterministic() {
    let m = fixture("sphere.metric");
    let runs: Vec<Output> = (0..2)
        .map(|_| {
            alphag(&[
                "geodesic",
                "--metric",
                path_str(&m),
                "--from",
                "0.6,0",
                "--to",
                "0.9,1.0",
                "--segments",
                "8",
            ])
        })
        .collect();
    assert_eq!(runs[0].status.code(), Some(0), "{}", stderr(&runs[0]));
    assert_eq!(runs[0].stdout, runs[1].stdout);

    let a = alphag(&["selftest", "--seed", "7", "--cases", "100"]);
    let b = alphag(&["selftest", "--seed", "7", "--cases", "100"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_arguments_are_usage_errors() {
    let out = alphag(&["eval", "--metric"]);
    assert_eq!(out.status.code(), Some(1));
    let out = alphag(&["eval", "--metric", "x", "--point", "1,2,three", "--d", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
