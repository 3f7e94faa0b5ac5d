use std::io::Write;
use std::process::{Command, Output};

fn volterra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volterra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn list_problems_names_the_registry() {
    let out = volterra(&["list-problems"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["capillary", "holder-cusp", "log", "smooth-exp"] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
}

#[test]
fn converge_csv_is_byte_identical_across_runs() {
    let args = [
        "converge",
        "--problem",
        "smooth-exp",
        "--N",
        "8,16,32",
        "--format",
        "csv",
    ];
    let first = volterra(&args);
    let second = volterra(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "CSV bytes must not drift");
    let text = stdout(&first);
    assert!(text.starts_with("method,problem,N,h_or_degree,err_sup,err_l2,iters,seconds\n"));
    assert_eq!(text.lines().count(), 4);
    for line in text.lines().skip(1) {
        assert!(line.ends_with(','), "seconds field stays empty: {line}");
    }
}

#[test]
fn converge_json_echoes_config_and_version() {
    let out = volterra(&[
        "converge",
        "--problem",
        "smooth-exp",
        "--N",
        "8,16,32",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(body["problem"], "smooth-exp");
    assert_eq!(body["config"]["resolutions"], serde_json::json!([8, 16, 32]));
    assert!(body["version"].as_str().is_some_and(|v| !v.is_empty()));
    assert!(body["rows"][0]["seconds"].as_f64().is_some());
    assert!(body["observed_order"].as_f64().is_some());
}

#[test]
fn dyadic_range_expands_to_powers_of_two() {
    let out = volterra(&[
        "converge",
        "--problem",
        "smooth-exp",
        "--N-range",
        "dyadic:4:32",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let ns: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(ns, ["4", "8", "16", "32"]);
}

#[test]
fn solve_prints_one_value_per_node() {
    let out = volterra(&["solve", "--problem", "smooth-exp", "--N", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("t,x\n"));
    assert_eq!(text.lines().count(), 10);
    assert!(stderr(&out).contains("converged"));
}

#[test]
fn spectral_solve_emits_json_with_residual() {
    let out = volterra(&[
        "solve",
        "--problem",
        "smooth-exp",
        "--method",
        "spectral",
        "--N",
        "12",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(body["N"], 12);
    assert_eq!(body["t"].as_array().unwrap().len(), 13);
    assert!(body["max_residual"].as_f64().unwrap() <= 1e-13);
    assert_eq!(body["clamped"], false);
}

#[test]
fn config_file_defines_a_solvable_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quadratic.json");
    let mut file = std::fs::File::create(&path).unwrap();
    write!(
        file,
        r#"{{
            "name": "quadratic",
            "G": "1",
            "f": "x",
            "g": "manufactured",
            "exact": "t^2"
        }}"#
    )
    .unwrap();
    let out = volterra(&[
        "converge",
        "--config",
        path.to_str().unwrap(),
        "--method",
        "spectral",
        "--N",
        "4,6",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    // Degree 4 already reproduces the quadratic to solver accuracy.
    let err: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-11, "quadratic should be exact, err = {err}");
}

#[test]
fn config_file_meta_feeds_the_existence_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("capillary-like.json");
    let mut file = std::fs::File::create(&path).unwrap();
    write!(
        file,
        r#"{{
            "name": "capillary-like",
            "G": "1 - exp(-(t - s))",
            "f": "1 - sqrt(2*x)",
            "g": "0",
            "floor": 0.0,
            "meta": {{
                "M_G": 1.0, "K_G": 1.0, "M_f": 1.0,
                "rho": "s", "phi": "sqrt(2*x)"
            }}
        }}"#
    )
    .unwrap();
    let out = volterra(&[
        "existence",
        "--config",
        path.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--beta",
        "1",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("satisfiable"), "{text}");
    assert!(text.contains("7.34"), "expected the known radius: {text}");
}

#[test]
fn existence_reports_the_reduced_threshold() {
    let out = volterra(&[
        "existence",
        "--problem",
        "capillary",
        "--alpha",
        "0.75",
        "--beta",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // (1/2)(1/3)^(3/4) = 0.2193...
    assert!(text.contains("2.193"), "{text}");
}

#[test]
fn interp_bound_table_stays_under_the_bound() {
    let out = volterra(&[
        "interp-bound",
        "--function",
        "sqrt(t)",
        "--alpha",
        "0.5",
        "--h",
        "0.125,0.0625",
        "--samples",
        "4096",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let ratio: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(ratio <= 1.05, "{line}");
    }
}

#[test]
fn unknown_problem_exits_with_a_usage_error() {
    let out = volterra(&["solve", "--problem", "does-not-exist"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("does-not-exist"));
}

#[test]
fn starved_converge_run_exits_nonzero_with_partial_rows() {
    let out = volterra(&[
        "converge",
        "--problem",
        "smooth-exp",
        "--N",
        "8,16",
        "--max-iter",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3, "failed rows are kept: {text}");
    assert!(stderr(&out).contains("FAILED"));
}

#[test]
fn malformed_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "bad", "G": "1 +", "f": "x", "g": "0"}"#).unwrap();
    let out = volterra(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kernel"));
}

#[test]
fn output_file_receives_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = volterra(&[
        "converge",
        "--problem",
        "smooth-exp",
        "--N",
        "8,16,32",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("method,problem,N,"));
    assert_eq!(written.lines().count(), 4);
}
