//! End-to-end tests of the `relcor` binary: dataset ingestion, exit codes,
//! determinism of generated artifacts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relcor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcor"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn coupled_dataset(n: usize) -> String {
    let mut text = String::from("x1,y1\n");
    for i in 0..n {
        text.push_str(&format!("{i},{i}\n"));
    }
    text
}

#[test]
fn dcor_reports_perfect_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", "x1,y1\n0,0\n1,1\n2,2\n");
    let out = relcor(&["dcor", &data], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let dcor_line = text.lines().find(|l| l.starts_with("dcor ")).unwrap();
    assert!(
        dcor_line.contains("1.0000000000000000e0"),
        "unexpected dcor line: {dcor_line}"
    );
}

#[test]
fn dcor_two_row_dcov() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", "x1,y1\n0,0\n1,2\n");
    let out = relcor(&["dcor", &data], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("dcov ")).unwrap();
    assert!(line.contains("5.0000000000000000e-1"), "{line}");
}

#[test]
fn dcor_path_out_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", &coupled_dataset(25));
    let path_file = dir.path().join("path.tsv");
    let out = relcor(
        &["dcor", &data, "--path-out", path_file.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(&path_file).unwrap();
    assert_eq!(text.lines().count(), 26); // header + 25 prefixes
    assert!(text.starts_with("m\tdcov_xy\tdcov_xx\tdcov_yy\tdcor\n"));
}

#[test]
fn malformed_row_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "bad.csv", "x1,y1\n0,0\n1,oops\n2,2\n");
    let out = relcor(&["dcor", &data], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains(":3:"), "no line number in: {err}");
}

#[test]
fn test_exit_codes_follow_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", &coupled_dataset(40));

    // perfectly coupled, delta = 0.5: reject => exit 3
    let out = relcor(&["test", &data, "--delta", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("decision              reject"), "{text}");
    assert!(text.contains("degenerate_normalizer true"), "{text}");

    // delta = 1.0: statistic <= 0, retain => exit 0
    let out = relcor(&["test", &data, "--delta", "1.0"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("decision              retain"));
}

#[test]
fn test_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", &coupled_dataset(40));
    let report = dir.path().join("report.json");
    let out = relcor(
        &[
            "test",
            &data,
            "--delta",
            "0.5",
            "--report-out",
            report.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["schema"], "relcor-test-report-v1");
    assert_eq!(doc["decision"], "reject");
    assert_eq!(doc["n"], 40);
    assert_eq!(doc["statistic"], "inf");
}

#[test]
fn missing_quantile_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", &coupled_dataset(40));

    // build a table that lacks p = 0.5
    let gamma = relcor_core::sequential::GammaMeasure::default();
    let table = relcor_core::pivotal::quantile_table(&gamma, 10_000, &[0.05, 0.95], 9).unwrap();
    let table_path = dir.path().join("small_table.tsv");
    relcor::tableio::write_table_file(&table, &table_path).unwrap();

    let out = relcor(
        &[
            "test",
            &data,
            "--delta",
            "0.1",
            "--alpha",
            "0.5",
            "--table",
            table_path.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no entry for p = 0.5"), "{}", stderr(&out));
}

#[test]
fn equivalence_direction_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    // weakly dependent, short series vs a huge threshold: equivalence test rejects
    let mut text = String::from("x1,y1\n");
    let mut state = 0.123_f64;
    for i in 0..200 {
        state = (state * 1.7 + 0.3).sin();
        text.push_str(&format!("{},{}\n", state, (i as f64 * 0.77).cos()));
    }
    let data = write(dir.path(), "data.csv", &text);
    let out = relcor(
        &["test", &data, "--delta", "0.9", "--direction", "equivalence"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    // equivalence is defined for dcor only
    let out = relcor(
        &[
            "test", &data, "--delta", "0.9", "--direction", "equivalence", "--measure", "dcov",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn quantiles_floor_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = relcor(
        &["quantiles", "--runs", "1000", "--out", "t.tsv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("below the floor"));

    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    for path in [&a, &b] {
        let out = relcor(
            &[
                "quantiles",
                "--runs",
                "10000",
                "--seed",
                "5",
                "--out",
                path.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("w_0.95"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulate_interior_rate_is_tiny() {
    let dir = tempfile::tempdir().unwrap();
    let out = relcor(
        &[
            "simulate",
            "--model",
            "var",
            "--rho",
            "0",
            "--a",
            "zero",
            "--delta-grid",
            "0.99",
            "--n-grid",
            "200",
            "--reps",
            "200",
            "--pop-reps",
            "10",
            "--pop-n",
            "200",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "delta\tn\trho\tcov_kind\tpopulation_dcor\trate\tse\treps\tmaster_seed"
    );
    let fields: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let rate: f64 = fields[5].parse().unwrap();
    assert!(rate <= 0.01, "interior rate {rate}");
}

#[test]
fn simulate_is_deterministic_and_rejects_unknown_model() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--model",
        "fourier",
        "--rho",
        "0.5",
        "--cov",
        "sparse",
        "--delta-grid",
        "0.1,0.6",
        "--n-grid",
        "60",
        "--reps",
        "25",
        "--pop-reps",
        "5",
        "--pop-n",
        "100",
        "--seed",
        "11",
    ];
    let a = relcor(&args, dir.path());
    let b = relcor(&args, dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));

    let out = relcor(
        &["simulate", "--model", "garch", "--delta-grid", "0.1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2)); // clap usage error
}
