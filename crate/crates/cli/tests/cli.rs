use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projspray"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_flatness_passes_with_header_first() {
    let o = run(&["verify", "--suite", "flatness"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["record"], "header");
    assert!(header["seed"].is_u64());
    assert!(header["tolerances"]["flatness"].is_f64());
    let reports: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!reports.is_empty());
    for r in &reports {
        assert_eq!(r["record"], "check");
        assert_eq!(r["pass"], true, "{r}");
    }
    let j3 = reports
        .iter()
        .find(|r| r["check"] == "flat" && r["entry"].as_str().unwrap().starts_with("J3"));
    assert!(j3.is_some(), "no flatness report for J3");
}

#[test]
fn verify_equivalence_passes() {
    let o = run(&["verify", "--suite", "equivalence"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_single_case() {
    let o = run(&["verify", "--suite", "symmetry", "--case", "C2+"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let checks: Vec<serde_json::Value> = text
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(checks
        .iter()
        .all(|r| r["entry"].as_str().unwrap().starts_with("C2+")));
    let fields = checks
        .iter()
        .filter(|r| r["check"].as_str().unwrap().starts_with("point_symmetry"))
        .count();
    assert_eq!(fields, 3);
}

#[test]
fn impossible_tolerance_fails_with_exit_1() {
    let o = run(&["verify", "--suite", "equivalence", "--tol", "1e-300"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 2);
    assert_eq!(
        code(&run(&["verify", "--suite", "symmetry", "--case", "nope"])),
        2
    );
    assert_eq!(code(&run(&["verify", "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["catalog", "show", "nope"])), 2);
    assert_eq!(code(&run(&["catalog", "show", "bk+"])), 2);
    assert_eq!(
        code(&run(&["trace", "nope", "0", "0", "1", "0", "1", "0.1"])),
        2
    );
    assert_eq!(
        code(&run(&["trace", "bk+", "0", "0", "1", "0", "1", "0.1"])),
        2
    );
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn trace_outside_domain_exits_3() {
    let o = run(&["trace", "c+", "-5", "0", "1", "0", "1", "0.01"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside"));
    assert!(o.stdout.is_empty());
}

#[test]
fn trace_flat_is_a_straight_line() {
    let o = run(&["trace", "flat", "0", "0", "1", "1", "1", "0.01"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,u,v"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert_eq!(r.len(), 5);
        assert!((r[1] - r[0]).abs() < 1e-12 && (r[2] - r[0]).abs() < 1e-12);
    }
    assert!((rows[100][0] - 1.0).abs() < 1e-12);
}

#[test]
fn trace_a_closes_and_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let o = run(&[
        "trace",
        "a",
        "0",
        "0",
        "1",
        "0",
        "6.283185307179586",
        "0.001",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6284);
    let last: Vec<f64> = rows
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(last[1].abs() < 1e-6 && last[2].abs() < 1e-6, "{last:?}");
}

#[test]
fn trace_bk_takes_parameter() {
    let o = run(&["trace", "bk-", "2", "0", "0", "1", "0", "0.5", "0.01"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 52);
}

#[test]
fn catalog_listing_and_show() {
    let o = run(&["catalog", "list"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().count() >= 20);
    let o = run(&["catalog", "show", "c-"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("√(e^(3x)dx² + e^x dy²)"));
    assert!(stdout(&o).contains("spray"));
    let o = run(&["catalog", "show", "bk+", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k=2"));
}

#[test]
fn verify_all_is_deterministic() {
    let a = run(&["verify"]);
    let b = run(&["verify"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "--seed", "7"]);
    let first: serde_json::Value =
        serde_json::from_str(stdout(&c).lines().next().unwrap()).unwrap();
    assert_eq!(first["seed"], 7);
}

#[test]
fn summary_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.txt");
    let o = run(&[
        "verify",
        "--suite",
        "metrizability",
        "--summary",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let (last, checks) = text
        .trim_end()
        .lines()
        .collect::<Vec<_>>()
        .split_last()
        .map(|(l, c)| (*l, c.to_vec()))
        .unwrap();
    assert!(checks.iter().all(|l| l.starts_with("PASS")));
    assert!(last.ends_with("0 failed"));
}
