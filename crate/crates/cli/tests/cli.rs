use std::path::Path;
use std::process::{Command, Output};

fn bcd_pep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcd-pep"))
        .args(args)
        .env("BCD_PEP_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_single_block() {
    let o = bcd_pep(&["certify", "--N", "0", "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("PSD: yes"), "{text}");
    let t_star: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("t*="))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((t_star - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn certify_fails_with_negative_tolerance_as_usage_error() {
    let o = bcd_pep(&["certify", "--N", "0", "--p", "1", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn certify_writes_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.txt");
    let o = bcd_pep(&["certify", "--N", "1", "--p", "2", "--dump", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("1 2 4 "));
    assert_eq!(lines.len(), 3 + 6);
    assert_eq!(lines[2].split(' ').count(), 5);
}

#[test]
fn bound_values() {
    let o = bcd_pep(&["bound", "--N", "0", "--p", "2", "--Lc", "1", "--R", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("new=0.2\n"), "{text}");
    assert!(text.contains("beck(k=1)=7.2"), "{text}");
}

#[test]
fn export_sdpa_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.dat-s");
    let o = bcd_pep(&["export-sdpa", "--N", "1", "--p", "2", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('"')).take(3).collect();
    assert_eq!(body, ["5", "2", "6 -9"]);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["certify", "--N", "0"][..],
        &["bound", "--N", "x", "--p", "1"],
        &["nonsense"],
        &["certify", "--N", "0", "--p", "0"],
        &["export-sdpa", "--N", "0", "--p", "1"],
    ] {
        let o = bcd_pep(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let o = bcd_pep(&["bound", "--N", "x", "--p", "1"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--N"));
}

#[test]
fn run_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let o = bcd_pep(&["run", "--n", "6", "--p", "3", "--N", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("q,k,i,f_gap,grad_norm"));
    assert_eq!(text.lines().count(), 1 + 3 * 3 + 1);

    let o = bcd_pep(&["run", dir.path().join("missing.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn figure(dir: &Path) -> Output {
    bcd_pep(&[
        "figure1",
        "--n",
        "20",
        "--p",
        "2,5",
        "--N",
        "10",
        "--seed",
        "3,4",
        "--plot",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn figure1_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(figure(a.path()).status.code(), Some(0));
    assert_eq!(figure(b.path()).status.code(), Some(0));
    for name in ["figure1_p2.csv", "figure1_p5.csv", "summary.txt", "figure1.gp"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let csv = std::fs::read_to_string(a.path().join("figure1_p5.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "seed,k,gap,beck,new"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 11);
}

#[test]
fn figure1_rejects_indivisible_block_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = bcd_pep(&["figure1", "--n", "10", "--p", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn certify_with_zero_tolerance_reports_failure() {
    // λ_min of this certificate is a rounding-level negative number
    let o = bcd_pep(&["certify", "--N", "15", "--p", "8", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("PSD: no"));
}
