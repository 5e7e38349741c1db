use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PAPER_G: &str = "-cos(11*x)/sqrt(abs(x-2/3))";

fn distbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distbeam"))
        .args(args)
        .env("DISTBEAM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn paper_solve(dir: &Path, tag: &str) -> (Value, String) {
    let json = dir.join(format!("{tag}.json"));
    let csv = dir.join(format!("{tag}.csv"));
    let out = distbeam(&[
        "solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "1", "--g", PAPER_G, "--sing", "0.6667:-0.5",
        "--seed", "7", "--json", path_str(&json), "--csv", path_str(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (read_json(&json), std::fs::read_to_string(&csv).unwrap())
}

#[test]
fn solve_paper_example() {
    let dir = tempfile::tempdir().unwrap();
    let (report, csv) = paper_solve(dir.path(), "a");
    assert_eq!(report["schema"], 1);
    assert!((report["jump_ratio"].as_f64().unwrap() - 2.0).abs() <= 1e-8);
    assert!(report["system"]["det"].as_f64().unwrap() != 0.0);
    assert!(report["weak_residual"].as_f64().unwrap() <= 1e-6);
    for key in ["h11", "h12", "h21", "h22", "z1", "z2"] {
        assert!(report["system"][key].is_number(), "{key}");
    }

    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,u,side"));
    let rows: Vec<(f64, f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect();
    let at_x0: Vec<_> = rows.iter().filter(|r| r.0 == 0.5).collect();
    assert_eq!(at_x0.len(), 2);
    assert_eq!(at_x0[0].2, "minus");
    assert_eq!(at_x0[1].2, "plus");
    assert!((at_x0[0].1 / at_x0[1].1 - 2.0).abs() <= 1e-8);
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (r1, c1) = paper_solve(dir.path(), "a");
    let (r2, c2) = paper_solve(dir.path(), "b");
    assert_eq!(c1, c2);
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    assert_eq!(r1, r2);
}

#[test]
fn residual_rechecks_stored_report() {
    let dir = tempfile::tempdir().unwrap();
    let (report, _) = paper_solve(dir.path(), "a");
    let out = distbeam(&["residual", "--report", path_str(&dir.path().join("a.json"))]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["weak_residual"].as_f64().unwrap() <= 1e-6);

    let mut tampered = report.clone();
    let c1 = tampered["coefficients"]["c1"].as_f64().unwrap();
    tampered["coefficients"]["c1"] = (c1 + 0.1).into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, tampered.to_string()).unwrap();
    let out = distbeam(&["residual", "--report", path_str(&bad)]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["weak_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn w_samples_written() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.csv");
    let out = distbeam(&[
        "solve", "--A", "2", "--B", "1", "--x0", "0.5", "--P", "-1", "--g", "1", "--w-csv", path_str(&w),
        "--w-samples", "11",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&w).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,w,dw");
    assert_eq!(lines.len(), 12);
    let w0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    let w1: f64 = lines[11].split(',').nth(1).unwrap().parse().unwrap();
    assert!(w0.abs() < 1e-14 && w1.abs() < 1e-12);
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn exit_codes() {
    let out = distbeam(&["solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "1", "--g", "cos 11x"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "Syntax");

    let out = distbeam(&["solve", "--A", "-1", "--B", "2", "--x0", "0.5", "--P", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = distbeam(&["solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "12.8154029692794", "--g", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["kind"], "SingularParameter");

    let out = distbeam(&["solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "1", "--g", "1/(x-0.3)"]);
    assert_eq!(out.status.code(), Some(4));

    let out = distbeam(&["residual", "--report", "/nonexistent/report.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_command() {
    let out = distbeam(&["spectrum", "--A", "1", "--B", "2", "--x0", "0.5", "--count", "4"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["schema"], 1);
    let p = r["spectrum"]["p_values"].as_array().unwrap();
    assert_eq!(p.len(), 4);
    assert!((p[1].as_f64().unwrap() - 12.8154029692794).abs() < 1e-9);
}

#[test]
fn trace_command() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = distbeam(&[
        "trace", "--A", "1", "--B", "1", "--x0", "0.75", "--grid", "32", "--window", "0,6,0,6", "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!r["curves"].as_array().unwrap().is_empty());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("curve,s,t,p1,p2\n"));
}

#[test]
fn regularize_command() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.csv");
    let out = distbeam(&[
        "regularize", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "1", "--g", PAPER_G, "--sing", "0.6667:-0.5",
        "--eps", "0.1,0.0333333,0.01", "--grid-csv", path_str(&grid),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["table"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(r["strictly_decreasing"], true);
    let text = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(text.lines().next(), Some("eps,x,u"));

    let out = distbeam(&["regularize", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "1", "--eps", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn product_check_command() {
    let out = distbeam(&["product-check", "--pair", "Hminus,delta"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let results = r["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for e in results {
        assert_eq!(e["verdict"]["verdict"], "converged");
        // H_-(x) = H(x0 - x) weights the left half of the mollifier mass
        assert!((e["coefficient"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    }
    let out = distbeam(&["product-check", "--pair", "Hplus,delta1", "--profile", "polynomial"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["results"][0]["verdict"]["verdict"], "diverged");

    let out = distbeam(&["product-check", "--pair", "Hminus"]);
    assert_eq!(out.status.code(), Some(2));
}
