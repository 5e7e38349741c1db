#![allow(clippy::excessive_precision)]

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use distbeam_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { db_last_error_message(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn problem(a: f64, b: f64, x0: f64, p: f64, g: &str, sing: &[(f64, f64)]) -> Result<*mut DbProblem, DbStatus> {
    let g = CString::new(g).unwrap();
    let loc: Vec<f64> = sing.iter().map(|s| s.0).collect();
    let exp: Vec<f64> = sing.iter().map(|s| s.1).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { db_problem_new(a, b, x0, p, p, g.as_ptr(), loc.as_ptr(), exp.as_ptr(), sing.len(), &mut out) };
    if st == DbStatus::Ok {
        Ok(out)
    } else {
        assert!(out.is_null());
        Err(st)
    }
}

#[test]
fn solve_and_query() {
    let p = problem(2.0, 1.0, 0.5, -1.0, "1", &[]).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { db_solve(p, &mut s) }, DbStatus::Ok);

    let mut lim = DbLimits::default();
    assert_eq!(unsafe { db_solution_limits(s, &mut lim) }, DbStatus::Ok);
    assert!((lim.u_minus - -0.057969503484099287255).abs() < 1e-14);
    assert!((lim.u_plus - -0.11593900696819857451).abs() < 1e-14);
    assert!((2.0 * lim.du_minus - lim.du_plus).abs() < 1e-14);

    let mut u = 0.0;
    assert_eq!(unsafe { db_solution_eval(s, 0.25, 0, &mut u) }, DbStatus::Ok);
    assert!((u - -0.043961790603007596446).abs() < 1e-14);
    assert_eq!(unsafe { db_solution_eval(s, 0.5, -1, &mut u) }, DbStatus::Ok);
    assert_eq!(u, lim.u_minus);
    assert_eq!(unsafe { db_solution_eval(s, 0.5, 1, &mut u) }, DbStatus::Ok);
    assert_eq!(u, lim.u_plus);
    assert_eq!(unsafe { db_solution_eval(s, 1.5, 0, &mut u) }, DbStatus::InvalidArgument);
    assert!(last_error().contains("outside"));

    let (mut c1, mut d1, mut det, mut scale) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(unsafe { db_solution_coefficients(s, &mut c1, &mut d1) }, DbStatus::Ok);
    assert!(c1.is_finite() && d1.is_finite());
    assert_eq!(unsafe { db_solution_det(s, &mut det, &mut scale) }, DbStatus::Ok);
    assert!(det < 0.0);
    assert!(scale >= 1.0);
    assert_eq!(unsafe { db_solution_det(s, &mut det, ptr::null_mut()) }, DbStatus::Ok);

    unsafe {
        db_solution_free(s);
        db_problem_free(p);
    }
}

#[test]
fn determinant_reference() {
    let p = problem(1.0, 2.0, 0.5, -1.0, "0", &[]).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { db_solve(p, &mut s) }, DbStatus::Ok);
    let mut det = 0.0;
    assert_eq!(unsafe { db_solution_det(s, &mut det, ptr::null_mut()) }, DbStatus::Ok);
    assert!((det - -12.960045598408366872).abs() < 1e-12);
    unsafe {
        db_solution_free(s);
        db_problem_free(p);
    }
}

#[test]
fn singular_forcing_with_hint() {
    let p = problem(1.0, 2.0, 0.5, 1.0, "-cos(11*x)/sqrt(abs(x-2/3))", &[(0.6667, -0.5)]).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { db_solve(p, &mut s) }, DbStatus::Ok);
    let mut lim = DbLimits::default();
    unsafe { db_solution_limits(s, &mut lim) };
    assert!((lim.u_minus / lim.u_plus - 2.0).abs() < 1e-8);
    unsafe {
        db_solution_free(s);
        db_problem_free(p);
    }
}

#[test]
fn error_statuses() {
    assert_eq!(problem(1.0, 2.0, 0.5, 1.0, "cos 11x", &[]).unwrap_err(), DbStatus::InvalidArgument);
    assert!(last_error().contains("syntax"));
    assert_eq!(problem(-1.0, 2.0, 0.5, 1.0, "1", &[]).unwrap_err(), DbStatus::InvalidArgument);
    assert_eq!(problem(1.0, 2.0, 0.5, 1.0, "1", &[(0.5, -1.0)]).unwrap_err(), DbStatus::InvalidArgument);

    let p = problem(1.0, 2.0, 0.5, 12.8154029692794, "1", &[]).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { db_solve(p, &mut s) }, DbStatus::SingularParameter);
    assert!(s.is_null());
    assert!(last_error().contains("singular"));
    unsafe { db_problem_free(p) };

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { db_solve(ptr::null(), &mut out) }, DbStatus::NullPointer);
    let mut pout = ptr::null_mut();
    let st = unsafe {
        db_problem_new(1.0, 1.0, 0.5, 1.0, 1.0, ptr::null(), ptr::null(), ptr::null(), 2, &mut pout)
    };
    assert_eq!(st, DbStatus::NullPointer);
    unsafe {
        db_problem_free(ptr::null_mut());
        db_solution_free(ptr::null_mut());
    }
}

#[test]
fn error_message_truncation() {
    let _ = problem(1.0, 2.0, 0.5, 1.0, "(", &[]);
    let full = unsafe { db_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 8);
    let mut buf = [1 as c_char; 8];
    assert_eq!(unsafe { db_last_error_message(buf.as_mut_ptr(), buf.len()) }, full);
    assert_eq!(buf[7], 0);
    let p = problem(1.0, 2.0, 0.5, -1.0, "0", &[]).unwrap();
    assert_eq!(unsafe { db_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { db_problem_free(p) };
}

#[test]
fn spectrum_and_f() {
    let mut p = [0.0; 4];
    let mut z1 = [0i32; 4];
    assert_eq!(unsafe { db_pl_sequence(1.0, 2.0, 0.5, 4, p.as_mut_ptr(), z1.as_mut_ptr()) }, DbStatus::Ok);
    assert!((p[0] - std::f64::consts::PI.powi(2)).abs() < 1e-12);
    assert!((p[1] - 12.8154029692794).abs() < 1e-9);
    assert_eq!(z1, [0, 1, 0, 1]);
    assert_eq!(unsafe { db_pl_sequence(1.0, 2.0, 0.5, 0, p.as_mut_ptr(), ptr::null_mut()) }, DbStatus::InvalidArgument);

    let (s, t, nu) = (1.3f64, 2.1f64, 6.0);
    let expect = nu * t * s.sin() * t.cos() + s * t.sin() * s.cos();
    assert!((db_f_function(s, t, nu) - expect).abs() < 1e-15);
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("distbeam.h");
    assert!(header.exists(), "header not generated");
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; header syntax check skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "distbeam.h"
int main(void) {
    DbProblem *p = 0;
    DbSolution *s = 0;
    DbLimits lim;
    double loc = 0.6667, ex = -0.5;
    if (db_problem_new(1, 2, 0.5, 1, 1, "-cos(11*x)/sqrt(abs(x-2/3))", &loc, &ex, 1, &p) != DB_STATUS_OK) return 1;
    if (db_solve(p, &s) == DB_STATUS_SINGULAR_PARAMETER) return 2;
    db_solution_limits(s, &lim);
    db_solution_free(s);
    db_problem_free(p);
    return lim.u_minus > 0 ? 0 : 3;
}
"#,
    )
    .unwrap();
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
