//! C ABI over the `distbeam` solver.
//!
//! Problems and solutions are opaque heap handles released with their `_free`
//! functions. Every fallible call returns a [`DbStatus`]; on failure the
//! message is kept per thread and read with [`db_last_error_message`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distbeam::beam::{BeamProblem, PiecewiseSolution};
use distbeam::closed_form::{self, InterfaceSystem};
use distbeam::error::Error;
use distbeam::{expr, singular_set};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbStatus {
    Ok = 0,
    /// Argument outside its domain, malformed expression, and similar.
    InvalidArgument = 1,
    /// The interface system is singular for these parameters.
    SingularParameter = 2,
    /// Quadrature or linear algebra failed.
    Numerical = 3,
    NullPointer = 4,
    /// A panic was caught at the boundary.
    Panic = 5,
}

/// Opaque problem handle.
pub struct DbProblem {
    inner: BeamProblem,
}

/// Opaque solution handle.
pub struct DbSolution {
    inner: PiecewiseSolution,
    system: InterfaceSystem,
}

/// One-sided values at the jump.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DbLimits {
    pub u_minus: f64,
    pub u_plus: f64,
    pub du_minus: f64,
    pub du_plus: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> DbStatus {
    match e {
        Error::SingularParameter { .. } => DbStatus::SingularParameter,
        e if e.is_validation() => DbStatus::InvalidArgument,
        _ => DbStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F>(f: F) -> DbStatus
where
    F: FnOnce() -> Result<(), (DbStatus, String)>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            DbStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (DbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DbStatus, String) {
    (DbStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length including the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn db_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Builds a problem on `[0, 1]` with stiffness `a` / `b` and force `p1` / `p2`
/// left / right of `x0`. `g_expr` is an expression in `x` (null means zero
/// forcing). `n_sing` singularities are read from `sing_loc` and `sing_exp`.
///
/// # Safety
/// `g_expr` must be null or a NUL-terminated string; `sing_loc` and
/// `sing_exp` must be valid for `n_sing` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn db_problem_new(
    a: f64,
    b: f64,
    x0: f64,
    p1: f64,
    p2: f64,
    g_expr: *const c_char,
    sing_loc: *const f64,
    sing_exp: *const f64,
    n_sing: usize,
    out: *mut *mut DbProblem,
) -> DbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = if g_expr.is_null() {
            "0".to_string()
        } else {
            CStr::from_ptr(g_expr)
                .to_str()
                .map_err(|_| (DbStatus::InvalidArgument, "g_expr is not UTF-8".to_string()))?
                .to_string()
        };
        let hints: Vec<(f64, f64)> = if n_sing == 0 {
            Vec::new()
        } else {
            if sing_loc.is_null() || sing_exp.is_null() {
                return Err(null("singularity array"));
            }
            let l = std::slice::from_raw_parts(sing_loc, n_sing);
            let e = std::slice::from_raw_parts(sing_exp, n_sing);
            l.iter().copied().zip(e.iter().copied()).collect()
        };
        let ast = expr::parse(&text).map_err(lib_err)?;
        let g = expr::to_forcing(&ast, &hints).map_err(lib_err)?;
        let inner = BeamProblem::with_two_forces(a, b, x0, p1, p2, g).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DbProblem { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`db_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn db_problem_free(p: *mut DbProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Solves the problem in closed form.
///
/// # Safety
/// `p` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_solve(p: *const DbProblem, out: *mut *mut DbSolution) -> DbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = p.as_ref().ok_or_else(|| null("problem"))?;
        let system = closed_form::interface_system(&p.inner).map_err(lib_err)?;
        let inner = closed_form::solve(&p.inner).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(DbSolution { inner, system }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`db_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn db_solution_free(s: *mut DbSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `u(x)`. `side < 0` evaluates the left branch, `side > 0` the right branch,
/// `side == 0` picks by position (mean of the limits at `x0`).
///
/// # Safety
/// `s` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_solution_eval(s: *const DbSolution, x: f64, side: i32, out: *mut f64) -> DbStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = match side {
            0 => s.inner.eval(x),
            k if k < 0 => s.inner.eval_minus(x),
            _ => s.inner.eval_plus(x),
        }
        .map_err(lib_err)?;
        *out = v;
        Ok(())
    })
}

/// # Safety
/// `s` must be a live solution handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn db_solution_limits(s: *const DbSolution, out: *mut DbLimits) -> DbStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let l = s.inner.limits();
        *out = DbLimits {
            u_minus: l.u_minus,
            u_plus: l.u_plus,
            du_minus: l.du_minus,
            du_plus: l.du_plus,
        };
        Ok(())
    })
}

/// Free homogeneous coefficients of the left and right branches.
///
/// # Safety
/// `s` must be a live solution handle; `c1` and `d1` writable.
#[no_mangle]
pub unsafe extern "C" fn db_solution_coefficients(s: *const DbSolution, c1: *mut f64, d1: *mut f64) -> DbStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if c1.is_null() || d1.is_null() {
            return Err(null("out"));
        }
        *c1 = s.inner.c1;
        *d1 = s.inner.d1;
        Ok(())
    })
}

/// `det H` and the scale used for the singularity test.
///
/// # Safety
/// `s` must be a live solution handle; `det` writable; `scale` may be null.
#[no_mangle]
pub unsafe extern "C" fn db_solution_det(s: *const DbSolution, det: *mut f64, scale: *mut f64) -> DbStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("solution"))?;
        if det.is_null() {
            return Err(null("det"));
        }
        *det = s.system.det;
        if !scale.is_null() {
            *scale = s.system.scale;
        }
        Ok(())
    })
}

/// First `count` candidate singular constant forces, written to `out_p`.
/// `out_z1` (may be null) receives 1 for roots between tangent poles and 0
/// for cosine zeros.
///
/// # Safety
/// `out_p` must be valid for `count` writes, `out_z1` null or likewise.
#[no_mangle]
pub unsafe extern "C" fn db_pl_sequence(
    a: f64,
    b: f64,
    x0: f64,
    count: usize,
    out_p: *mut f64,
    out_z1: *mut i32,
) -> DbStatus {
    guard(|| {
        if out_p.is_null() {
            return Err(null("out_p"));
        }
        let r = singular_set::pl_sequence(a, b, x0, count).map_err(lib_err)?;
        for (i, (&p, &prov)) in r.p_values.iter().zip(&r.provenance).enumerate() {
            *out_p.add(i) = p;
            if !out_z1.is_null() {
                *out_z1.add(i) = i32::from(prov == singular_set::Provenance::Z1);
            }
        }
        Ok(())
    })
}

/// `ν t sin s cos t + s sin t cos s`.
#[no_mangle]
pub extern "C" fn db_f_function(s: f64, t: f64, nu: f64) -> f64 {
    singular_set::f_function(s, t, nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Domain("x".into())), DbStatus::InvalidArgument);
        assert_eq!(
            status_of(&Error::SingularParameter { det: 0.0, scale: 1.0, ratio: 0.0 }),
            DbStatus::SingularParameter
        );
        assert_eq!(status_of(&Error::NonFinite { x: 0.0 }), DbStatus::Numerical);
    }

    #[test]
    fn panic_is_caught() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, DbStatus::Panic);
        let mut buf = [0 as c_char; 64];
        let n = unsafe { db_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }
}
