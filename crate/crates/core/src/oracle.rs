//! Brute-force finite-difference reference solver.
//!
//! Each side of `x0` gets its own uniform grid, so `x0` is a node of both and
//! carries two unknowns (left and right values). The two interface rows
//! impose `A u_L = B u_R` and `A u_L' = B u_R'` with one-sided 3-point
//! derivative stencils.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamProblem, GridFunction};
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::quad::QuadConfig;
use crate::regularize::hat_average;

/// Largest accepted target spacing.
pub const MAX_H: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// `u` on `[0, x0]`; the last value is `u(x0-)`.
    pub left: GridFunction,
    /// `u` on `[x0, 1]`; the first value is `u(x0+)`.
    pub right: GridFunction,
    /// Observed order from solves at `4h`, `2h`, `h` on nested grids; NaN when
    /// the differences are at round-off level.
    pub order_estimate: f64,
    /// `|A u_L - B u_R|` after the solve.
    pub interface_residual: f64,
}

impl OracleSolution {
    pub fn x0(&self) -> f64 {
        self.right.start
    }

    /// `(x, u, side)` for every node, with `x0` listed once per side.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, &'static str)> + '_ {
        let l = self.left.points().map(|(x, u)| (x, u, "minus"));
        let r = self.right.points().map(|(x, u)| (x, u, "plus"));
        l.chain(r)
    }
}

struct Layout {
    ml: usize,
    mr: usize,
}

impl Layout {
    fn hl(&self, x0: f64) -> f64 {
        x0 / self.ml as f64
    }

    fn hr(&self, x0: f64) -> f64 {
        (1.0 - x0) / self.mr as f64
    }
}

fn load(problem: &BeamProblem, xs: &[f64], h: f64) -> Result<Vec<f64>> {
    let g = &problem.g;
    if g.is_zero() {
        return Ok(vec![0.0; xs.len()]);
    }
    if g.is_smooth() {
        return Ok(xs.iter().map(|&x| g.eval(x)).collect());
    }
    let bps = g.breakpoints();
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-10);
    xs.par_iter().map(|&x| hat_average(g, x, h, &bps, &cfg)).collect()
}

/// Left values, right values and the interface residual.
type LayoutRun = (Vec<f64>, Vec<f64>, f64);

fn solve_layout(problem: &BeamProblem, lay: &Layout) -> Result<LayoutRun> {
    let x0 = problem.x0();
    let (a, b) = (problem.a.left, problem.a.right);
    let (p1, p2) = (problem.p.left, problem.p.right);
    let (ml, mr) = (lay.ml, lay.mr);
    let (hl, hr) = (lay.hl(x0), lay.hr(x0));
    let n = ml + mr + 2;
    let r0 = ml + 1; // index of u_R at x0
    let mut m = BandMatrix::zeros(n, 3, 2);
    let mut rhs = vec![0.0; n];

    let xl: Vec<f64> = (1..ml).map(|i| i as f64 * hl).collect();
    let xr: Vec<f64> = (1..mr).map(|j| x0 + j as f64 * hr).collect();
    let gl = load(problem, &xl, hl)?;
    let gr = load(problem, &xr, hr)?;

    m.set(0, 0, 1.0);
    for i in 1..ml {
        m.set(i, i - 1, a);
        m.set(i, i, -2.0 * a + p1 * hl * hl);
        m.set(i, i + 1, a);
        rhs[i] = gl[i - 1] * hl * hl;
    }
    // A u_L(x0) - B u_R(x0) = 0
    m.set(ml, ml, a);
    m.set(ml, r0, -b);
    // A (3u_m - 4u_{m-1} + u_{m-2}) / (2hl) - B (-3v_0 + 4v_1 - v_2) / (2hr) = 0, scaled by hl
    let rho = hl / hr;
    m.set(r0, ml - 2, 0.5 * a);
    m.set(r0, ml - 1, -2.0 * a);
    m.set(r0, ml, 1.5 * a);
    m.set(r0, r0, 1.5 * b * rho);
    m.set(r0, r0 + 1, -2.0 * b * rho);
    m.set(r0, r0 + 2, 0.5 * b * rho);
    for j in 1..mr {
        let k = r0 + j;
        m.set(k, k - 1, b);
        m.set(k, k, -2.0 * b + p2 * hr * hr);
        m.set(k, k + 1, b);
        rhs[k] = gr[j - 1] * hr * hr;
    }
    m.set(n - 1, n - 1, 1.0);

    let u = m.solve(&rhs)?;
    let residual = (a * u[ml] - b * u[r0]).abs();
    Ok((u[..=ml].to_vec(), u[r0..].to_vec(), residual))
}

/// `max_i |u[i * stride_u] - v[i * stride_v]|` over the common coarse nodes.
fn max_diff(u: &[f64], su: usize, v: &[f64], sv: usize) -> f64 {
    (0..=(u.len() - 1) / su)
        .map(|i| (u[i * su] - v[i * sv]).abs())
        .fold(0.0, f64::max)
}

/// Solves the interface problem by finite differences with target spacing `h`.
///
/// Per-side node counts are multiples of 4 (`4·round(x0/(4h))` on the left,
/// likewise on the right) so that the `h`, `2h` and `4h` grids used for the
/// order estimate nest exactly; the realised spacings are in the returned
/// grid functions.
pub fn fd_interface_solve(problem: &BeamProblem, h: f64) -> Result<OracleSolution> {
    if !(h > 0.0 && h <= MAX_H) {
        return Err(Error::InvalidParameter(format!("h = {h} must lie in (0, {MAX_H}]")));
    }
    let x0 = problem.x0();
    let cl = ((x0 / (4.0 * h)).round() as usize).max(1);
    let cr = (((1.0 - x0) / (4.0 * h)).round() as usize).max(1);
    let layouts = [
        Layout { ml: 4 * cl, mr: 4 * cr },
        Layout { ml: 2 * cl, mr: 2 * cr },
        Layout { ml: cl, mr: cr },
    ];
    let runs: Vec<Result<LayoutRun>> = layouts
        .par_iter()
        .map(|lay| {
            if lay.ml < 2 || lay.mr < 2 {
                return Err(Error::InvalidParameter("grid too coarse for 3-point stencils".into()));
            }
            solve_layout(problem, lay)
        })
        .collect();
    let mut runs = runs.into_iter();
    let (l1, r1, residual) = runs.next().unwrap()?;
    let coarse: Vec<_> = runs.collect();

    let order_estimate = match (&coarse[0], &coarse[1]) {
        (Ok((l2, r2, _)), Ok((l4, r4, _))) => {
            let e42 = max_diff(l4, 1, l2, 2).max(max_diff(r4, 1, r2, 2));
            let e21 = max_diff(l2, 2, &l1, 4).max(max_diff(r2, 2, &r1, 4));
            let mag = l1.iter().chain(&r1).fold(0.0f64, |m, v| m.max(v.abs()));
            if e21 <= 1e-13 * mag || e42 <= 1e-13 * mag {
                f64::NAN
            } else {
                (e42 / e21).log2()
            }
        }
        _ => f64::NAN,
    };

    let (hl, hr) = (layouts[0].hl(x0), layouts[0].hr(x0));
    Ok(OracleSolution {
        left: GridFunction::new(0.0, hl, l1)?,
        right: GridFunction::new(x0, hr, r1)?,
        order_estimate,
        interface_residual: residual,
    })
}
