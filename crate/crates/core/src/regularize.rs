//! Smoothed-coefficient approximations `(a_ε u)'' + P u = g` and their
//! convergence to the distributional solution away from `x0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamProblem, ForcingTerm, GridFunction, JumpConstant};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::quad::{integrate_fallible, Breakpoint, QuadConfig};

/// Odd quintic with `σ(±1) = ±1` and vanishing first and second derivatives at `±1`.
#[inline]
pub fn sigma(t: f64) -> f64 {
    let t2 = t * t;
    t * (15.0 - 10.0 * t2 + 3.0 * t2 * t2) / 8.0
}

#[inline]
fn sigma_d1(t: f64) -> f64 {
    let q = 1.0 - t * t;
    15.0 * q * q / 8.0
}

#[inline]
fn sigma_d2(t: f64) -> f64 {
    -7.5 * t * (1.0 - t * t)
}

/// `a_ε`: the jump coefficient with its jump replaced by a quintic ramp of half-width `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedCoefficient {
    pub base: JumpConstant,
    pub eps: f64,
}

impl SmoothedCoefficient {
    fn local(&self, x: f64) -> Option<f64> {
        let t = (x - self.base.x0) / self.eps;
        (t.abs() < 1.0).then_some(t)
    }

    fn half_jump(&self) -> f64 {
        0.5 * (self.base.right - self.base.left)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.local(x) {
            Some(t) => 0.5 * (self.base.left + self.base.right) + self.half_jump() * sigma(t),
            None if x < self.base.x0 => self.base.left,
            None => self.base.right,
        }
    }

    pub fn eval_d1(&self, x: f64) -> f64 {
        self.local(x)
            .map_or(0.0, |t| self.half_jump() * sigma_d1(t) / self.eps)
    }

    pub fn eval_d2(&self, x: f64) -> f64 {
        self.local(x)
            .map_or(0.0, |t| self.half_jump() * sigma_d2(t) / (self.eps * self.eps))
    }
}

/// Builds `a_ε`; requires `0 < eps < min(x0, 1 - x0)`.
pub fn smooth_coefficient(a: JumpConstant, eps: f64) -> Result<SmoothedCoefficient> {
    let room = a.x0.min(1.0 - a.x0);
    if !(eps > 0.0 && eps < room) {
        return Err(Error::Domain(format!(
            "eps = {eps} must lie in (0, {room}) so the ramp stays inside [0, 1]"
        )));
    }
    Ok(SmoothedCoefficient { base: a, eps })
}

/// Right-hand side at grid nodes: point values for smooth `g`, hat-weighted
/// cell averages `(1/h) ∫ g φ_i` when `g` has declared singularities.
fn load_vector(g: &ForcingTerm, nodes: impl Iterator<Item = f64>, h: f64) -> Result<Vec<f64>> {
    if g.is_zero() {
        return Ok(nodes.map(|_| 0.0).collect());
    }
    if g.is_smooth() {
        return Ok(nodes.map(|x| g.eval(x)).collect());
    }
    let bps = g.breakpoints();
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-10);
    let nodes: Vec<f64> = nodes.collect();
    nodes
        .par_iter()
        .map(|&x| hat_average(g, x, h, &bps, &cfg))
        .collect()
}

pub(crate) fn hat_average(g: &ForcingTerm, x: f64, h: f64, bps: &[Breakpoint], cfg: &QuadConfig) -> Result<f64> {
    let left = integrate_fallible(|t| Ok(g.eval(t) * (t - (x - h)) / h), x - h, x, bps, cfg)?;
    let right = integrate_fallible(|t| Ok(g.eval(t) * ((x + h) - t) / h), x, x + h, bps, cfg)?;
    Ok((left.value + right.value) / h)
}

/// Solves the regularized problem on the uniform grid `x_i = i/n`.
///
/// Discretizes `v'' + P v / a_ε = g` for `v = a_ε u` with central differences
/// and returns `u = v / a_ε` at all `n + 1` nodes.
pub fn solve_regularized(problem: &BeamProblem, eps: f64, n: usize) -> Result<GridFunction> {
    if n < 200 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 200")));
    }
    let ae = smooth_coefficient(problem.a, eps)?;
    let h = 1.0 / n as f64;
    let limit = eps / 20.0;
    if h > limit {
        return Err(Error::Resolution { h, limit });
    }
    let m = n - 1;
    let x = |i: usize| i as f64 * h;
    let h2 = h * h;
    let mut mat = BandMatrix::zeros(m, 1, 1);
    for k in 0..m {
        let xi = x(k + 1);
        mat.set(k, k, -2.0 + h2 * problem.p.at(xi) / ae.eval(xi));
        if k > 0 {
            mat.set(k, k - 1, 1.0);
        }
        if k + 1 < m {
            mat.set(k, k + 1, 1.0);
        }
    }
    let mut rhs = load_vector(&problem.g, (1..n).map(x), h)?;
    rhs.iter_mut().for_each(|r| *r *= h2);
    let v = mat.solve(&rhs)?;
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    u.extend(v.iter().enumerate().map(|(k, vk)| vk / ae.eval(x(k + 1))));
    u.push(0.0);
    GridFunction::new(0.0, h, u)
}

/// A finite union of closed intervals in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactSet {
    pub intervals: Vec<(f64, f64)>,
}

impl CompactSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter("compact set needs at least one interval".into()));
        }
        for &(lo, hi) in &intervals {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "interval [{lo}, {hi}] is not a closed subinterval of [0, 1]"
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// `[0, x0 - 0.1] ∪ [x0 + 0.1, 1]`, dropping empty pieces.
    pub fn default_for(x0: f64) -> Self {
        let mut iv = Vec::new();
        if x0 - 0.1 >= 0.0 {
            iv.push((0.0, x0 - 0.1));
        }
        if x0 + 0.1 <= 1.0 {
            iv.push((x0 + 0.1, 1.0));
        }
        Self { intervals: iv }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    /// Distance from `x` to the set.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Grid size used when none is given: `ceil(40/eps)` clipped to `[4000, 200000]`.
pub fn default_n(eps: f64) -> usize {
    ((40.0 / eps).ceil() as usize).clamp(4000, 200_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub n: usize,
    pub h: f64,
    /// `sup_K |u_ε - u|` over grid nodes in `K`; `None` when the row failed.
    pub sup_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub compact_set: CompactSet,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Sup errors of successful rows, in row order.
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.sup_error).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.iter().all(|r| r.sup_error.is_some())
            && self.errors().windows(2).all(|w| w[1] < w[0])
    }
}

/// Sup distance on `K` between regularized solutions and the closed-form
/// solution, one row per `eps` in the given order.
///
/// Rows run in parallel; a failing row records its error and the study
/// continues.
pub fn convergence_study<F>(
    problem: &BeamProblem,
    eps_list: &[f64],
    k: &CompactSet,
    n_rule: F,
) -> Result<ConvergenceTable>
where
    F: Fn(f64) -> usize + Sync,
{
    let x0 = problem.x0();
    let dist = k.distance_to(x0);
    for &eps in eps_list {
        // K is closed, so eps equal to the distance still keeps the ramp off K's interior
        if !(eps > 0.0 && eps <= dist * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!(
                "eps = {eps} must lie in (0, {dist}], the distance from K to x0"
            )));
        }
    }
    let exact = closed_form::solve(problem)?;
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let n = n_rule(eps);
            let h = 1.0 / n as f64;
            let run = || -> Result<f64> {
                let grid = solve_regularized(problem, eps, n)?;
                let pts: Vec<(f64, f64)> = grid.points().filter(|&(x, _)| k.contains(x)).collect();
                let errs: Result<Vec<f64>> = pts
                    .par_iter()
                    .map(|&(x, v)| exact.eval(x).map(|u| (u - v).abs()))
                    .collect();
                Ok(errs?.into_iter().fold(0.0, f64::max))
            };
            match run() {
                Ok(e) => ConvergenceRow {
                    eps,
                    n,
                    h,
                    sup_error: Some(e),
                    error: None,
                },
                Err(e) => ConvergenceRow {
                    eps,
                    n,
                    h,
                    sup_error: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ConvergenceTable {
        compact_set: k.clone(),
        rows,
    })
}
