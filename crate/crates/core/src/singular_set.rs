//! Exceptional parameters where the interface problem loses uniqueness.
//!
//! Constant force `P > 0`: with `s = sqrt(P/A) x0` and `μ = sqrt(A/B) (1/x0 - 1)`
//! the determinant of `H` is proportional to
//! `sin s cos μs + sqrt(B/A) sin μs cos s`, so its zeros are the roots of
//! `h(s) = tan s + νμ tan μs` with `νμ = sqrt(B/A)` plus the points where both
//! cosines vanish.
//!
//! Two forces `P1, P2 > 0`: with `s = sqrt(P1/A) x0`, `t = sqrt(P2/B) (1 - x0)`
//! and `ν = x0 / (1 - x0)` the determinant is `(4AB/x0) f(s, t)` up to the sign
//! of `t`, where `f(s,t) = ν t sin s cos t + s sin t cos s`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::BeamProblem;
use crate::closed_form::{determinant_ratio, SINGULAR_THRESHOLD};
use crate::error::{Error, Result};

/// Residual threshold separating near-singular from unique parameters.
pub const NEAR_SINGULAR_THRESHOLD: f64 = 1e-4;

const POLE_TOL: f64 = 1e-12;
const RATIONAL_DEN_CAP: u64 = 1_000_000;

/// `tan s + νμ tan(μ s)`.
pub fn h_function(s: f64, mu: f64, nu: f64) -> Result<f64> {
    if !(s > 0.0 && mu > 0.0 && nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h requires s, mu, nu > 0, got ({s}, {mu}, {nu})"
        )));
    }
    if s.cos().abs() <= POLE_TOL || (mu * s).cos().abs() <= POLE_TOL {
        return Err(Error::PoleProximity { s, tol: POLE_TOL });
    }
    Ok(h_raw(s, mu, nu))
}

#[inline]
fn h_raw(s: f64, mu: f64, nu: f64) -> f64 {
    s.tan() + nu * mu * (mu * s).tan()
}

/// Where an entry of the spectrum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Root of `h` between consecutive tangent poles.
    Z1,
    /// Zero of one of the cosine factors.
    Z0,
}

/// Candidate singular values of a constant force, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub p_values: Vec<f64>,
    pub provenance: Vec<Provenance>,
    /// `|det H| / scale` at each value.
    pub residuals: Vec<f64>,
    /// For `Z0` entries: whether both cosine factors vanish (so `det H = 0`).
    /// Always `true` for `Z1` entries.
    pub both_cosines: Vec<bool>,
    /// `s`-intervals between poles where no sign change of `h` was found.
    pub skipped: Vec<(f64, f64)>,
    pub mu: f64,
    pub nu: f64,
}

impl SpectrumReport {
    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }

    /// Entries at which `det H` actually vanishes.
    pub fn singular_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.p_values
            .iter()
            .zip(&self.both_cosines)
            .filter(|(_, &b)| b)
            .map(|(&p, _)| p)
    }
}

/// Best rational approximation `p/q` of `x > 0` with `q <= max_den`, if it
/// matches `x` to a few ulps.
pub fn rational_approximation(x: f64, max_den: u64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    let tol = 8.0 * f64::EPSILON * x;
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0))?;
        let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0))?;
        if q2 > max_den {
            break;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, Copy)]
struct Pole {
    s: f64,
    p: f64,
    both: bool,
}

/// Merged poles of `tan s` and `tan μs` in increasing `s`.
struct Poles {
    a: f64,
    b: f64,
    x0: f64,
    mu: f64,
    ratio: Option<(u64, u64)>,
    k: u64,
    j: u64,
}

impl Poles {
    fn left(&self) -> (f64, f64) {
        let m = (2 * self.k + 1) as f64 * std::f64::consts::FRAC_PI_2;
        (m, self.a * (m / self.x0).powi(2))
    }

    fn right(&self) -> (f64, f64) {
        let m = (2 * self.j + 1) as f64 * std::f64::consts::FRAC_PI_2;
        (m / self.mu, self.b * (m / (1.0 - self.x0)).powi(2))
    }

    /// Whether the current left and right poles coincide exactly.
    fn coincide(&self) -> bool {
        match self.ratio {
            // (2k+1) p / q == 2j+1
            Some((p, q)) => {
                let l = (2 * self.k + 1) as u128 * p as u128;
                l.is_multiple_of(q as u128) && l / q as u128 == (2 * self.j + 1) as u128
            }
            None => false,
        }
    }
}

impl Iterator for Poles {
    type Item = Pole;

    fn next(&mut self) -> Option<Pole> {
        let (sl, pl) = self.left();
        let (sr, pr) = self.right();
        if self.coincide() {
            self.k += 1;
            self.j += 1;
            return Some(Pole { s: sl, p: pl, both: true });
        }
        if sl < sr {
            self.k += 1;
            Some(Pole { s: sl, p: pl, both: false })
        } else {
            self.j += 1;
            Some(Pole { s: sr, p: pr, both: false })
        }
    }
}

/// Bisection for the unique root of `h` on the open pole interval `(lo, hi)`,
/// where `h -> -∞` at `lo+` and `h -> +∞` at `hi-`. Runs to machine precision.
fn bisect_between_poles(lo: f64, hi: f64, mu: f64, nu: f64) -> Option<f64> {
    let width = hi - lo;
    let probe = 1e-9 * width;
    if !(h_raw(lo + probe, mu, nu) < 0.0 && h_raw(hi - probe, mu, nu) > 0.0) {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if h_raw(m, mu, nu) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// The first `count` members of `Z0 ∪ Z1` for constant force `P > 0`.
///
/// Poles of `h` are exactly the `Z0` values and each open interval between
/// consecutive poles holds exactly one root, so the merged sequence
/// alternates `Z0, Z1, Z0, ...` in increasing `P`.
pub fn pl_sequence(a: f64, b: f64, x0: f64, count: usize) -> Result<SpectrumReport> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stiffness values must be positive, got A = {a}, B = {b}"
        )));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidParameter(format!("x0 = {x0} must lie in (0, 1)")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mu = (a / b).sqrt() * (1.0 / x0 - 1.0);
    // chosen so that νμ = sqrt(B/A)
    let nu = (b / a) * x0 / (1.0 - x0);
    let ratio = rational_approximation(mu, RATIONAL_DEN_CAP);
    let poles = Poles {
        a,
        b,
        x0,
        mu,
        ratio,
        k: 0,
        j: 0,
    };

    let mut report = SpectrumReport {
        p_values: Vec::with_capacity(count),
        provenance: Vec::with_capacity(count),
        residuals: Vec::with_capacity(count),
        both_cosines: Vec::with_capacity(count),
        skipped: Vec::new(),
        mu,
        nu,
    };
    let push = |r: &mut SpectrumReport, p: f64, prov: Provenance, both: bool| {
        r.p_values.push(p);
        r.provenance.push(prov);
        r.residuals.push(determinant_ratio(a, b, x0, p, p));
        r.both_cosines.push(both);
    };

    let mut prev: Option<Pole> = None;
    for pole in poles {
        if let Some(pv) = prev {
            match bisect_between_poles(pv.s, pole.s, mu, nu) {
                Some(s) => {
                    push(&mut report, a * (s / x0).powi(2), Provenance::Z1, true);
                    if report.len() == count {
                        break;
                    }
                }
                None => report.skipped.push((pv.s, pole.s)),
            }
        }
        push(&mut report, pole.p, Provenance::Z0, pole.both);
        if report.len() == count {
            break;
        }
        prev = Some(pole);
    }
    Ok(report)
}

/// `ν t sin s cos t + s sin t cos s`.
pub fn f_function(s: f64, t: f64, nu: f64) -> f64 {
    nu * t * s.sin() * t.cos() + s * t.sin() * s.cos()
}

/// Mixed-sign analogue `ν t sin s cosh t + s sinh t cos s` (`P1 > 0 > P2`).
pub fn f_mixed(s: f64, t: f64, nu: f64) -> f64 {
    nu * t * s.sin() * t.cosh() + s * t.sinh() * s.cos()
}

/// `sin x / x`, or `sinh x / x` when `hyperbolic`.
fn sinc(x: f64, hyperbolic: bool) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        if hyperbolic {
            1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
        } else {
            1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
        }
    } else if hyperbolic {
        x.sinh() / x
    } else {
        x.sin() / x
    }
}

/// Which zero manifold to trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    /// `P1 > 0`, `P2 > 0`: zeros of [`f_function`].
    #[serde(rename = "M_prime")]
    MPrime,
    /// `P1 > 0 > P2`: zeros of [`f_mixed`], with `t = sqrt(-P2/B) (1 - x0)`.
    N,
}

impl Plane {
    pub fn f(&self, s: f64, t: f64, nu: f64) -> f64 {
        match self {
            Plane::MPrime => f_function(s, t, nu),
            Plane::N => f_mixed(s, t, nu),
        }
    }

    /// `f / (s t)`, which has the same zeros off the axes but does not vanish on them.
    pub fn reduced(&self, s: f64, t: f64, nu: f64) -> f64 {
        match self {
            Plane::MPrime => nu * sinc(s, false) * t.cos() + sinc(t, false) * s.cos(),
            Plane::N => nu * sinc(s, false) * t.cosh() + sinc(t, true) * s.cos(),
        }
    }

    /// Forces `(P1, P2)` corresponding to `(s, t)`.
    pub fn to_forces(&self, a: f64, b: f64, x0: f64, s: f64, t: f64) -> (f64, f64) {
        let p1 = a * (s / x0).powi(2);
        let p2 = b * (t / (1.0 - x0)).powi(2);
        match self {
            Plane::MPrime => (p1, p2),
            Plane::N => (p1, -p2),
        }
    }
}

/// Axis-aligned rectangle in the `(s, t)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub s_min: f64,
    pub s_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(s_min: f64, s_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let ok = [s_min, s_max, t_min, t_max].iter().all(|v| v.is_finite())
            && s_min < s_max
            && t_min < t_max;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "degenerate window [{s_min}, {s_max}] x [{t_min}, {t_max}]"
            )));
        }
        Ok(Self {
            s_min,
            s_max,
            t_min,
            t_max,
        })
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, side, 0.0, side)
    }
}

/// One vertex of a traced curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveVertex {
    pub s: f64,
    pub t: f64,
    pub p1: f64,
    pub p2: f64,
    /// `|f(s, t)|` (not the reduced function).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<CurveVertex>,
    pub closed: bool,
}

/// Traced zero set in a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurveSet {
    pub plane: Plane,
    pub nu: f64,
    pub window: Window,
    pub grid_n: usize,
    pub curves: Vec<Polyline>,
}

impl ZeroCurveSet {
    pub fn vertices(&self) -> impl Iterator<Item = &CurveVertex> + '_ {
        self.curves.iter().flat_map(|c| c.vertices.iter())
    }

    pub fn max_residual(&self) -> f64 {
        self.vertices().map(|v| v.residual).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    /// Between nodes `(i, j)` and `(i+1, j)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i, j+1)`.
    V(usize, usize),
}

fn bisect_edge<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo.min(hi) || m >= lo.max(hi) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_lo {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Traces the zero set of the reduced determinant function on a
/// `grid_n × grid_n` cell lattice.
///
/// Sign changes along lattice edges are refined by bisection to machine
/// precision and linked cell by cell; saddle cells are resolved by the sign
/// at the cell center. The coordinate axes, on which `f` vanishes trivially,
/// are not reported.
pub fn trace_zero_set(
    plane: Plane,
    a: f64,
    b: f64,
    x0: f64,
    window: Window,
    grid_n: usize,
) -> Result<ZeroCurveSet> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "stiffness values must be positive, got A = {a}, B = {b}"
        )));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidParameter(format!("x0 = {x0} must lie in (0, 1)")));
    }
    if grid_n < 16 {
        return Err(Error::InvalidParameter(format!("grid_n = {grid_n} must be at least 16")));
    }
    if window.s_min < 0.0 || window.t_min < 0.0 {
        return Err(Error::InvalidParameter(
            "window must lie in the quadrant s >= 0, t >= 0".into(),
        ));
    }
    let nu = x0 / (1.0 - x0);
    let n = grid_n;
    let hs = (window.s_max - window.s_min) / n as f64;
    let ht = (window.t_max - window.t_min) / n as f64;
    let sx = |i: usize| if i == n { window.s_max } else { window.s_min + i as f64 * hs };
    let ty = |j: usize| if j == n { window.t_max } else { window.t_min + j as f64 * ht };
    let g = |s: f64, t: f64| plane.reduced(s, t, nu);

    // values[j * (n+1) + i] = g(s_i, t_j)
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|j| (0..=n).map(move |i| (i, j)))
        .map(|(i, j)| g(sx(i), ty(j)))
        .collect();
    let val = |i: usize, j: usize| values[j * (n + 1) + i];
    let neg = |v: f64| v < 0.0;

    let mut crossings: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    let mut crossing = |key: EdgeKey| -> Option<(f64, f64)> {
        if let Some(&p) = crossings.get(&key) {
            return Some(p);
        }
        let p = match key {
            EdgeKey::H(i, j) => {
                let (v0, v1) = (val(i, j), val(i + 1, j));
                if neg(v0) == neg(v1) {
                    return None;
                }
                let t = ty(j);
                (bisect_edge(|s| g(s, t), sx(i), sx(i + 1), v0), t)
            }
            EdgeKey::V(i, j) => {
                let (v0, v1) = (val(i, j), val(i, j + 1));
                if neg(v0) == neg(v1) {
                    return None;
                }
                let s = sx(i);
                (s, bisect_edge(|t| g(s, t), ty(j), ty(j + 1), v0))
            }
        };
        crossings.insert(key, p);
        Some(p)
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            // counter-clockwise: bottom, right, top, left
            let edges = [
                EdgeKey::H(i, j),
                EdgeKey::V(i + 1, j),
                EdgeKey::H(i, j + 1),
                EdgeKey::V(i, j),
            ];
            let hits: Vec<EdgeKey> = edges.into_iter().filter(|&e| crossing(e).is_some()).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    // corners: (i,j) bottom-left, (i+1,j+1) top-right
                    let center = g(0.5 * (sx(i) + sx(i + 1)), 0.5 * (ty(j) + ty(j + 1)));
                    if neg(center) == neg(val(i, j)) {
                        // bottom-left region connects through the center
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[0], edges[3]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let curves = link_segments(&segments)
        .into_iter()
        .map(|(keys, closed)| Polyline {
            vertices: keys
                .into_iter()
                .map(|k| {
                    let (s, t) = crossings[&k];
                    let (p1, p2) = plane.to_forces(a, b, x0, s, t);
                    CurveVertex {
                        s,
                        t,
                        p1,
                        p2,
                        residual: plane.f(s, t, nu).abs(),
                    }
                })
                .collect(),
            closed,
        })
        .collect();

    Ok(ZeroCurveSet {
        plane,
        nu,
        window,
        grid_n,
        curves,
    })
}

/// Chains segments sharing endpoints into polylines, open ones first.
fn link_segments(segments: &[(EdgeKey, EdgeKey)]) -> Vec<(Vec<EdgeKey>, bool)> {
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (idx, &(p, q)) in segments.iter().enumerate() {
        adj.entry(p).or_default().push(idx);
        adj.entry(q).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&idx) = adj[&cur].iter().find(|&&i| !used[i]) {
            used[idx] = true;
            let (p, q) = segments[idx];
            cur = if p == cur { q } else { p };
            chain.push(cur);
        }
        chain
    };

    let mut ends: Vec<EdgeKey> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    ends.sort_by_key(edge_order);
    for e in ends {
        if adj[&e].iter().all(|&i| used[i]) {
            continue;
        }
        out.push((walk(e, &mut used), false));
    }
    let mut rest: Vec<EdgeKey> = adj.keys().copied().collect();
    rest.sort_by_key(edge_order);
    for e in rest {
        if adj[&e].iter().all(|&i| used[i]) {
            continue;
        }
        out.push((walk(e, &mut used), true));
    }
    out
}

fn edge_order(e: &EdgeKey) -> (usize, usize, u8) {
    match *e {
        EdgeKey::H(i, j) => (j, i, 0),
        EdgeKey::V(i, j) => (j, i, 1),
    }
}

/// Outcome of [`classify_parameters`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Unique,
    Singular { residual: f64 },
    NearSingular { distance: f64 },
}

/// Uniqueness verdict for the problem's parameters, from `|det H| / scale`.
pub fn classify_parameters(problem: &BeamProblem) -> Classification {
    let (p1, p2) = (problem.p.left, problem.p.right);
    if p1 < 0.0 && p2 < 0.0 {
        return Classification::Unique;
    }
    let r = determinant_ratio(problem.a.left, problem.a.right, problem.x0(), p1, p2);
    if r <= SINGULAR_THRESHOLD {
        Classification::Singular { residual: r }
    } else if r <= NEAR_SINGULAR_THRESHOLD {
        Classification::NearSingular { distance: r }
    } else {
        Classification::Unique
    }
}
