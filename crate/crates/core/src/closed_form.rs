//! Closed-form construction of the unique solution.
//!
//! On each side of the jump the equation reduces to a constant-coefficient
//! ODE `coef·u'' + force·u = g`. Homogeneous parts are fixed by the boundary
//! conditions up to one free coefficient per side (`c1` left, `d1` right); the
//! interface conditions `A u(x0-) = B u(x0+)`, `A u'(x0-) = B u'(x0+)` give the
//! 2×2 system `H (c1, d1)ᵀ = z`.
//!
//! Basis normalisation: left `L(x) = 2 sinh(ωx)` / `2 sin(ωx)` / `2x`, right
//! `R(x) = 2 e^ω sinh(ω(x-1))` / `2 sin(ω(x-1))` / `2(x-1)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamProblem, Branch, ForcingTerm, OneSidedLimits, PiecewiseSolution};
use crate::bump::TestFunction;
use crate::error::{Error, Result};
use crate::quad::{integrate_fallible, Breakpoint, QuadConfig};

/// Default threshold on `|det H| / scale` below which solving is refused.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy)]
struct Kernel {
    branch: Branch,
    omega: f64,
}

impl Kernel {
    fn new(coef: f64, force: f64) -> Self {
        Self {
            branch: Branch::of(force),
            omega: (force.abs() / coef).sqrt(),
        }
    }

    /// Impulse response `K(r)` of `u'' + (force/coef) u` with `K(0)=0, K'(0)=1`.
    #[inline]
    fn value(&self, r: f64) -> f64 {
        let w = self.omega;
        match self.branch {
            Branch::Hyperbolic => (w * r).sinh() / w,
            Branch::Trigonometric => (w * r).sin() / w,
            Branch::Polynomial => r,
        }
    }

    #[inline]
    fn derivative(&self, r: f64) -> f64 {
        let w = self.omega;
        match self.branch {
            Branch::Hyperbolic => (w * r).cosh(),
            Branch::Trigonometric => (w * r).cos(),
            Branch::Polynomial => 1.0,
        }
    }
}

/// Homogeneous solutions `(φ1, φ2, φ1', φ2')` of `coef·u'' + force·u = 0`.
///
/// `{sinh ωx, cosh ωx}` for `force < 0`, `{sin ωx, cos ωx}` for `force > 0`,
/// `{x, 1}` for `force = 0`, with `ω = sqrt(|force| / coef)`.
pub fn homogeneous_basis(coef: f64, force: f64, x: f64) -> Result<(f64, f64, f64, f64)> {
    if !(coef > 0.0) {
        return Err(Error::Domain(format!("coefficient {coef} must be positive")));
    }
    let k = Kernel::new(coef, force);
    let w = k.omega;
    Ok(match k.branch {
        Branch::Hyperbolic => {
            let (s, c) = ((w * x).sinh(), (w * x).cosh());
            (s, c, w * c, w * s)
        }
        Branch::Trigonometric => {
            let (s, c) = (w * x).sin_cos();
            (s, c, w * c, -w * s)
        }
        Branch::Polynomial => (x, 1.0, 1.0, 0.0),
    })
}

/// Left homogeneous solution vanishing at 0 and its derivative.
pub(crate) fn left_basis(coef: f64, force: f64, x: f64) -> (f64, f64) {
    let k = Kernel::new(coef, force);
    let w = k.omega;
    match k.branch {
        Branch::Hyperbolic => (2.0 * (w * x).sinh(), 2.0 * w * (w * x).cosh()),
        Branch::Trigonometric => (2.0 * (w * x).sin(), 2.0 * w * (w * x).cos()),
        Branch::Polynomial => (2.0 * x, 2.0),
    }
}

/// Right homogeneous solution vanishing at 1 and its derivative.
pub(crate) fn right_basis(coef: f64, force: f64, x: f64) -> (f64, f64) {
    let k = Kernel::new(coef, force);
    let w = k.omega;
    let r = x - 1.0;
    match k.branch {
        Branch::Hyperbolic => {
            let e = 2.0 * w.exp();
            (e * (w * r).sinh(), e * w * (w * r).cosh())
        }
        Branch::Trigonometric => (2.0 * (w * r).sin(), 2.0 * w * (w * r).cos()),
        Branch::Polynomial => (2.0 * r, 2.0),
    }
}

fn particular_cfg() -> QuadConfig {
    QuadConfig::default().with_abs_tol(1e-11).with_rel_tol(1e-13)
}

fn base_point(side: Side) -> f64 {
    match side {
        Side::Minus => 0.0,
        Side::Plus => 1.0,
    }
}

fn check_particular_args(coef: f64, x: f64) -> Result<()> {
    if !(coef > 0.0) {
        return Err(Error::Domain(format!("coefficient {coef} must be positive")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Duhamel particular solution value `(1/coef) ∫_base^x K(x-τ) g(τ) dτ`.
pub fn particular_value(side: Side, g: &ForcingTerm, coef: f64, force: f64, x: f64) -> Result<f64> {
    check_particular_args(coef, x)?;
    if g.is_zero() {
        return Ok(0.0);
    }
    let k = Kernel::new(coef, force);
    let bps = g.breakpoints();
    let v = integrate_fallible(
        |t| Ok(k.value(x - t) * g.eval(t)),
        base_point(side),
        x,
        &bps,
        &particular_cfg(),
    )?;
    Ok(v.value / coef)
}

/// Duhamel particular solution and its derivative, anchored at 0 (`Minus`)
/// or 1 (`Plus`) so that `p(base) = p'(base) = 0`.
///
/// The derivative uses the differentiated kernel `K'(x-τ)`.
pub fn particular_solution(
    side: Side,
    g: &ForcingTerm,
    coef: f64,
    force: f64,
    x: f64,
) -> Result<(f64, f64)> {
    check_particular_args(coef, x)?;
    if g.is_zero() {
        return Ok((0.0, 0.0));
    }
    let k = Kernel::new(coef, force);
    let bps = g.breakpoints();
    let base = base_point(side);
    let cfg = particular_cfg();
    let v = integrate_fallible(|t| Ok(k.value(x - t) * g.eval(t)), base, x, &bps, &cfg)?;
    let d = integrate_fallible(|t| Ok(k.derivative(x - t) * g.eval(t)), base, x, &bps, &cfg)?;
    Ok((v.value / coef, d.value / coef))
}

/// The 2×2 interface system `H (c1, d1)ᵀ = z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSystem {
    pub h11: f64,
    pub h12: f64,
    pub h21: f64,
    pub h22: f64,
    pub z1: f64,
    pub z2: f64,
    pub det: f64,
    pub scale: f64,
}

impl InterfaceSystem {
    fn from_parts(h: [f64; 4], z: [f64; 2]) -> Self {
        let [h11, h12, h21, h22] = h;
        let det = h11 * h22 - h12 * h21;
        let scale = (h11 * h22).abs().max((h12 * h21).abs()).max(1.0);
        Self {
            h11,
            h12,
            h21,
            h22,
            z1: z[0],
            z2: z[1],
            det,
            scale,
        }
    }

    /// `|det H| / scale`, the conditioning measure used for singularity tests.
    pub fn ratio(&self) -> f64 {
        self.det.abs() / self.scale
    }

    /// Cramer solution `(c1, d1)`.
    pub fn solve(&self) -> (f64, f64) {
        let c1 = (self.z1 * self.h22 - self.h12 * self.z2) / self.det;
        let d1 = (self.h11 * self.z2 - self.h21 * self.z1) / self.det;
        (c1, d1)
    }
}

/// Entries of `H` only; they do not depend on the forcing.
pub fn interface_matrix(a: f64, b: f64, x0: f64, p1: f64, p2: f64) -> [f64; 4] {
    let (l, dl) = left_basis(a, p1, x0);
    let (r, dr) = right_basis(b, p2, x0);
    [a * l, -b * r, a * dl, -b * dr]
}

/// Assembles `H` and `z` for the problem.
pub fn interface_system(problem: &BeamProblem) -> Result<InterfaceSystem> {
    let (a, b, x0) = (problem.a.left, problem.a.right, problem.x0());
    let (p1, p2) = (problem.p.left, problem.p.right);
    let h = interface_matrix(a, b, x0, p1, p2);
    let (pm, dpm) = particular_solution(Side::Minus, &problem.g, a, p1, x0)?;
    let (pp, dpp) = particular_solution(Side::Plus, &problem.g, b, p2, x0)?;
    Ok(InterfaceSystem::from_parts(h, [b * pp - a * pm, b * dpp - a * dpm]))
}

/// `|det H| / scale` without touching the forcing.
pub fn determinant_ratio(a: f64, b: f64, x0: f64, p1: f64, p2: f64) -> f64 {
    InterfaceSystem::from_parts(interface_matrix(a, b, x0, p1, p2), [0.0, 0.0]).ratio()
}

/// Solves the problem with the default singular threshold.
pub fn solve(problem: &BeamProblem) -> Result<PiecewiseSolution> {
    solve_with_threshold(problem, SINGULAR_THRESHOLD)
}

/// Solves the problem, refusing parameters with `|det H| / scale <= threshold`.
pub fn solve_with_threshold(problem: &BeamProblem, threshold: f64) -> Result<PiecewiseSolution> {
    let (a, b, x0) = (problem.a.left, problem.a.right, problem.x0());
    let (p1, p2) = (problem.p.left, problem.p.right);
    let h = interface_matrix(a, b, x0, p1, p2);
    let (pm, dpm) = particular_solution(Side::Minus, &problem.g, a, p1, x0)?;
    let (pp, dpp) = particular_solution(Side::Plus, &problem.g, b, p2, x0)?;
    let sys = InterfaceSystem::from_parts(h, [b * pp - a * pm, b * dpp - a * dpm]);
    if !(sys.ratio() > threshold) {
        return Err(Error::SingularParameter {
            det: sys.det,
            scale: sys.scale,
            ratio: sys.ratio(),
        });
    }
    let (c1, d1) = sys.solve();
    let (l, dl) = left_basis(a, p1, x0);
    let (r, dr) = right_basis(b, p2, x0);
    Ok(PiecewiseSolution {
        problem: problem.clone(),
        branch_minus: Branch::of(p1),
        branch_plus: Branch::of(p2),
        c1,
        d1,
        limits: OneSidedLimits {
            u_minus: c1 * l + pm,
            u_plus: d1 * r + pp,
            du_minus: c1 * dl + dpm,
            du_plus: d1 * dr + dpp,
        },
    })
}

/// The standard test-function family for [`weak_residual`].
///
/// Two bumps straddle `x0`, one straddles each interior singularity of `g`,
/// and the rest are spread over `(0, 1)`. A seed jitters the spread centers.
pub fn test_family(problem: &BeamProblem, count: usize, seed: Option<u64>) -> Vec<TestFunction> {
    const RADIUS: f64 = 0.08;
    let fit = |c: f64, r: f64| -> TestFunction {
        let c = c.clamp(0.02, 0.98);
        TestFunction::new(c, r.min(0.98 * c).min(0.98 * (1.0 - c)))
    };
    let x0 = problem.x0();
    let mut out = vec![fit(x0 - 0.25 * RADIUS, RADIUS), fit(x0 + 0.3 * RADIUS, RADIUS)];
    for s in problem.g.singularities() {
        if s.location > 0.0 && s.location < 1.0 {
            out.push(fit(s.location + 0.2 * RADIUS, RADIUS));
        }
    }
    let rest = count.saturating_sub(out.len());
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    for j in 0..rest {
        let mut c = (j as f64 + 0.5) / rest as f64;
        if let Some(rng) = rng.as_mut() {
            c += rng.gen_range(-0.4..0.4) / rest as f64;
        }
        out.push(fit(c, RADIUS));
    }
    out.truncate(count.max(2));
    out
}

fn residual_cfg() -> QuadConfig {
    QuadConfig::default().with_abs_tol(1e-12).with_rel_tol(1e-12)
}

/// `|∫ a u ψ'' dx + ∫ (P u - g) ψ dx|` for one test function.
pub fn weak_residual_single(s: &PiecewiseSolution, problem: &BeamProblem, psi: &TestFunction) -> Result<f64> {
    let x0 = problem.x0();
    let (lo, hi) = psi.support();
    let (lo, hi) = (lo.max(0.0), hi.min(1.0));
    if lo >= hi {
        return Ok(0.0);
    }
    let integrand = |x: f64| -> Result<f64> {
        let (u, a, p) = if x < x0 {
            (s.eval_minus(x)?, problem.a.left, problem.p.left)
        } else {
            (s.eval_plus(x)?, problem.a.right, problem.p.right)
        };
        let gx = if problem.g.is_zero() { 0.0 } else { problem.g.eval(x) };
        Ok(a * u * psi.d2(x) + (p * u - gx) * psi.value(x))
    };
    let bps = problem.breakpoints();
    let v = integrate_fallible(integrand, lo, hi, &bps, &residual_cfg())?;
    Ok(v.value.abs())
}

/// Maximum weak residual over a family of test functions supported in `[0, 1]`.
pub fn weak_residual(s: &PiecewiseSolution, problem: &BeamProblem, tests: &[TestFunction]) -> Result<f64> {
    for t in tests {
        let (lo, hi) = t.support();
        if lo < 0.0 || hi > 1.0 || t.radius <= 0.0 {
            return Err(Error::Precondition(format!(
                "test function support [{lo}, {hi}] not inside [0, 1]"
            )));
        }
    }
    let values: Vec<Result<f64>> = tests
        .par_iter()
        .map(|t| weak_residual_single(s, problem, t))
        .collect();
    values
        .into_iter()
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

/// `w` with `w'' = u`, `w(0) = w(1) = 0`, together with the jumps of `w` and `w'` at `x0`.
#[derive(Debug, Clone)]
pub struct Displacement {
    solution: PiecewiseSolution,
    /// `w'(0)`
    slope0: f64,
    /// `-w'(1)`
    slope1: f64,
    pub jump_delta: f64,
    pub jump_theta: f64,
}

fn disp_cfg() -> QuadConfig {
    QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-13)
}

impl Displacement {
    fn u(&self, t: f64) -> Result<f64> {
        if t < self.solution.x0() {
            self.solution.eval_minus(t)
        } else {
            self.solution.eval_plus(t)
        }
    }

    fn bps(&self) -> Vec<Breakpoint> {
        self.solution.problem().breakpoints()
    }

    /// `w(x) = ∫_0^x (x - t) u(t) dt + w'(0) x`.
    pub fn w(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let i = integrate_fallible(|t| Ok((x - t) * self.u(t)?), 0.0, x, &self.bps(), &disp_cfg())?;
        Ok(i.value + self.slope0 * x)
    }

    /// `w'(x) = ∫_0^x u(t) dt + w'(0)`.
    pub fn w_prime(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let i = integrate_fallible(|t| self.u(t), 0.0, x, &self.bps(), &disp_cfg())?;
        Ok(i.value + self.slope0)
    }

    /// Right-anchored representation `w(x) = ∫_x^1 (t - x) u(t) dt - w'(1)(1 - x)`.
    pub fn w_from_right(&self, x: f64) -> Result<f64> {
        let i = integrate_fallible(|t| Ok((t - x) * self.u(t)?), x, 1.0, &self.bps(), &disp_cfg())?;
        Ok(i.value + self.slope1 * (1.0 - x))
    }

    pub fn w_prime_from_right(&self, x: f64) -> Result<f64> {
        let i = integrate_fallible(|t| self.u(t), x, 1.0, &self.bps(), &disp_cfg())?;
        Ok(-i.value - self.slope1)
    }
}

/// Integrates `w'' = u` with `w(0) = w(1) = 0` and measures the jumps of `w`
/// and `w'` at `x0` from the left- and right-anchored representations.
pub fn recover_displacement(s: &PiecewiseSolution) -> Result<Displacement> {
    let x0 = s.x0();
    let bps = s.problem().breakpoints();
    let cfg = disp_cfg();
    let u = |t: f64| if t < x0 { s.eval_minus(t) } else { s.eval_plus(t) };
    let m0 = integrate_fallible(u, 0.0, 1.0, &bps, &cfg)?.value;
    let m1 = integrate_fallible(|t| Ok(t * u(t)?), 0.0, 1.0, &bps, &cfg)?.value;
    let mut d = Displacement {
        solution: s.clone(),
        slope0: -(m0 - m1),
        slope1: -m1,
        jump_delta: 0.0,
        jump_theta: 0.0,
    };
    d.jump_delta = d.w_from_right(x0)? - d.w(x0)?;
    d.jump_theta = d.w_prime_from_right(x0)? - d.w_prime(x0)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::ForcingTerm;

    #[test]
    fn basis_at_origin_hyperbolic() {
        let (p1, p2, d1, d2) = homogeneous_basis(1.0, -1.0, 0.0).unwrap();
        assert_eq!((p1, p2, d1, d2), (0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn basis_trigonometric_quarter_period() {
        let x = std::f64::consts::FRAC_PI_2;
        let (p1, p2, d1, d2) = homogeneous_basis(1.0, 1.0, x).unwrap();
        assert!((p1 - 1.0).abs() < 1e-15);
        assert!(p2.abs() < 1e-15);
        assert!(d1.abs() < 1e-15);
        assert!((d2 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_scaled_coefficient() {
        // ω = 1/2 at x = 2
        let (p1, p2, d1, d2) = homogeneous_basis(4.0, -1.0, 2.0).unwrap();
        let (s, c) = (1f64.sinh(), 1f64.cosh());
        assert!((p1 - s).abs() < 1e-15);
        assert!((p2 - c).abs() < 1e-15);
        assert!((d1 - c / 2.0).abs() < 1e-15);
        assert!((d2 - s / 2.0).abs() < 1e-15);
    }

    #[test]
    fn basis_polynomial_and_domain() {
        assert_eq!(homogeneous_basis(2.0, 0.0, 0.3).unwrap(), (0.3, 1.0, 1.0, 0.0));
        assert!(matches!(homogeneous_basis(0.0, 1.0, 0.3), Err(Error::Domain(_))));
        assert!(matches!(homogeneous_basis(-1.0, 1.0, 0.3), Err(Error::Domain(_))));
    }

    #[test]
    fn particular_constant_forcing_hyperbolic() {
        // u'' - u = 1, u(0) = u'(0) = 0  =>  u = cosh x - 1
        let g = ForcingTerm::constant(1.0);
        for &x in &[0.0, 0.1, 0.37, 0.5] {
            let (v, d) = particular_solution(Side::Minus, &g, 1.0, -1.0, x).unwrap();
            assert!((v - (x.cosh() - 1.0)).abs() < 1e-14, "x={x}");
            assert!((d - x.sinh()).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn particular_zero_forcing() {
        let g = ForcingTerm::zero();
        assert_eq!(particular_solution(Side::Plus, &g, 3.0, 2.0, 0.7).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn particular_singular_forcing_plus_side() {
        // reference values from mpmath at 40 digits (B = 2, P = 1)
        let g = ForcingTerm::cosine_over_root();
        let cases = [
            (0.9, 0.0016030897137383131973, -0.047752578778961969932),
            (0.6, 0.040741972986115480213, 0.032078311752628388285),
            (0.5, 0.029626704911700615492, 0.17387740141182793541),
        ];
        for (x, v_ref, d_ref) in cases {
            let (v, d) = particular_solution(Side::Plus, &g, 2.0, 1.0, x).unwrap();
            assert!((v - v_ref).abs() < 1e-11, "x={x}: {v} vs {v_ref}");
            assert!((d - d_ref).abs() < 1e-11, "x={x}: {d} vs {d_ref}");
        }
    }

    #[test]
    fn particular_rejects_bad_arguments() {
        let g = ForcingTerm::constant(1.0);
        assert!(particular_solution(Side::Minus, &g, 0.0, 1.0, 0.3).is_err());
        assert!(particular_solution(Side::Minus, &g, 1.0, 1.0, 1.3).is_err());
    }

    #[test]
    fn det_matches_printed_formula_for_negative_force() {
        // 4AB e^{w_B}(-w_B sinh(w_A x0) cosh(w_B(x0-1)) + w_A sinh(w_B(x0-1)) cosh(w_A x0))
        // evaluated with mpmath for A=1, B=2, x0=1/2, P=-1
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, -1.0, ForcingTerm::zero()).unwrap();
        let sys = interface_system(&pr).unwrap();
        assert!(sys.det < 0.0);
        assert!((sys.det - (-12.960045598408366872)).abs() < 1e-12, "{}", sys.det);
        assert_eq!((sys.z1, sys.z2), (0.0, 0.0));
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, -1.0, ForcingTerm::zero()).unwrap();
        let s = solve(&pr).unwrap();
        assert_eq!((s.c1, s.d1), (0.0, 0.0));
        let l = s.limits();
        assert_eq!((l.u_minus, l.u_plus, l.du_minus, l.du_plus), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.eval(0.3).unwrap(), 0.0);
    }

    #[test]
    fn exact_solution_constant_forcing() {
        // sympy reference: A=2, B=1, P=-1, g=1, x0=1/2
        let pr = BeamProblem::with_constant_force(2.0, 1.0, 0.5, -1.0, ForcingTerm::constant(1.0)).unwrap();
        let s = solve(&pr).unwrap();
        let l = s.limits();
        assert!((l.u_minus + 0.057969503484099287255).abs() < 1e-13);
        assert!((l.u_plus + 0.11593900696819857451).abs() < 1e-13);
        assert!((l.du_minus - 0.0029839737552968181367).abs() < 1e-13);
        assert!((l.du_plus - 0.0059679475105936362735).abs() < 1e-13);
        assert!((s.eval(0.25).unwrap() + 0.043961790603007596446).abs() < 1e-13);
        assert!((s.eval(0.75).unwrap() + 0.086660333647215351587).abs() < 1e-13);
        assert!(s.eval(0.0).unwrap().abs() < 1e-15);
        assert!(s.eval(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn singular_parameter_rejected() {
        // first Z1 root for A=1, B=2, x0=1/2 (mpmath): P = 12.8154029692794
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, 12.8154029692794, ForcingTerm::constant(1.0)).unwrap();
        match solve(&pr) {
            Err(Error::SingularParameter { ratio, .. }) => assert!(ratio <= SINGULAR_THRESHOLD),
            other => panic!("expected singular parameter, got {other:?}"),
        }
    }

    #[test]
    fn residual_of_trivial_solution() {
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, -1.0, ForcingTerm::zero()).unwrap();
        let s = solve(&pr).unwrap();
        let tests = test_family(&pr, 12, None);
        assert_eq!(weak_residual(&s, &pr, &tests).unwrap(), 0.0);
    }

    #[test]
    fn family_layout() {
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, 1.0, ForcingTerm::cosine_over_root()).unwrap();
        let fam = test_family(&pr, 12, None);
        assert_eq!(fam.len(), 12);
        for t in &fam {
            let (lo, hi) = t.support();
            assert!(lo >= 0.0 && hi <= 1.0);
        }
        let straddle = |x: f64| fam.iter().filter(|t| t.support().0 < x && t.support().1 > x).count();
        assert!(straddle(0.5) >= 2);
        assert!(straddle(2.0 / 3.0) >= 1);
        assert_eq!(fam, test_family(&pr, 12, None));
        assert_ne!(test_family(&pr, 12, Some(7)), fam);
        assert_eq!(test_family(&pr, 12, Some(7)), test_family(&pr, 12, Some(7)));
    }

    #[test]
    fn residual_rejects_test_outside_domain() {
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, -1.0, ForcingTerm::constant(1.0)).unwrap();
        let s = solve(&pr).unwrap();
        let bad = [TestFunction::new(0.05, 0.1)];
        assert!(matches!(weak_residual(&s, &pr, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn displacement_of_zero_solution() {
        let pr = BeamProblem::with_constant_force(1.0, 2.0, 0.5, -1.0, ForcingTerm::zero()).unwrap();
        let d = recover_displacement(&solve(&pr).unwrap()).unwrap();
        assert_eq!(d.jump_delta, 0.0);
        assert_eq!(d.jump_theta, 0.0);
        assert_eq!(d.w(0.4).unwrap(), 0.0);
    }
}
