//! Domain types for the beam interface problem `(a u)'' + P u = g` on `[0, 1]`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{Error, Result};
use crate::quad::Breakpoint;

/// A piecewise-constant coefficient with a single jump at `x0`.
///
/// Used both for the bending stiffness `a` (values `A`, `B`) and for the
/// axial force `P` (values `P1`, `P2`, possibly equal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpConstant {
    pub left: f64,
    pub right: f64,
    pub x0: f64,
}

impl JumpConstant {
    pub fn new(left: f64, right: f64, x0: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient values must be finite, got ({left}, {right})"
            )));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "jump location x0 = {x0} must lie in (0, 1)"
            )));
        }
        Ok(Self { left, right, x0 })
    }

    /// A stiffness coefficient: both values positive and distinct.
    pub fn stiffness(a: f64, b: f64, x0: f64) -> Result<Self> {
        let c = Self::new(a, b, x0)?;
        c.check_stiffness()?;
        Ok(c)
    }

    /// A constant force `P` carried with the jump location of the stiffness.
    pub fn constant(value: f64, x0: f64) -> Result<Self> {
        Self::new(value, value, x0)
    }

    fn check_stiffness(&self) -> Result<()> {
        if !(self.left > 0.0 && self.right > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stiffness values must be positive, got A = {}, B = {}",
                self.left, self.right
            )));
        }
        if self.left == self.right {
            return Err(Error::InvalidParameter(
                "stiffness must actually jump (A != B)".into(),
            ));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.left == self.right
    }

    /// Value at `x`; the midpoint of the two values at exactly `x0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_jump(self, x)
    }

    /// Value without the domain check, for hot loops over known-valid points.
    #[inline]
    pub(crate) fn at(&self, x: f64) -> f64 {
        if x < self.x0 {
            self.left
        } else if x > self.x0 {
            self.right
        } else {
            0.5 * (self.left + self.right)
        }
    }

    /// Mirror image under `x -> 1 - x`.
    pub fn reflected(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            x0: 1.0 - self.x0,
        }
    }
}

/// Evaluates a jump constant; `x` must lie in `[0, 1]`.
pub fn eval_jump(c: &JumpConstant, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(c.at(x))
}

/// A declared integrable singularity `|x - location|^exponent` of the forcing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: f64,
    pub exponent: f64,
}

impl Singularity {
    pub fn new(location: f64, exponent: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&location) {
            return Err(Error::InvalidParameter(format!(
                "singularity location {location} outside [0, 1]"
            )));
        }
        if !(exponent > -1.0 && exponent < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "singularity exponent {exponent} must lie in (-1, 0) for an integrable forcing"
            )));
        }
        Ok(Self { location, exponent })
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Right-hand side `g`, evaluable away from its declared singularities.
#[derive(Clone)]
pub struct ForcingTerm {
    eval: Arc<ScalarFn>,
    singularities: Vec<Singularity>,
    label: String,
    zero: bool,
}

impl fmt::Debug for ForcingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForcingTerm")
            .field("label", &self.label)
            .field("singularities", &self.singularities)
            .finish()
    }
}

impl ForcingTerm {
    pub fn new<F>(eval: F, singularities: Vec<Singularity>, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for s in &singularities {
            Singularity::new(s.location, s.exponent)?;
        }
        Ok(Self {
            eval: Arc::new(eval),
            singularities,
            label: label.into(),
            zero: false,
        })
    }

    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_| 0.0),
            singularities: Vec::new(),
            label: "0".into(),
            zero: true,
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            eval: Arc::new(move |_| c),
            singularities: Vec::new(),
            label: format!("{c}"),
            zero: false,
        }
    }

    /// `g(x) = -cos(11 x) / sqrt(|x - 2/3|)`, in L¹ but not L².
    pub fn cosine_over_root() -> Self {
        let sigma = 2.0 / 3.0;
        Self {
            eval: Arc::new(move |x: f64| -(11.0 * x).cos() / (x - sigma).abs().sqrt()),
            singularities: vec![Singularity {
                location: sigma,
                exponent: -0.5,
            }],
            label: "-cos(11*x)/sqrt(abs(x-2/3))".into(),
            zero: false,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True only for forcings built as identically zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_smooth(&self) -> bool {
        self.singularities.is_empty()
    }

    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        self.singularities
            .iter()
            .map(|s| Breakpoint::singular(s.location, s.exponent))
            .collect()
    }

    /// `λ g`.
    pub fn scaled(&self, lambda: f64) -> Self {
        if lambda == 0.0 || self.zero {
            return Self::zero();
        }
        let inner = Arc::clone(&self.eval);
        Self {
            eval: Arc::new(move |x| lambda * inner(x)),
            singularities: self.singularities.clone(),
            label: format!("{lambda}*({})", self.label),
            zero: false,
        }
    }

    /// `x -> g(1 - x)`.
    pub fn reflected(&self) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            eval: Arc::new(move |x| inner(1.0 - x)),
            singularities: self
                .singularities
                .iter()
                .map(|s| Singularity {
                    location: 1.0 - s.location,
                    exponent: s.exponent,
                })
                .collect(),
            label: format!("reflect({})", self.label),
            zero: self.zero,
        }
    }
}

/// The full boundary-value problem: stiffness, axial force and forcing.
#[derive(Debug, Clone)]
pub struct BeamProblem {
    pub a: JumpConstant,
    pub p: JumpConstant,
    pub g: ForcingTerm,
}

impl BeamProblem {
    pub fn new(a: JumpConstant, p: JumpConstant, g: ForcingTerm) -> Result<Self> {
        a.check_stiffness()?;
        if a.x0 != p.x0 {
            return Err(Error::InvalidParameter(format!(
                "stiffness and force jump at different points ({} vs {})",
                a.x0, p.x0
            )));
        }
        Ok(Self { a, p, g })
    }

    /// Constant axial force `P`.
    pub fn with_constant_force(a: f64, b: f64, x0: f64, p: f64, g: ForcingTerm) -> Result<Self> {
        Self::new(
            JumpConstant::stiffness(a, b, x0)?,
            JumpConstant::constant(p, x0)?,
            g,
        )
    }

    /// Axial force `P1` left of `x0` and `P2` right of it.
    pub fn with_two_forces(a: f64, b: f64, x0: f64, p1: f64, p2: f64, g: ForcingTerm) -> Result<Self> {
        Self::new(
            JumpConstant::stiffness(a, b, x0)?,
            JumpConstant::new(p1, p2, x0)?,
            g,
        )
    }

    pub fn x0(&self) -> f64 {
        self.a.x0
    }

    /// Split points for quadrature over `[0, 1]`: the jump and every singularity of `g`.
    pub fn breakpoints(&self) -> Vec<Breakpoint> {
        let mut b = vec![Breakpoint::split(self.x0())];
        b.extend(self.g.breakpoints());
        b
    }

    pub fn with_forcing(&self, g: ForcingTerm) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn reflected(&self) -> Self {
        Self {
            a: self.a.reflected(),
            p: self.p.reflected(),
            g: self.g.reflected(),
        }
    }
}

/// Form of the homogeneous solutions on one side, fixed by the sign of `P / a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Hyperbolic,
    Trigonometric,
    Polynomial,
}

impl Branch {
    pub fn of(force: f64) -> Self {
        if force < 0.0 {
            Branch::Hyperbolic
        } else if force > 0.0 {
            Branch::Trigonometric
        } else {
            Branch::Polynomial
        }
    }
}

/// Left and right limits of `u` and `u'` at the jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSidedLimits {
    pub u_minus: f64,
    pub u_plus: f64,
    pub du_minus: f64,
    pub du_plus: f64,
}

impl OneSidedLimits {
    /// `u(x0-) / u(x0+)`, which equals `B / A` whenever `u(x0+) != 0`.
    pub fn jump_ratio(&self) -> Option<f64> {
        (self.u_plus != 0.0).then(|| self.u_minus / self.u_plus)
    }
}

/// The closed-form solution `u = u_- + u_+`.
///
/// On `[0, x0]`: `u_-(x) = c1 L(x) + p_-(x)`, on `[x0, 1]`: `u_+(x) = d1 R(x) + p_+(x)`,
/// with `L(0) = 0`, `R(1) = 0` and Duhamel particular parts `p_±` anchored at
/// 0 and 1 respectively.
#[derive(Debug, Clone)]
pub struct PiecewiseSolution {
    pub(crate) problem: BeamProblem,
    pub branch_minus: Branch,
    pub branch_plus: Branch,
    pub c1: f64,
    pub d1: f64,
    pub(crate) limits: OneSidedLimits,
}

impl PiecewiseSolution {
    /// Builds a solution from given homogeneous coefficients (no interface
    /// conditions enforced). Used to re-check stored runs and perturbations.
    pub fn from_coefficients(problem: BeamProblem, c1: f64, d1: f64) -> Result<Self> {
        let branch_minus = Branch::of(problem.p.left);
        let branch_plus = Branch::of(problem.p.right);
        let x0 = problem.x0();
        let (a, b) = (problem.a.left, problem.a.right);
        let (pm, dpm) =
            closed_form::particular_solution(closed_form::Side::Minus, &problem.g, a, problem.p.left, x0)?;
        let (pp, dpp) =
            closed_form::particular_solution(closed_form::Side::Plus, &problem.g, b, problem.p.right, x0)?;
        let (l, dl) = closed_form::left_basis(a, problem.p.left, x0);
        let (r, dr) = closed_form::right_basis(b, problem.p.right, x0);
        let limits = OneSidedLimits {
            u_minus: c1 * l + pm,
            u_plus: d1 * r + pp,
            du_minus: c1 * dl + dpm,
            du_plus: d1 * dr + dpp,
        };
        Ok(Self {
            problem,
            branch_minus,
            branch_plus,
            c1,
            d1,
            limits,
        })
    }

    pub fn problem(&self) -> &BeamProblem {
        &self.problem
    }

    pub fn x0(&self) -> f64 {
        self.problem.x0()
    }

    /// `u_-` on `[0, x0]` (the formula extends smoothly beyond).
    pub fn eval_minus(&self, x: f64) -> Result<f64> {
        let pr = &self.problem;
        let (l, _) = closed_form::left_basis(pr.a.left, pr.p.left, x);
        let p = closed_form::particular_value(closed_form::Side::Minus, &pr.g, pr.a.left, pr.p.left, x)?;
        Ok(self.c1 * l + p)
    }

    /// `u_+` on `[x0, 1]`.
    pub fn eval_plus(&self, x: f64) -> Result<f64> {
        let pr = &self.problem;
        let (r, _) = closed_form::right_basis(pr.a.right, pr.p.right, x);
        let p = closed_form::particular_value(closed_form::Side::Plus, &pr.g, pr.a.right, pr.p.right, x)?;
        Ok(self.d1 * r + p)
    }

    /// `(u_-, u_-')` at `x`.
    pub fn eval_minus_with_derivative(&self, x: f64) -> Result<(f64, f64)> {
        let pr = &self.problem;
        let (l, dl) = closed_form::left_basis(pr.a.left, pr.p.left, x);
        let (p, dp) = closed_form::particular_solution(closed_form::Side::Minus, &pr.g, pr.a.left, pr.p.left, x)?;
        Ok((self.c1 * l + p, self.c1 * dl + dp))
    }

    /// `(u_+, u_+')` at `x`.
    pub fn eval_plus_with_derivative(&self, x: f64) -> Result<(f64, f64)> {
        let pr = &self.problem;
        let (r, dr) = closed_form::right_basis(pr.a.right, pr.p.right, x);
        let (p, dp) = closed_form::particular_solution(closed_form::Side::Plus, &pr.g, pr.a.right, pr.p.right, x)?;
        Ok((self.d1 * r + p, self.d1 * dr + dp))
    }

    /// `u(x)` for `x` in `[0, 1]`; at `x0` the mean of the one-sided limits.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let x0 = self.x0();
        if x < x0 {
            self.eval_minus(x)
        } else if x > x0 {
            self.eval_plus(x)
        } else {
            Ok(0.5 * (self.limits.u_minus + self.limits.u_plus))
        }
    }

    pub fn limits(&self) -> OneSidedLimits {
        self.limits
    }
}

/// One-sided limits at `x0`, taken from the branch formulas.
pub fn one_sided_limits(s: &PiecewiseSolution) -> OneSidedLimits {
    s.limits
}

/// Samples on a uniform grid `x_i = start + i h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub start: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(start: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing h = {h} must be positive")));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter("grid function has no values".into()));
        }
        let end = start + h * (values.len() - 1) as f64;
        let slack = 1e-12;
        if start < -slack || end > 1.0 + slack {
            return Err(Error::InvalidParameter(format!(
                "grid [{start}, {end}] not contained in [0, 1]"
            )));
        }
        Ok(Self { start, h, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.h * i as f64
    }

    pub fn end(&self) -> f64 {
        self.x(self.values.len() - 1)
    }

    /// `(x_i, v_i)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.x(i), v))
    }
}
