//! Mollified products of distributions and their limits.
//!
//! Everything is computed in the scaled variable `z = (x - x0) / eps`:
//! `H_- * φ_ε` is the tail `T(z) = ∫_z^∞ φ`, `H_+ * φ_ε = 1 - T(z)` and
//! `δ^(k) * φ_ε = eps^(-1-k) φ^(k)(z)`. Only the final pairing with the test
//! function and the convolution of an `L¹` function are done by quadrature.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{BeamProblem, ForcingTerm, PiecewiseSolution};
use crate::bump::{Bump, TestFunction};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_fallible, Breakpoint, QuadConfig};

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`.
pub const BUMP_MASS: f64 = 0.443_993_816_168_079_4;

const ASYM_CENTER: f64 = 0.25;
const ASYM_RADIUS: f64 = 0.75;
const ASYM_MASS: f64 = 0.843_75 * BUMP_MASS;
const POLY_SCALE: f64 = 315.0 / 256.0;
const MAX_CACHED_ORDER: usize = 6;

fn bump_table() -> &'static Bump {
    static TABLE: OnceLock<Bump> = OnceLock::new();
    TABLE.get_or_init(|| Bump::new(MAX_CACHED_ORDER))
}

fn bump_derivative(k: usize, x: f64) -> f64 {
    if k <= MAX_CACHED_ORDER {
        bump_table().derivative(k, x)
    } else {
        Bump::new(k).derivative(k, x)
    }
}

/// Integral of a smooth integrand; NaN if the quadrature fails.
fn smooth_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> f64 {
    integrate(f, lo, hi, &[], cfg).map_or(f64::NAN, |e| e.value)
}

/// `(1 - x²)^4` as ascending coefficients.
const POLY: [f64; 9] = [1.0, 0.0, -4.0, 0.0, 6.0, 0.0, -4.0, 0.0, 1.0];

fn poly_derivative(k: usize, x: f64) -> f64 {
    let mut c = POLY.to_vec();
    for _ in 0..k {
        if c.len() <= 1 {
            return 0.0;
        }
        c = c.iter().enumerate().skip(1).map(|(i, &a)| i as f64 * a).collect();
    }
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `∫_z^1 (1-t²)^4 dt` via the antiderivative.
fn poly_tail(z: f64) -> f64 {
    let anti = |x: f64| {
        POLY.iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &a)| acc * x + a / (i + 1) as f64)
            * x
    };
    anti(1.0) - anti(z)
}

/// Base shapes, each normalized to unit integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-1/(1-x²))` on `(-1, 1)`.
    SymmetricBump,
    /// `b((x - 1/4) / (3/4)) (1 + x/2)` on `(-1/2, 1)`.
    AsymmetricBump,
    /// `(1 - x²)^4` on `[-1, 1]`.
    PolynomialBump,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::SymmetricBump, Profile::AsymmetricBump, Profile::PolynomialBump];

    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile::AsymmetricBump => (ASYM_CENTER - ASYM_RADIUS, ASYM_CENTER + ASYM_RADIUS),
            _ => (-1.0, 1.0),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `φ^(k)(x)`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo || x >= hi {
            return 0.0;
        }
        match self {
            Profile::SymmetricBump => bump_derivative(k, x) / BUMP_MASS,
            Profile::AsymmetricBump => {
                let s = (x - ASYM_CENTER) / ASYM_RADIUS;
                let r = ASYM_RADIUS;
                let mut v = bump_derivative(k, s) / r.powi(k as i32) * (1.0 + 0.5 * x);
                if k > 0 {
                    v += k as f64 * bump_derivative(k - 1, s) / r.powi(k as i32 - 1) * 0.5;
                }
                v / ASYM_MASS
            }
            Profile::PolynomialBump => POLY_SCALE * poly_derivative(k, x),
        }
    }

    /// `∫_z^∞ φ`.
    pub fn tail(&self, z: f64) -> f64 {
        let (lo, hi) = self.support();
        if z <= lo {
            return 1.0;
        }
        if z >= hi {
            return 0.0;
        }
        match self {
            Profile::PolynomialBump => POLY_SCALE * poly_tail(z),
            _ => {
                let cfg = QuadConfig::default().with_abs_tol(1e-15).with_rel_tol(1e-13);
                let mid = 0.5 * (lo + hi);
                if z >= mid {
                    smooth_integral(|t| self.value(t), z, hi, &cfg)
                } else {
                    1.0 - smooth_integral(|t| self.value(t), lo, z, &cfg)
                }
            }
        }
    }

    /// `∫ φ`.
    pub fn integral(&self) -> f64 {
        let (lo, hi) = self.support();
        let cfg = QuadConfig::default().with_abs_tol(1e-15).with_rel_tol(1e-13);
        smooth_integral(|t| self.value(t), lo, hi, &cfg)
    }

    /// `∫ φ(z) ∫_z^∞ φ(t) dt dz`, which equals `1/2` for any unit-mass profile.
    pub fn tail_product_constant(&self) -> f64 {
        let (lo, hi) = self.support();
        let cfg = QuadConfig::default().with_abs_tol(1e-14).with_rel_tol(1e-13);
        smooth_integral(|z| self.value(z) * self.tail(z), lo, hi, &cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetKind {
    /// `φ_ε(x) = φ(x/ε)/ε`.
    Model,
    /// `ρ^ε(x) = ((1+ε) φ(x/ε) - ε φ₂(x/ε)) / ε`: unit mass and shrinking
    /// support, but not a rescaling of a single profile.
    Strict { secondary: Profile },
}

/// A delta net built from one or two profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub profile: Profile,
    pub kind: NetKind,
}

impl MollifierSpec {
    pub fn model(profile: Profile) -> Self {
        Self {
            profile,
            kind: NetKind::Model,
        }
    }

    pub fn strict(profile: Profile, secondary: Profile) -> Self {
        Self {
            profile,
            kind: NetKind::Strict { secondary },
        }
    }

    /// Profiles and weights making up the scaled kernel at `eps`.
    fn terms(&self, eps: f64) -> Vec<(f64, Profile)> {
        match self.kind {
            NetKind::Model => vec![(1.0, self.profile)],
            NetKind::Strict { secondary } => vec![(1.0 + eps, self.profile), (-eps, secondary)],
        }
    }

    /// Support of the scaled kernel (in `z`).
    pub fn support(&self) -> (f64, f64) {
        let mut s = self.profile.support();
        if let NetKind::Strict { secondary } = self.kind {
            let t = secondary.support();
            s = (s.0.min(t.0), s.1.max(t.1));
        }
        s
    }

    /// `ε ρ^ε(ε z)` differentiated `k` times in `z`.
    pub fn scaled(&self, eps: f64, k: usize, z: f64) -> f64 {
        self.terms(eps).iter().map(|(w, p)| w * p.derivative(k, z)).sum()
    }

    /// `∫_z^∞ ε ρ^ε(ε t) dt`.
    pub fn scaled_tail(&self, eps: f64, z: f64) -> f64 {
        self.terms(eps).iter().map(|(w, p)| w * p.tail(z)).sum()
    }

    /// `ρ^ε(x)`.
    pub fn kernel(&self, eps: f64, x: f64) -> f64 {
        self.scaled(eps, 0, x / eps) / eps
    }

    /// `∫ ρ^ε`; independent of `eps` for valid nets.
    pub fn integral(&self, eps: f64) -> f64 {
        self.terms(eps).iter().map(|(w, p)| w * p.integral()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.integral(0.5) - 1.0).abs() <= 1e-12
    }

    /// `∫ |ρ^ε|`.
    pub fn l1_norm(&self, eps: f64) -> f64 {
        let (lo, hi) = self.support();
        let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-12);
        smooth_integral(|z| self.scaled(eps, 0, z).abs(), lo, hi, &cfg)
    }
}

/// Result of checking the strict-net conditions along a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetValidation {
    pub support_radii: Vec<f64>,
    pub integrals: Vec<f64>,
    pub l1_norms: Vec<f64>,
    pub support_shrinking: bool,
    pub unit_integral: bool,
    pub l1_bounded: bool,
}

impl NetValidation {
    pub fn is_valid(&self) -> bool {
        self.support_shrinking && self.unit_integral && self.l1_bounded
    }
}

/// Checks shrinking support, unit mass and an `L¹` bound of `l1_bound` along
/// a decreasing `eps` schedule.
pub fn validate_net(m: &MollifierSpec, schedule: &[f64], l1_bound: f64) -> Result<NetValidation> {
    if schedule.len() < 2 || schedule.windows(2).any(|w| !(w[1] < w[0])) || schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter(
            "schedule must be a strictly decreasing list of positive values".into(),
        ));
    }
    let (lo, hi) = m.support();
    let radius = lo.abs().max(hi.abs());
    let support_radii: Vec<f64> = schedule.iter().map(|e| e * radius).collect();
    let integrals: Vec<f64> = schedule.iter().map(|&e| m.integral(e)).collect();
    let l1_norms: Vec<f64> = schedule.iter().map(|&e| m.l1_norm(e)).collect();
    Ok(NetValidation {
        support_shrinking: support_radii.windows(2).all(|w| w[1] < w[0]),
        unit_integral: integrals.iter().all(|v| (v - 1.0).abs() <= 1e-12),
        l1_bounded: l1_norms.iter().all(|&v| v <= l1_bound),
        support_radii,
        integrals,
        l1_norms,
    })
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// An integrable function supported in `[lo, hi]` with known kinks and singularities.
#[derive(Clone)]
pub struct L1Function {
    f: Arc<ScalarFn>,
    pub support: (f64, f64),
    pub breakpoints: Vec<Breakpoint>,
}

impl std::fmt::Debug for L1Function {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("L1Function")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl L1Function {
    pub fn new<F>(f: F, support: (f64, f64), breakpoints: Vec<Breakpoint>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            support,
            breakpoints,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, (0.0, 1.0), Vec::new())
    }

    /// `g` on `[0, 1]`.
    pub fn from_forcing(g: &ForcingTerm) -> Self {
        let g2 = g.clone();
        Self::new(move |x| g2.eval(x), (0.0, 1.0), g.breakpoints())
    }

    /// A computed solution on `[0, 1]`; evaluation failures show up as NaN.
    pub fn from_solution(s: &PiecewiseSolution) -> Self {
        let s2 = s.clone();
        let x0 = s.x0();
        let f = move |x: f64| {
            let r = if x < x0 { s2.eval_minus(x) } else { s2.eval_plus(x) };
            r.unwrap_or(f64::NAN)
        };
        Self::new(f, (0.0, 1.0), s.problem().breakpoints())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.f)(x)
        }
    }
}

#[derive(Debug, Clone)]
pub enum DistKind {
    HeavisidePlus,
    HeavisideMinus,
    DeltaDerivative(usize),
    PiecewiseL1(L1Function),
    /// Linear combination of descriptors.
    Sum(Vec<(f64, DistDescriptor)>),
}

/// A distribution on the line anchored at `x0`: `H_± = H(±(x - x0))`,
/// `δ_{x0}^(k)`, an `L¹` function, or a combination.
#[derive(Debug, Clone)]
pub struct DistDescriptor {
    pub kind: DistKind,
    pub anchor: f64,
}

impl DistDescriptor {
    fn anchored(kind: DistKind, anchor: f64) -> Result<Self> {
        if !(anchor > 0.0 && anchor < 1.0) {
            return Err(Error::InvalidParameter(format!("anchor {anchor} must lie in (0, 1)")));
        }
        Ok(Self { kind, anchor })
    }

    pub fn heaviside_minus(x0: f64) -> Result<Self> {
        Self::anchored(DistKind::HeavisideMinus, x0)
    }

    pub fn heaviside_plus(x0: f64) -> Result<Self> {
        Self::anchored(DistKind::HeavisidePlus, x0)
    }

    pub fn delta(x0: f64, k: usize) -> Result<Self> {
        Self::anchored(DistKind::DeltaDerivative(k), x0)
    }

    pub fn function(f: L1Function) -> Self {
        Self {
            kind: DistKind::PiecewiseL1(f),
            anchor: 0.5,
        }
    }

    /// `left H_- + right H_+`, e.g. the stiffness `a`.
    pub fn jump(left: f64, right: f64, x0: f64) -> Result<Self> {
        Self::anchored(
            DistKind::Sum(vec![
                (left, Self::heaviside_minus(x0)?),
                (right, Self::heaviside_plus(x0)?),
            ]),
            x0,
        )
    }

    /// Whether the distribution is supported inside `[0, 1]`.
    pub fn supported_in_unit_interval(&self) -> bool {
        match &self.kind {
            DistKind::HeavisideMinus | DistKind::HeavisidePlus => false,
            DistKind::DeltaDerivative(_) => true,
            DistKind::PiecewiseL1(f) => f.support.0 >= 0.0 && f.support.1 <= 1.0,
            DistKind::Sum(parts) => parts.iter().all(|(w, d)| *w == 0.0 || d.supported_in_unit_interval()),
        }
    }

    /// Interval outside which `self * ρ^ε` vanishes, if bounded on that side.
    fn conv_support(&self, m: &MollifierSpec, eps: f64) -> (f64, f64) {
        let (zl, zh) = m.support();
        let x0 = self.anchor;
        match &self.kind {
            DistKind::HeavisideMinus => (f64::NEG_INFINITY, x0 + eps * zh),
            DistKind::HeavisidePlus => (x0 + eps * zl, f64::INFINITY),
            DistKind::DeltaDerivative(_) => (x0 + eps * zl, x0 + eps * zh),
            DistKind::PiecewiseL1(f) => (f.support.0 + eps * zl, f.support.1 + eps * zh),
            DistKind::Sum(parts) => parts
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|(_, d)| d.conv_support(m, eps))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1))),
        }
    }

    /// Points in `x` where `self * ρ^ε` may lose smoothness.
    fn conv_breaks(&self, m: &MollifierSpec, eps: f64, out: &mut Vec<Breakpoint>) {
        let (zl, zh) = m.support();
        let x0 = self.anchor;
        match &self.kind {
            DistKind::HeavisideMinus | DistKind::HeavisidePlus | DistKind::DeltaDerivative(_) => {
                out.push(Breakpoint::split(x0 + eps * zl));
                out.push(Breakpoint::split(x0 + eps * zh));
            }
            DistKind::PiecewiseL1(f) => {
                for b in f.breakpoints.iter().map(|b| b.location).chain([f.support.0, f.support.1]) {
                    out.push(Breakpoint::split(b + eps * zl));
                    out.push(Breakpoint::split(b + eps * zh));
                }
            }
            DistKind::Sum(parts) => parts.iter().for_each(|(_, d)| d.conv_breaks(m, eps, out)),
        }
    }

    /// `(self * ρ^ε)(x)`.
    pub fn convolve(&self, m: &MollifierSpec, eps: f64, x: f64) -> Result<f64> {
        let z = (x - self.anchor) / eps;
        match &self.kind {
            DistKind::HeavisideMinus => Ok(m.scaled_tail(eps, z)),
            DistKind::HeavisidePlus => Ok(1.0 - m.scaled_tail(eps, z)),
            DistKind::DeltaDerivative(k) => Ok(m.scaled(eps, *k, z) / eps.powi(*k as i32 + 1)),
            DistKind::PiecewiseL1(f) => convolve_l1(f, m, eps, x),
            DistKind::Sum(parts) => parts
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .try_fold(0.0, |acc, (w, d)| Ok(acc + w * d.convolve(m, eps, x)?)),
        }
    }
}

/// `∫ f(x - ε z) ρ(z) dz` over the kernel support.
fn convolve_l1(f: &L1Function, m: &MollifierSpec, eps: f64, x: f64) -> Result<f64> {
    let (zl, zh) = m.support();
    let lo = zl.max((x - f.support.1) / eps);
    let hi = zh.min((x - f.support.0) / eps);
    if lo >= hi {
        return Ok(0.0);
    }
    let bps: Vec<Breakpoint> = f
        .breakpoints
        .iter()
        .map(|b| Breakpoint::singular((x - b.location) / eps, b.exponent))
        .collect();
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-12);
    let v = integrate_fallible(|z| Ok((f.f)(x - eps * z) * m.scaled(eps, 0, z)), lo, hi, &bps, &cfg)?;
    Ok(v.value)
}

fn pairing_cfg() -> QuadConfig {
    QuadConfig::default().with_abs_tol(1e-14).with_rel_tol(1e-13)
}

/// `⟨(u * ρ^ε)(v * ρ^ε), ψ⟩`.
pub fn mollified_pairing(
    u: &DistDescriptor,
    v: &DistDescriptor,
    psi: &TestFunction,
    m: &MollifierSpec,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    if !(psi.radius > 0.0) {
        return Err(Error::InvalidParameter("test function radius must be positive".into()));
    }
    let (pl, ph) = psi.support();
    let (ul, uh) = u.conv_support(m, eps);
    let (vl, vh) = v.conv_support(m, eps);
    let lo = pl.max(ul).max(vl);
    let hi = ph.min(uh).min(vh);
    if lo >= hi {
        return Ok(0.0);
    }
    let mut bps = Vec::new();
    u.conv_breaks(m, eps, &mut bps);
    v.conv_breaks(m, eps, &mut bps);
    let r = integrate_fallible(
        |x| Ok(u.convolve(m, eps, x)? * v.convolve(m, eps, x)? * psi.value(x)),
        lo,
        hi,
        &bps,
        &pairing_cfg(),
    )?;
    Ok(r.value)
}

/// Verdict on the `eps -> 0` behaviour of a pairing sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LimitVerdict {
    Converged {
        value: f64,
        /// Observed contraction of successive differences per schedule step.
        rate: f64,
        error_estimate: f64,
    },
    Diverged {
        growth_exponent: f64,
    },
}

/// Pairing values along the schedule with the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: LimitVerdict,
}

/// Richardson table for values at `eps_i = eps_0 q^i`, assuming an expansion
/// in integer powers of `eps`. Returns the best entry and its error estimate.
pub fn richardson_extrapolate(values: &[f64], q: f64) -> (f64, f64) {
    let n = values.len();
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let r = 1.0 / q;
    let mut table = vec![values.to_vec()];
    for j in 1..n {
        let prev = &table[j - 1];
        let f = r.powi(j as i32) - 1.0;
        let col: Vec<f64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / f).collect();
        table.push(col);
    }
    // the last entry of each column uses the finest data; pick the column
    // whose last two entries agree best
    let mut best = (values[n - 1], (values[n - 1] - values[n - 2]).abs());
    for col in table.iter().skip(1) {
        if col.len() < 2 {
            break;
        }
        let k = col.len();
        let err = (col[k - 1] - col[k - 2]).abs();
        if err < best.1 {
            best = (col[k - 1], err);
        }
    }
    best
}

const CONTRACTION: f64 = 0.75;
const GROWTH: f64 = 1.5;

/// Classifies a value sequence along a geometric schedule.
pub fn classify_sequence(schedule: &[f64], values: &[f64]) -> Result<LimitVerdict> {
    let n = values.len();
    if n < 5 || schedule.len() != n {
        return Err(Error::InvalidParameter("need at least 5 schedule entries with values".into()));
    }
    let q = schedule[1] / schedule[0];
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let floor = 1e-13 * scale;
    let d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let contraction: Vec<f64> = d
        .windows(2)
        .map(|w| if w[1] <= floor { 0.0 } else { w[1] / w[0].max(floor) })
        .collect();
    let tail_contracts = contraction[contraction.len() - 3..].iter().all(|&c| c <= CONTRACTION);
    if tail_contracts {
        let (value, error_estimate) = richardson_extrapolate(values, q);
        let rate = contraction[contraction.len() - 3..].iter().sum::<f64>() / 3.0;
        return Ok(LimitVerdict::Converged {
            value,
            rate,
            error_estimate,
        });
    }
    let growth: Vec<f64> = values
        .windows(2)
        .map(|w| if w[0] == 0.0 { f64::INFINITY } else { (w[1] / w[0]).abs() })
        .collect();
    if growth[growth.len() - 3..].iter().all(|&g| g >= GROWTH) {
        // least squares slope of log|v| against -log eps over the last four entries
        let pts: Vec<(f64, f64)> = schedule[n - 4..]
            .iter()
            .zip(&values[n - 4..])
            .map(|(e, v)| (-e.ln(), v.abs().ln()))
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / 4.0;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / 4.0;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        return Ok(LimitVerdict::Diverged {
            growth_exponent: sxy / sxx,
        });
    }
    Err(Error::Inconclusive(format!(
        "difference ratios {contraction:?} and growth ratios {growth:?} fit neither pattern"
    )))
}

/// `eps_0 q^i` for `i < count`.
pub fn geometric_schedule(eps0: f64, q: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| eps0 * q.powi(i as i32)).collect()
}

/// Evaluates the pairing along `schedule` and classifies the limit.
pub fn model_product_limit(
    u: &DistDescriptor,
    v: &DistDescriptor,
    psi: &TestFunction,
    m: &MollifierSpec,
    schedule: &[f64],
) -> Result<LimitReport> {
    if schedule.len() < 5 {
        return Err(Error::InvalidParameter("schedule needs at least 5 entries".into()));
    }
    let q = schedule[1] / schedule[0];
    let geometric = schedule
        .windows(2)
        .all(|w| w[0] > 0.0 && ((w[1] / w[0]) - q).abs() <= 1e-12 * q);
    if !geometric || !(q > 0.0 && q <= 0.5) {
        return Err(Error::InvalidParameter(
            "schedule must be geometric with ratio at most 1/2".into(),
        ));
    }
    let values: Result<Vec<f64>> = schedule
        .par_iter()
        .map(|&e| mollified_pairing(u, v, psi, m, e))
        .collect();
    let values = values?;
    let verdict = classify_sequence(schedule, &values)?;
    Ok(LimitReport {
        schedule: schedule.to_vec(),
        values,
        verdict,
    })
}

/// Pairing for `u` supported in `[0, 1]` against `ψ` supported away from
/// `[0, 1]` inflated by the kernel support; vanishes identically.
pub fn support_check(
    u: &DistDescriptor,
    v: &DistDescriptor,
    psi: &TestFunction,
    m: &MollifierSpec,
    eps: f64,
) -> Result<f64> {
    if !u.supported_in_unit_interval() {
        return Err(Error::Precondition("first factor must be supported in [0, 1]".into()));
    }
    let (zl, zh) = m.support();
    let (lo, hi) = (eps * zl, 1.0 + eps * zh);
    let (pl, ph) = psi.support();
    if ph > lo && pl < hi {
        return Err(Error::Precondition(format!(
            "test function support [{pl}, {ph}] meets the inflated interval [{lo}, {hi}]"
        )));
    }
    mollified_pairing(u, v, psi, m, eps)
}

/// `∫ a u ψ` for the stiffness and a computed solution; the duality-product value.
pub fn pointwise_product(problem: &BeamProblem, s: &PiecewiseSolution, psi: &TestFunction) -> Result<f64> {
    let x0 = problem.x0();
    let (lo, hi) = psi.support();
    let (lo, hi) = (lo.max(0.0), hi.min(1.0));
    if lo >= hi {
        return Ok(0.0);
    }
    let f = |x: f64| -> Result<f64> {
        let (u, a) = if x < x0 {
            (s.eval_minus(x)?, problem.a.left)
        } else {
            (s.eval_plus(x)?, problem.a.right)
        };
        Ok(a * u * psi.value(x))
    };
    Ok(integrate_fallible(f, lo, hi, &problem.breakpoints(), &pairing_cfg())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_have_unit_mass() {
        for p in Profile::ALL {
            assert!((p.integral() - 1.0).abs() <= 1e-12, "{p:?}: {}", p.integral());
            let (lo, hi) = p.support();
            assert!(lo >= -1.0 && hi <= 1.0);
            assert_eq!(p.value(lo - 0.01), 0.0);
        }
    }

    #[test]
    fn tail_constant_is_one_half() {
        for p in Profile::ALL {
            assert!((p.tail_product_constant() - 0.5).abs() <= 1e-10, "{p:?}");
        }
    }

    #[test]
    fn tails_consistent() {
        for p in Profile::ALL {
            let (lo, hi) = p.support();
            assert_eq!(p.tail(lo), 1.0);
            assert_eq!(p.tail(hi), 0.0);
            let h = 1e-5;
            for &z in &[lo + 0.3, 0.0, hi - 0.2] {
                let d = (p.tail(z + h) - p.tail(z - h)) / (2.0 * h);
                assert!((d + p.value(z)).abs() < 1e-8, "{p:?} z={z}");
            }
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let h = 1e-6;
        for p in Profile::ALL {
            for &z in &[-0.3, 0.1, 0.6] {
                for k in 0..3 {
                    let fd = (p.derivative(k, z + h) - p.derivative(k, z - h)) / (2.0 * h);
                    let ex = p.derivative(k + 1, z);
                    assert!((fd - ex).abs() < 1e-5 * (1.0 + ex.abs()), "{p:?} k={k} z={z}");
                }
            }
        }
    }

    #[test]
    fn asymmetric_profile_is_asymmetric() {
        let p = Profile::AsymmetricBump;
        assert!((p.value(0.3) - p.value(-0.3)).abs() > 1e-3);
    }

    #[test]
    fn strict_net_conditions() {
        let m = MollifierSpec::strict(Profile::SymmetricBump, Profile::PolynomialBump);
        let sched = geometric_schedule(0.5, 0.5, 6);
        let v = validate_net(&m, &sched, 3.0).unwrap();
        assert!(v.is_valid(), "{v:?}");
        assert!(v.l1_norms.iter().all(|&n| n >= 1.0));
        // the strict kernel is not a rescaled copy of a single profile
        let e = 0.25;
        let r1 = m.kernel(e, 0.1) / m.kernel(e, 0.0);
        let r2 = Profile::SymmetricBump.value(0.4) / Profile::SymmetricBump.value(0.0);
        assert!((r1 - r2).abs() > 1e-6);
        assert!(validate_net(&m, &[0.1, 0.2], 3.0).is_err());
    }

    #[test]
    fn delta_convolution_matches_kernel() {
        let m = MollifierSpec::model(Profile::PolynomialBump);
        let d = DistDescriptor::delta(0.5, 0).unwrap();
        for &x in &[0.45, 0.5, 0.52] {
            assert!((d.convolve(&m, 0.1, x).unwrap() - m.kernel(0.1, x - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn heaviside_convolutions_sum_to_one() {
        let m = MollifierSpec::model(Profile::AsymmetricBump);
        let hm = DistDescriptor::heaviside_minus(0.4).unwrap();
        let hp = DistDescriptor::heaviside_plus(0.4).unwrap();
        for &x in &[0.3, 0.38, 0.4, 0.43, 0.6] {
            let s = hm.convolve(&m, 0.05, x).unwrap() + hp.convolve(&m, 0.05, x).unwrap();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(hm.convolve(&m, 0.05, 0.3).unwrap(), 1.0);
        assert_eq!(hm.convolve(&m, 0.05, 0.6).unwrap(), 0.0);
    }

    #[test]
    fn l1_convolution_of_constant() {
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let one = DistDescriptor::function(L1Function::new(|_| 1.0, (0.0, 1.0), vec![]));
        assert!((one.convolve(&m, 0.1, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((one.convolve(&m, 0.1, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(one.convolve(&m, 0.1, 1.2).unwrap(), 0.0);
    }

    #[test]
    fn zero_factor_gives_zero() {
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let hm = DistDescriptor::heaviside_minus(0.5).unwrap();
        let z = DistDescriptor::function(L1Function::zero());
        let psi = TestFunction::new(0.5, 0.2);
        for &e in &[0.125, 0.0625, 0.03125] {
            assert_eq!(mollified_pairing(&hm, &z, &psi, &m, e).unwrap(), 0.0);
        }
    }

    #[test]
    fn heaviside_delta_halves() {
        // with H_-(x) = H(x0 - x) the mollified pairing tends to +ψ(x0)/2 for both
        // sides, since H_- + H_+ = 1 and the delta pairing alone gives ψ(x0)
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let psi = TestFunction::new(0.45, 0.3);
        let d = DistDescriptor::delta(0.5, 0).unwrap();
        let sched = geometric_schedule(0.125, 0.5, 7);
        let target = 0.5 * psi.value(0.5);
        for h in [DistDescriptor::heaviside_minus(0.5).unwrap(), DistDescriptor::heaviside_plus(0.5).unwrap()] {
            let r = model_product_limit(&h, &d, &psi, &m, &sched).unwrap();
            match r.verdict {
                LimitVerdict::Converged { value, .. } => assert!((value - target).abs() < 1e-8, "{value} vs {target}"),
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn heaviside_delta_derivative_diverges() {
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let psi = TestFunction::new(0.45, 0.3);
        let d1 = DistDescriptor::delta(0.5, 1).unwrap();
        let hm = DistDescriptor::heaviside_minus(0.5).unwrap();
        let r = model_product_limit(&hm, &d1, &psi, &m, &geometric_schedule(0.125, 0.5, 7)).unwrap();
        match r.verdict {
            LimitVerdict::Diverged { growth_exponent } => assert!((0.8..=1.2).contains(&growth_exponent)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn richardson_on_polynomial_error() {
        let sched = geometric_schedule(0.1, 0.5, 6);
        let vals: Vec<f64> = sched.iter().map(|e| 2.0 + 3.0 * e - 5.0 * e * e).collect();
        let (v, err) = richardson_extrapolate(&vals, 0.5);
        assert!((v - 2.0).abs() < 1e-12 && err < 1e-10);
    }

    #[test]
    fn classifier_bands() {
        let sched = geometric_schedule(0.1, 0.5, 6);
        let osc: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(matches!(classify_sequence(&sched, &osc), Err(Error::Inconclusive(_))));
        let grow: Vec<f64> = sched.iter().map(|e| 1.0 / (e * e)).collect();
        match classify_sequence(&sched, &grow).unwrap() {
            LimitVerdict::Diverged { growth_exponent } => assert!((growth_exponent - 2.0).abs() < 1e-12),
            v => panic!("{v:?}"),
        }
        assert!(classify_sequence(&sched[..4], &grow[..4]).is_err());
    }

    #[test]
    fn schedule_validation() {
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let d = DistDescriptor::delta(0.5, 0).unwrap();
        let psi = TestFunction::new(0.5, 0.1);
        let short = geometric_schedule(0.1, 0.5, 4);
        assert!(model_product_limit(&d, &d, &psi, &m, &short).is_err());
        let slow = geometric_schedule(0.1, 0.8, 6);
        assert!(model_product_limit(&d, &d, &psi, &m, &slow).is_err());
    }

    #[test]
    fn support_contract() {
        let m = MollifierSpec::model(Profile::SymmetricBump);
        let d = DistDescriptor::delta(0.5, 0).unwrap();
        let hm = DistDescriptor::heaviside_minus(0.5).unwrap();
        let far = TestFunction::new(1.75, 0.25);
        assert_eq!(support_check(&d, &hm, &far, &m, 0.1).unwrap(), 0.0);
        let left = TestFunction::new(-0.75, 0.25);
        assert_eq!(support_check(&d, &hm, &left, &m, 0.1).unwrap(), 0.0);
        let close = TestFunction::new(1.125, 0.075);
        assert!(matches!(support_check(&d, &hm, &close, &m, 0.1), Err(Error::Precondition(_))));
        assert!(support_check(&hm, &d, &far, &m, 0.1).is_err());
    }

    #[test]
    fn anchor_validation() {
        assert!(DistDescriptor::delta(0.0, 0).is_err());
        assert!(DistDescriptor::heaviside_plus(1.0).is_err());
        assert!(DistDescriptor::jump(1.0, 2.0, 0.5).is_ok());
    }
}
