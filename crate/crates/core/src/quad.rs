//! Globally adaptive Gauss–Kronrod quadrature with singularity-aware splitting.
//!
//! Integrals are split at every declared breakpoint. Next to a breakpoint that
//! carries an integrable power singularity `|t - σ|^α` (with `-1 < α < 0`) the
//! panel is rewritten through `t = σ ± τ^β`, `β = 1 / (1 + α)`, which turns the
//! integrand into a bounded function of `τ`. The transformed panels are then
//! refined by bisection, always splitting the panel with the largest error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
// Gauss weights for the odd-indexed nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// A mandatory split point. `exponent == 0` marks a plain split (e.g. a jump);
/// a negative exponent declares a power singularity of that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub location: f64,
    pub exponent: f64,
}

impl Breakpoint {
    pub fn split(location: f64) -> Self {
        Self {
            location,
            exponent: 0.0,
        }
    }

    pub fn singular(location: f64, exponent: f64) -> Self {
        Self { location, exponent }
    }

    fn is_singular(&self) -> bool {
        self.exponent < 0.0
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// t = origin + sign * τ^power
    Power { origin: f64, sign: f64, power: f64 },
}

impl Map {
    fn apply(&self, tau: f64, lo: f64, hi: f64) -> (f64, f64) {
        match *self {
            Map::Identity => (tau, 1.0),
            Map::Power {
                origin,
                sign,
                power,
            } => {
                let d = tau.powf(power);
                let mut t = (origin + sign * d).clamp(lo, hi);
                if t == origin {
                    t = if sign > 0.0 { origin.next_up() } else { origin.next_down() };
                }
                // The offset actually realised is t - origin (exact this close to
                // origin); rescale by the declared power law for the rounding.
                let realised = (t - origin).abs();
                let alpha = 1.0 / power - 1.0;
                let w = if d > 0.0 && realised != d { (d / realised).powf(alpha) } else { 1.0 };
                (t, power * tau.powf(power - 1.0) * w)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    map: Map,
    // physical bounds, used for clamping
    lo: f64,
    hi: f64,
    // integration variable bounds and orientation
    tau_lo: f64,
    tau_hi: f64,
    orientation: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    segment: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // splittable panels first, then by error
        self.splittable
            .cmp(&other.splittable)
            .then(self.error.total_cmp(&other.error))
    }
}

fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 {
            result_asc * scale
        } else {
            result_asc
        };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * result_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

/// One Gauss–Kronrod 21 application: (value, error, roundoff floor).
fn qk21<F>(f: &F, seg: &Segment, a: f64, b: f64) -> Result<(f64, f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |tau: f64| -> Result<f64> {
        let (t, jac) = seg.map.apply(tau, seg.lo, seg.hi);
        let v = f(t)? * jac;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x: t })
        }
    };

    let fc = eval(center)?;
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = (WGK[10] * fc).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let result = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale);
    let floor = 50.0 * f64::EPSILON * res_abs * scale;
    Ok((result, err, floor))
}

fn segments(a: f64, b: f64, breaks: &[Breakpoint]) -> Vec<Segment> {
    let span = b - a;
    let close = |x: f64, y: f64| (x - y).abs() <= 8.0 * f64::EPSILON * x.abs().max(y.abs()).max(1.0);

    let mut cuts: Vec<f64> = breaks
        .iter()
        .map(|bp| bp.location)
        .filter(|&x| x > a && x < b && !close(x, a) && !close(x, b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| close(*x, *y));

    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(a);
    nodes.extend(cuts);
    nodes.push(b);

    // strongest singularity at or just outside a segment end, within reach
    let singular_near = |end: f64, reach: f64, left_side: bool| -> Option<(f64, f64)> {
        breaks
            .iter()
            .filter(|bp| bp.is_singular())
            .filter(|bp| {
                let d = if left_side {
                    end - bp.location
                } else {
                    bp.location - end
                };
                close(bp.location, end) || (d >= 0.0 && d <= reach)
            })
            .map(|bp| (bp.location, bp.exponent))
            .min_by(|x, y| {
                (x.0 - end)
                    .abs()
                    .total_cmp(&(y.0 - end).abs())
                    .then(x.1.total_cmp(&y.1))
            })
    };

    let mut out = Vec::new();
    for w in nodes.windows(2) {
        let (l, r) = (w[0], w[1]);
        if l == r {
            continue;
        }
        let reach = 0.25 * (r - l).min(span.abs());
        let left = singular_near(l, reach, true);
        let right = singular_near(r, reach, false);
        match (left, right) {
            (Some(sl), Some(sr)) => {
                let m = 0.5 * (l + r);
                out.push(power_segment(l, m, sl.0, sl.1, true));
                out.push(power_segment(m, r, sr.0, sr.1, false));
            }
            (Some(sl), None) => out.push(power_segment(l, r, sl.0, sl.1, true)),
            (None, Some(sr)) => out.push(power_segment(l, r, sr.0, sr.1, false)),
            (None, None) => out.push(Segment {
                map: Map::Identity,
                lo: l,
                hi: r,
                tau_lo: l,
                tau_hi: r,
                orientation: 1.0,
            }),
        }
    }
    out
}

fn power_segment(l: f64, r: f64, origin: f64, exponent: f64, at_left: bool) -> Segment {
    let power = 1.0 / (1.0 + exponent);
    let inv = 1.0 / power;
    if at_left {
        // t = origin + τ^power, origin <= l
        Segment {
            map: Map::Power {
                origin,
                sign: 1.0,
                power,
            },
            lo: l,
            hi: r,
            tau_lo: (l - origin).max(0.0).powf(inv),
            tau_hi: (r - origin).powf(inv),
            orientation: 1.0,
        }
    } else {
        // t = origin - τ^power, origin >= r; τ decreases as t increases
        Segment {
            map: Map::Power {
                origin,
                sign: -1.0,
                power,
            },
            lo: l,
            hi: r,
            tau_lo: (origin - r).max(0.0).powf(inv),
            tau_hi: (origin - l).powf(inv),
            orientation: 1.0,
        }
    }
}

/// Integrates a fallible integrand over `[a, b]` (either orientation).
pub fn integrate_fallible<F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[Breakpoint],
    cfg: &QuadConfig,
) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let e = integrate_fallible(f, b, a, breaks, cfg)?;
        return Ok(Estimate {
            value: -e.value,
            ..e
        });
    }

    let segs = segments(a, b, breaks);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;

    for (i, seg) in segs.iter().enumerate() {
        let (value, error, floor) = qk21(&f, seg, seg.tau_lo, seg.tau_hi)?;
        evaluations += 21;
        let value = value * seg.orientation;
        total += value;
        total_err += error;
        heap.push(Panel {
            segment: i,
            a: seg.tau_lo,
            b: seg.tau_hi,
            value,
            error,
            splittable: error > floor,
        });
    }

    let mut subdivisions = segs.len();
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        if !worst.splittable {
            // only roundoff-limited panels remain
            heap.push(worst);
            break;
        }
        let seg = &segs[worst.segment];
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a).abs()
            <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if too_narrow || mid <= worst.a || mid >= worst.b {
            heap.push(Panel {
                splittable: false,
                ..worst
            });
            continue;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                a,
                b,
                subdivisions,
                estimate: total_err,
            });
        }
        let (v1, e1, fl1) = qk21(&f, seg, worst.a, mid)?;
        let (v2, e2, fl2) = qk21(&f, seg, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        let (v1, v2) = (v1 * seg.orientation, v2 * seg.orientation);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            segment: worst.segment,
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            splittable: e1 > fl1,
        });
        heap.push(Panel {
            segment: worst.segment,
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            splittable: e2 > fl2,
        });
    }

    // resum to shed accumulated update drift
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    if error > tol && heap.iter().any(|p| p.splittable) {
        return Err(Error::QuadratureNonConvergence {
            a,
            b,
            subdivisions,
            estimate: error,
        });
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[a, b]`, splitting at `breaks`.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[Breakpoint], cfg: &QuadConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    integrate_fallible(|x| Ok(f(x)), a, b, breaks, cfg)
}

/// Shorthand returning only the value, with default tolerances.
pub fn quad<F>(f: F, a: f64, b: f64, breaks: &[Breakpoint]) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(f, a, b, breaks, &QuadConfig::default()).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kronrod_sum(f: impl Fn(f64) -> f64) -> f64 {
        let mut s = WGK[10] * f(0.0);
        for j in 0..10 {
            s += WGK[j] * (f(XGK[j]) + f(-XGK[j]));
        }
        s
    }

    fn gauss_sum(f: impl Fn(f64) -> f64) -> f64 {
        (0..5)
            .map(|i| WG[i] * (f(XGK[2 * i + 1]) + f(-XGK[2 * i + 1])))
            .sum()
    }

    #[test]
    fn kronrod_rule_exact_to_degree_31() {
        for deg in (0..=30).step_by(2) {
            let exact = 2.0 / (deg as f64 + 1.0);
            let got = kronrod_sum(|x| x.powi(deg));
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn gauss_rule_exact_to_degree_19() {
        for deg in (0..=18).step_by(2) {
            let exact = 2.0 / (deg as f64 + 1.0);
            let got = gauss_sum(|x| x.powi(deg));
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn smooth_integral() {
        let v = quad(|x| x.sin(), 0.0, std::f64::consts::PI, &[]).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = quad(|x| x.exp(), 1.0, 0.0, &[]).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn inverse_sqrt_singularity_interior() {
        // ∫_0^1 |x - 1/3|^{-1/2} dx = 2(sqrt(1/3) + sqrt(2/3))
        let s: f64 = 1.0 / 3.0;
        let exact = 2.0 * (s.sqrt() + (1.0 - s).sqrt());
        let bp = [Breakpoint::singular(s, -0.5)];
        let v = quad(|x| (x - s).abs().powf(-0.5), 0.0, 1.0, &bp).unwrap();
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn strong_singularity_at_endpoint() {
        // ∫_0^1 x^{-0.9} dx = 10
        let bp = [Breakpoint::singular(0.0, -0.9)];
        let v = quad(|x| x.powf(-0.9), 0.0, 1.0, &bp).unwrap();
        assert!((v - 10.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn singularity_just_outside_interval() {
        // ∫_{σ+δ}^{1} (x-σ)^{-1/2} dx = 2(sqrt(1-σ) - sqrt(δ))
        let s = 0.5;
        let d = 1e-9;
        let bp = [Breakpoint::singular(s, -0.5)];
        let v = quad(|x| (x - s).abs().powf(-0.5), s + d, 1.0, &bp).unwrap();
        let exact = 2.0 * ((1.0 - s).sqrt() - d.sqrt());
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn jump_split_point() {
        let bp = [Breakpoint::split(0.3)];
        let v = quad(|x| if x < 0.3 { 1.0 } else { 2.0 }, 0.0, 1.0, &bp).unwrap();
        assert!((v - (0.3 + 1.4)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_reported() {
        let err = quad(|_| f64::NAN, 0.0, 1.0, &[]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn subdivision_cap_reported() {
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        // undeclared singularity: cannot converge in 3 subdivisions
        let err = integrate(|x: f64| (x - 0.3).abs().powf(-0.5), 0.0, 1.0, &[], &cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn fallible_integrand_propagates() {
        let err = integrate_fallible(
            |x| if x > 0.5 { Err(Error::Domain("boom".into())) } else { Ok(x) },
            0.0,
            1.0,
            &[],
            &QuadConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::Domain("boom".into()));
    }
}
