//! The smooth bump `b(x) = exp(-1 / (1 - x²))` on `(-1, 1)` and its derivatives.
//!
//! Every derivative has the form `b^(k)(x) = b(x) P_k(x) / (1 - x²)^(2k)` with
//! `P_0 = 1` and `P_{k+1} = -2x P_k + q² P_k' + 4k x q P_k`, `q = 1 - x²`.

use serde::{Deserialize, Serialize};

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

/// Numerator polynomials `P_0 ..= P_order`.
fn numerators(order: usize) -> Vec<Vec<f64>> {
    let q = [1.0, 0.0, -1.0];
    let q2 = poly_mul(&q, &q);
    let mut polys = vec![vec![1.0]];
    for k in 0..order {
        let p = &polys[k];
        let t1 = poly_mul(&[0.0, -2.0], p);
        let t2 = poly_mul(&q2, &poly_deriv(p));
        let t3 = poly_mul(&poly_mul(&[0.0, 4.0 * k as f64], &q), p);
        polys.push(poly_add(&poly_add(&t1, &t2), &t3));
    }
    polys
}

/// Precomputed derivative table of the standard bump.
#[derive(Debug, Clone)]
pub struct Bump {
    polys: Vec<Vec<f64>>,
}

impl Bump {
    pub fn new(max_order: usize) -> Self {
        Self {
            polys: numerators(max_order),
        }
    }

    pub fn max_order(&self) -> usize {
        self.polys.len() - 1
    }

    /// `b^(k)(x)`; zero outside `(-1, 1)`. Panics if `k > max_order`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        let q = 1.0 - x * x;
        if q <= 0.0 {
            return 0.0;
        }
        let b = (-1.0 / q).exp();
        if b == 0.0 {
            return 0.0;
        }
        b * poly_eval(&self.polys[k], x) / q.powi(2 * k as i32)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

/// A test function `ψ(x) = b((x - center) / radius)`, compactly supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub radius: f64,
}

thread_local! {
    static BUMP2: Bump = Bump::new(2);
}

impl TestFunction {
    pub fn new(center: f64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    fn t(&self, x: f64) -> f64 {
        (x - self.center) / self.radius
    }

    pub fn value(&self, x: f64) -> f64 {
        BUMP2.with(|b| b.value(self.t(x)))
    }

    pub fn d1(&self, x: f64) -> f64 {
        BUMP2.with(|b| b.derivative(1, self.t(x))) / self.radius
    }

    pub fn d2(&self, x: f64) -> f64 {
        BUMP2.with(|b| b.derivative(2, self.t(x))) / (self.radius * self.radius)
    }

    /// `ψ^(k)(x)` for arbitrary order.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        match k {
            0 => self.value(x),
            1 => self.d1(x),
            2 => self.d2(x),
            _ => Bump::new(k).derivative(k, self.t(x)) / self.radius.powi(k as i32),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_central_differences() {
        let b = Bump::new(3);
        let h = 1e-5;
        for &x in &[-0.8, -0.3, 0.0, 0.2, 0.65] {
            for k in 0..3 {
                let fd = (b.derivative(k, x + h) - b.derivative(k, x - h)) / (2.0 * h);
                let exact = b.derivative(k + 1, x);
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "k={k} x={x}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let b = Bump::new(2);
        for &x in &[-1.0, 1.0, 1.5, -3.0] {
            for k in 0..=2 {
                assert_eq!(b.derivative(k, x), 0.0);
            }
        }
        assert!((b.value(0.0) - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn test_function_scaling() {
        let psi = TestFunction::new(0.4, 0.1);
        let h = 1e-6;
        let x = 0.43;
        let fd = (psi.d1(x + h) - psi.d1(x - h)) / (2.0 * h);
        assert!((fd - psi.d2(x)).abs() < 1e-4 * psi.d2(x).abs().max(1.0));
        let (lo, hi) = psi.support();
        assert!((lo - 0.3).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
    }
}
