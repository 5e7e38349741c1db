//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` slots hold
/// fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (off >= 0 && (off as usize) < self.width).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets entry `(i, j)`. Panics if it lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.slot(i, j).expect("in band");
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `M x = rhs` by Gaussian elimination with partial pivoting,
    /// consuming the matrix.
    ///
    /// A pivot below `1e-14` times the largest entry of its column block is
    /// reported as [`Error::SingularSystem`].
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::Precondition(format!(
                "right-hand side has length {}, matrix has {n} rows",
                rhs.len()
            )));
        }
        let mut b = rhs.to_vec();
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::SingularSystem { pivot: 0.0, row: 0 });
        }
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let (mut p, mut best) = (k, self.get(k, k).abs());
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if !(best > 1e-14 * scale) {
                return Err(Error::SingularSystem { pivot: best, row: k });
            }
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, c) = (self.slot(k, j).unwrap(), self.slot(p, j).unwrap());
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            for i in k + 1..=last {
                let lik = self.get(i, k) / piv;
                if lik == 0.0 {
                    continue;
                }
                let si = self.slot(i, k).unwrap();
                self.data[si] = 0.0;
                for j in k + 1..=jmax {
                    let skj = self.slot(k, j).unwrap();
                    let sij = self.slot(i, j).unwrap();
                    self.data[sij] -= lik * self.data[skj];
                }
                b[i] -= lik * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let jmax = (k + reach).min(n - 1);
            let s: f64 = (k + 1..=jmax).map(|j| self.get(k, j) * x[j]).sum();
            x[k] = (b[k] - s) / self.get(k, k);
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularSystem {
                pivot: self.get(i, i).abs(),
                row: i,
            });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_poisson() {
        // -u'' = 2 on (0,1), u(0)=u(1)=0  =>  u = x(1-x), exact for central differences
        let n = 49;
        let h = 1.0 / (n + 1) as f64;
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
            }
        }
        let x = m.solve(&vec![2.0 * h * h; n]).unwrap();
        for (i, v) in x.iter().enumerate() {
            let xi = (i + 1) as f64 * h;
            assert!((v - xi * (1.0 - xi)).abs() < 1e-13);
        }
    }

    #[test]
    fn pivoting_needed() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 2.0);
        m.set(2, 2, 1.0);
        let a = m.clone();
        let x = m.solve(&[1.0, 2.0, 3.0]).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn random_band_against_residual() {
        let n = 40;
        let mut m = BandMatrix::zeros(n, 3, 2);
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 2).min(n - 1) {
                m.set(i, j, rnd());
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let a = m.clone();
        let x = m.solve(&b).unwrap();
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-9 * (1.0 + bi.abs()));
        }
    }

    #[test]
    fn singular_reported() {
        let mut m = BandMatrix::zeros(2, 1, 1);
        m.set(0, 0, 1.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 2.0);
        m.set(1, 1, 4.0);
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::SingularSystem { row: 1, .. })));
    }

    #[test]
    #[should_panic]
    fn set_outside_band_panics() {
        let mut m = BandMatrix::zeros(5, 1, 1);
        m.set(0, 3, 1.0);
    }
}
