//! Exact phases e^{iπθ} (θ ∈ Q mod 2) and small dense complex matrices.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::f64::consts::PI;

use crate::zlattice::{rat_to_f64, Rat};

/// Reduce θ into [0, 2).
pub fn reduce_mod2(theta: &Rat) -> Rat {
    let two = BigInt::from(2);
    let den = theta.denom().clone();
    let modulus = &two * &den;
    let n = theta.numer().mod_floor(&modulus);
    Rat::new(n, den)
}

/// e^{iπθ}
pub fn expi_pi(theta: &Rat) -> Complex64 {
    let t = reduce_mod2(theta);
    // exact special values keep eighth roots clean
    let (n, d) = (t.numer().clone(), t.denom().clone());
    if d == BigInt::from(1) || d == BigInt::from(2) || d == BigInt::from(4) {
        let k = (n * (BigInt::from(4) / d)).to_string().parse::<i64>().unwrap_or(0);
        return eighth_root(k);
    }
    let x = PI * rat_to_f64(&t);
    Complex64::new(x.cos(), x.sin())
}

/// e^{iπk/4}
pub fn eighth_root(k: i64) -> Complex64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match k.rem_euclid(8) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(h, h),
        2 => Complex64::new(0.0, 1.0),
        3 => Complex64::new(-h, h),
        4 => Complex64::new(-1.0, 0.0),
        5 => Complex64::new(-h, -h),
        6 => Complex64::new(0.0, -1.0),
        _ => Complex64::new(h, -h),
    }
}

pub fn is_zero_mod2(theta: &Rat) -> bool {
    reduce_mod2(theta).is_zero()
}

pub fn abs_rat(x: &Rat) -> Rat {
    x.abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, o.rows, "complex matrix product shapes");
        let mut out = CMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.data[l * o.cols + j];
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.data[i * self.cols + j] * v[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn kron(&self, o: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out.set(i * o.rows + k, j * o.cols + l, a * o.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, o: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// max |U*U − I|
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&CMatrix::identity(self.cols))
    }
}

pub fn max_abs_diff_vec(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zlattice::rat;

    #[test]
    fn reduction() {
        assert_eq!(reduce_mod2(&rat(-1, 3)), rat(5, 3));
        assert_eq!(reduce_mod2(&rat(7, 2)), rat(3, 2));
        assert!(is_zero_mod2(&rat(4, 1)));
    }

    #[test]
    fn roots() {
        let z = expi_pi(&rat(1, 2));
        assert_eq!(z, Complex64::new(0.0, 1.0));
        let w = expi_pi(&rat(2, 3));
        assert!((w - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }
}
