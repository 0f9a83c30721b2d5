//! Exact integer / rational matrices, Hermite and Smith normal forms, signatures.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<Rat>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(cols: &[Vec<T>], nrows: usize) -> Result<Self> {
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::Dimension("column length mismatch".into()));
        }
        Ok(Self::from_fn(nrows, cols.len(), |i, j| cols[j][i].clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("hstack {} vs {} rows", self.rows, other.rows)));
        }
        let c = self.cols;
        Ok(Self::from_fn(self.rows, c + other.cols, |i, j| {
            if j < c { self.get(i, j).clone() } else { other.get(i, j - c).clone() }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!("vstack {} vs {} cols", self.cols, other.cols)));
        }
        let r = self.rows;
        Ok(Self::from_fn(r + other.rows, self.cols, |i, j| {
            if i < r { self.get(i, j).clone() } else { other.get(i - r, j).clone() }
        }))
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let (r, c) = (self.rows, self.cols);
        Self::from_fn(r + other.rows, c + other.cols, |i, j| {
            if i < r && j < c {
                self.get(i, j).clone()
            } else if i >= r && j >= c {
                other.get(i - r, j - c).clone()
            } else {
                T::zero()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl<T> Matrix<T>
where
    T: Clone + PartialEq + Zero + One + std::ops::Neg<Output = T>,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T> + std::ops::Add<&'a T, Output = T> + std::ops::Sub<&'a T, Output = T>,
{
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j) + &(a * b);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Dimension("matrix-vector length".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, x) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, j) * x);
                }
                acc
            })
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("sum of different shapes".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("difference of different shapes".into()));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j)))
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| -self.get(i, j).clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// row_a += c * row_b
    pub fn add_row_multiple(&mut self, a: usize, b: usize, c: &T) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(a, j) + &(c * self.get(b, j));
            self.set(a, j, v);
        }
    }

    /// col_a += c * col_b
    pub fn add_col_multiple(&mut self, a: usize, b: usize, c: &T) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, a) + &(c * self.get(i, b));
            self.set(i, a, v);
        }
    }

    pub fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j).clone();
            self.set(a, j, v);
        }
    }

    pub fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, a).clone();
            self.set(i, a, v);
        }
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| Rat::from_integer(self.get(i, j).clone()))
    }

    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of non-square matrix".into()));
        }
        Ok(bareiss_det(self.clone()))
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().map(|d| d.abs().is_one()).unwrap_or(false)
    }

    /// Inverse of a unimodular matrix (exact, integer).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let inv = self.to_rat().inverse()?;
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = inv.get(i, j);
                if !v.is_integer() {
                    return Err(Error::Invalid("matrix is not unimodular".into()));
                }
                out.set(i, j, v.to_integer());
            }
        }
        Ok(out)
    }
}

impl RatMatrix {
    pub fn from_i64_frac(rows: &[Vec<(i64, i64)>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect()).collect())
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rat_to_f64(self.get(i, j))).collect())
            .collect()
    }

    /// Common denominator clearing: returns (integer matrix, positive scale) with self = M / scale.
    pub fn clear_denominators(&self) -> (IntMatrix, BigInt) {
        let mut l = BigInt::one();
        for x in &self.data {
            l = l.lcm(x.denom());
        }
        let m = IntMatrix::from_fn(self.rows, self.cols, |i, j| {
            let x = self.get(i, j);
            x.numer() * (&l / x.denom())
        });
        (m, l)
    }

    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok(Rat::one());
        }
        let (m, l) = self.clear_denominators();
        let d = bareiss_det(m);
        Ok(Rat::new(d, num_traits::pow(l, self.rows)))
    }

    pub fn rank(&self) -> usize {
        let (_, piv) = self.rref();
        piv.len()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = -m.get(i, c).clone();
                    m.add_row_multiple(i, r, &f);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(RatMatrix::zeros(0, 0));
        }
        let aug = self.hstack(&RatMatrix::identity(n))?;
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::Invalid("singular matrix".into()));
        }
        Ok(RatMatrix::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
    }

    /// Basis of the right kernel {x : A x = 0} over Q, as columns.
    pub fn kernel(&self) -> RatMatrix {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut out = RatMatrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, Rat::one());
            for (i, &p) in piv.iter().enumerate() {
                out.set(p, k, -r.get(i, f).clone());
            }
        }
        out
    }

    /// Some solution of A x = b over Q.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        let bm = RatMatrix::from_fn(self.rows, 1, |i, _| b[i].clone());
        let aug = self.hstack(&bm).ok()?;
        let (r, piv) = aug.rref();
        if piv.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (i, &p) in piv.iter().enumerate() {
            x[p] = r.get(i, self.cols).clone();
        }
        Some(x)
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // very large numerators: scale down through the integer part
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn bareiss_det(mut m: IntMatrix) -> BigInt {
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m.get(k, k).is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m.get(i, k).is_zero()) else { return BigInt::zero() };
            m.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                m.set(i, j, v);
            }
        }
        prev = m.get(k, k).clone();
    }
    sign * m.get(n - 1, n - 1).clone()
}

// ---------------------------------------------------------------------------
// Hermite normal form

/// Column-style HNF: H = A·U, U unimodular. Pivot columns come first with strictly increasing
/// pivot rows, positive pivots, and entries left of a pivot reduced into [0, pivot).
pub fn hermite_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (h, u, _) = hnf_with_pivots(a);
    (h, u)
}

/// HNF together with the pivot row of each nonzero column.
pub fn hnf_with_pivots(a: &IntMatrix) -> (IntMatrix, IntMatrix, Vec<usize>) {
    let mut h = a.clone();
    let n = a.cols();
    let mut u = IntMatrix::identity(n);
    let mut pivots = Vec::new();
    let mut c = 0;
    for i in 0..a.rows() {
        if c == n {
            break;
        }
        // euclid across columns c..n on row i
        loop {
            let mut best: Option<usize> = None;
            for j in c..n {
                let v = h.get(i, j);
                if !v.is_zero() && best.is_none_or(|b| v.abs() < h.get(i, b).abs()) {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            h.swap_cols(c, b);
            u.swap_cols(c, b);
            let mut done = true;
            for j in c + 1..n {
                if h.get(i, j).is_zero() {
                    continue;
                }
                let q = h.get(i, j).div_floor(h.get(i, c));
                let nq = -q;
                h.add_col_multiple(j, c, &nq);
                u.add_col_multiple(j, c, &nq);
                if !h.get(i, j).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(i, c).is_zero() {
            continue;
        }
        if h.get(i, c).is_negative() {
            h.negate_col(c);
            u.negate_col(c);
        }
        for j in 0..c {
            let q = h.get(i, j).div_floor(h.get(i, c));
            if !q.is_zero() {
                let nq = -q;
                h.add_col_multiple(j, c, &nq);
                u.add_col_multiple(j, c, &nq);
            }
        }
        pivots.push(i);
        c += 1;
    }
    (h, u, pivots)
}

/// Integer basis (columns) of the kernel {x ∈ Z^n : A x = 0}.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let (_, u, piv) = hnf_with_pivots(a);
    let r = piv.len();
    let cols: Vec<usize> = (r..a.cols()).collect();
    u.select_columns(&cols)
}

/// Primitive closure (Q-span ∩ Z^n) of the column lattice, in canonical HNF (nonzero columns only).
pub fn saturate(a: &IntMatrix) -> IntMatrix {
    let n = a.rows();
    if a.cols() == 0 || a.is_zero() {
        return IntMatrix::zeros(n, 0);
    }
    // left kernel K (rows annihilating the columns), then the integer kernel of K
    let k = integer_kernel(&a.transpose());
    let sat = if k.cols() == 0 { IntMatrix::identity(n) } else { integer_kernel(&k.transpose()) };
    lattice_basis(&sat)
}

/// Canonical basis of a column lattice: the nonzero columns of its HNF.
pub fn lattice_basis(a: &IntMatrix) -> IntMatrix {
    let (h, _, piv) = hnf_with_pivots(a);
    let cols: Vec<usize> = (0..piv.len()).collect();
    h.select_columns(&cols)
}

// ---------------------------------------------------------------------------
// Smith normal form

#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    /// A = U·D·V
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// P·A·Q = D with P = U⁻¹, Q = V⁻¹
    pub p: IntMatrix,
    pub q: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }

    /// Invariant factors larger than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|x| !x.is_zero() && !x.is_one()).collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut p = IntMatrix::identity(m);
    let mut pinv = IntMatrix::identity(m);
    let mut q = IntMatrix::identity(n);
    let mut qinv = IntMatrix::identity(n);

    // row_a += c row_b on D and P; inverse: row_b -= c row_a... tracked as column op on pinv
    macro_rules! row_add {
        ($a:expr, $b:expr, $c:expr) => {{
            let c: BigInt = $c;
            d.add_row_multiple($a, $b, &c);
            p.add_row_multiple($a, $b, &c);
            let nc = -c;
            pinv.add_col_multiple($b, $a, &nc);
        }};
    }
    macro_rules! col_add {
        ($a:expr, $b:expr, $c:expr) => {{
            let c: BigInt = $c;
            d.add_col_multiple($a, $b, &c);
            q.add_col_multiple($a, $b, &c);
            let nc = -c;
            qinv.add_row_multiple($b, $a, &nc);
        }};
    }

    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let v = d.get(i, j);
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < d.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap_rows(t, bi);
        p.swap_rows(t, bi);
        pinv.swap_cols(t, bi);
        d.swap_cols(t, bj);
        q.swap_cols(t, bj);
        qinv.swap_rows(t, bj);

        let mut clean = true;
        for i in t + 1..m {
            if d.get(i, t).is_zero() {
                continue;
            }
            let f = d.get(i, t).div_floor(d.get(t, t));
            row_add!(i, t, -f);
            if !d.get(i, t).is_zero() {
                clean = false;
            }
        }
        for j in t + 1..n {
            if d.get(t, j).is_zero() {
                continue;
            }
            let f = d.get(t, j).div_floor(d.get(t, t));
            col_add!(j, t, -f);
            if !d.get(t, j).is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: pull an offending row into row t
        let piv = d.get(t, t).clone();
        let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&piv)));
        if let Some(i) = bad {
            row_add!(t, i, BigInt::one());
            continue;
        }
        if piv.is_negative() {
            d.negate_row(t);
            p.negate_row(t);
            pinv.negate_col(t);
        }
        t += 1;
    }
    SmithDecomposition { u: pinv, d, v: qinv, p, q }
}

/// Nonzero invariant factors of an integer matrix given as sparse columns, without transforms.
/// Unit pivots are eliminated sparsely first; the (usually tiny) remainder goes through the dense SNF.
pub fn sparse_invariant_factors(nrows: usize, columns: &[Vec<(usize, i64)>]) -> Vec<BigInt> {
    use std::collections::{BTreeMap, BTreeSet};
    let mut cols: Vec<BTreeMap<usize, i64>> = columns
        .iter()
        .map(|c| c.iter().filter(|(_, v)| *v != 0).cloned().collect())
        .collect();
    let mut row_index: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nrows];
    for (j, c) in cols.iter().enumerate() {
        for &r in c.keys() {
            row_index[r].insert(j);
        }
    }
    let mut alive: BTreeSet<usize> = (0..cols.len()).filter(|&j| !cols[j].is_empty()).collect();
    let mut units = 0usize;
    let mut overflow = false;
    'outer: loop {
        let mut found = None;
        for &j in &alive {
            if let Some((&r, _)) = cols[j].iter().find(|(_, v)| v.abs() == 1) {
                found = Some((r, j));
                break;
            }
        }
        let Some((r, j)) = found else { break };
        let pivot_col = std::mem::take(&mut cols[j]);
        alive.remove(&j);
        for &rr in pivot_col.keys() {
            row_index[rr].remove(&j);
        }
        let pv = pivot_col[&r];
        let others: Vec<usize> = row_index[r].iter().cloned().collect();
        for o in others {
            // col_o -= (a_ro / pv) col_j ; pv = ±1
            let f = cols[o][&r] * pv;
            for (&rr, &v) in &pivot_col {
                let cur = cols[o].get(&rr).cloned().unwrap_or(0);
                let Some(nv) = v.checked_mul(f).and_then(|x| cur.checked_sub(x)) else {
                    overflow = true;
                    break 'outer;
                };
                if nv == 0 {
                    cols[o].remove(&rr);
                    row_index[rr].remove(&o);
                } else {
                    if cur == 0 {
                        row_index[rr].insert(o);
                    }
                    cols[o].insert(rr, nv);
                }
            }
            if cols[o].is_empty() {
                alive.remove(&o);
            }
        }
        // row r is now only in the pivot column; drop row and column
        row_index[r].clear();
        units += 1;
    }
    if overflow {
        let dense = IntMatrix::from_fn(nrows, columns.len(), |i, j| {
            columns[j].iter().filter(|(r, _)| *r == i).map(|(_, v)| int(*v)).fold(BigInt::zero(), |a, b| a + b)
        });
        return smith_normal_form(&dense).diagonal().into_iter().filter(|x| !x.is_zero()).collect();
    }
    let rest: Vec<usize> = alive.into_iter().collect();
    let mut out = vec![BigInt::one(); units];
    if !rest.is_empty() {
        let rows: Vec<usize> = {
            let mut s = BTreeSet::new();
            for &j in &rest {
                s.extend(cols[j].keys().cloned());
            }
            s.into_iter().collect()
        };
        let dense = IntMatrix::from_fn(rows.len(), rest.len(), |i, j| int(*cols[rest[j]].get(&rows[i]).unwrap_or(&0)));
        out.extend(smith_normal_form(&dense).diagonal().into_iter().filter(|x| !x.is_zero()));
        out.sort();
    }
    out
}

/// Solve A x = b over Z; None if no integer solution exists.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    if b.len() != a.rows() {
        return None;
    }
    let s = smith_normal_form(a);
    let pb = s.p.mul_vec(b).ok()?;
    let r = a.rows().min(a.cols());
    let mut y = vec![BigInt::zero(); a.cols()];
    for i in 0..a.rows() {
        let di = if i < r { s.d.get(i, i).clone() } else { BigInt::zero() };
        if di.is_zero() {
            if !pb[i].is_zero() {
                return None;
            }
        } else {
            if !pb[i].is_multiple_of(&di) {
                return None;
            }
            y[i] = &pb[i] / &di;
        }
    }
    s.q.mul_vec(&y).ok()
}

// ---------------------------------------------------------------------------
// Signature

/// Signature (positive minus negative inertia) of a symmetric rational matrix, by congruence
/// diagonalization.
pub fn signature(s: &RatMatrix) -> Result<i64> {
    if !s.is_symmetric() {
        return Err(Error::Invalid("signature of a non-symmetric matrix".into()));
    }
    let mut m = s.clone();
    let n = m.rows();
    let mut sig = 0i64;
    let mut i = 0;
    while i < n {
        if m.get(i, i).is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m.get(j, j).is_zero()) {
                m.swap_rows(i, j);
                m.swap_cols(i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !m.get(i, j).is_zero()) {
                // x_i -> x_i + x_j makes the diagonal 2 m_ij
                let one = Rat::one();
                m.add_row_multiple(i, j, &one);
                m.add_col_multiple(i, j, &one);
            } else {
                i += 1;
                continue;
            }
        }
        let piv = m.get(i, i).clone();
        for j in i + 1..n {
            if m.get(j, i).is_zero() {
                continue;
            }
            let f = -(m.get(j, i) / &piv);
            m.add_row_multiple(j, i, &f);
            m.add_col_multiple(j, i, &f);
        }
        sig += if piv.is_positive() { 1 } else { -1 };
        i += 1;
    }
    Ok(sig)
}

// ---------------------------------------------------------------------------
// Sparse exact elimination

pub type SparseVec = std::collections::BTreeMap<usize, Rat>;

fn axpy(v: &mut SparseVec, f: &Rat, x: &SparseVec) {
    for (r, a) in x {
        let nv = v.get(r).cloned().unwrap_or_else(Rat::zero) - f * a;
        if nv.is_zero() {
            v.remove(r);
        } else {
            v.insert(*r, nv);
        }
    }
}

/// Incremental column reduction over Q. Every stored vector is fully reduced against the others'
/// pivot rows (its largest row index is its pivot), and carries its expression (`combo`) in
/// terms of caller-chosen labels.
#[derive(Clone, Debug, Default)]
pub struct SparseElim {
    pivots: std::collections::BTreeMap<usize, (SparseVec, SparseVec)>,
}

impl SparseElim {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce v (with running combination) against the stored pivots.
    pub fn reduce(&self, mut v: SparseVec, mut combo: SparseVec) -> (SparseVec, SparseVec) {
        let mut cursor: Option<usize> = None;
        loop {
            let next = match cursor {
                None => v.keys().next_back().copied(),
                Some(c) => v.range(..c).next_back().map(|(k, _)| *k),
            };
            let Some(r) = next else { break };
            cursor = Some(r);
            if let Some((p, pc)) = self.pivots.get(&r) {
                let f = &v[&r] / &p[&r];
                axpy(&mut v, &f, p);
                axpy(&mut combo, &f, pc);
            }
        }
        (v, combo)
    }

    /// Insert a vector; returns its reduced pivot entry, or None (and the dependency) if it lies
    /// in the span.
    pub fn insert(&mut self, v: SparseVec, combo: SparseVec) -> std::result::Result<Rat, SparseVec> {
        let (v, combo) = self.reduce(v, combo);
        match v.iter().next_back() {
            None => Err(combo),
            Some((&r, x)) => {
                let x = x.clone();
                self.pivots.insert(r, (v, combo));
                Ok(x)
            }
        }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone(), SparseVec::new()).0.is_empty()
    }
}

pub fn unit(i: usize) -> SparseVec {
    std::iter::once((i, Rat::one())).collect()
}

pub fn sparse_from_i64(col: &[(usize, i64)]) -> SparseVec {
    col.iter().filter(|(_, v)| *v != 0).map(|&(r, v)| (r, Rat::from_integer(int(v)))).collect()
}

/// |det| of a square matrix given by sparse columns (exact).
pub fn sparse_abs_det(cols: &[SparseVec]) -> Rat {
    let mut e = SparseElim::new();
    let mut d = Rat::one();
    for c in cols {
        match e.insert(c.clone(), SparseVec::new()) {
            Ok(p) => d *= p,
            Err(_) => return Rat::zero(),
        }
    }
    d.abs()
}

/// Scale a rational sparse vector to a primitive integer vector with positive leading entry.
pub fn primitive(v: &SparseVec) -> SparseVec {
    let mut l = BigInt::one();
    for x in v.values() {
        l = l.lcm(x.denom());
    }
    let mut g = BigInt::zero();
    for x in v.values() {
        g = g.gcd(&(x.numer() * (&l / x.denom())));
    }
    if g.is_zero() {
        return v.clone();
    }
    let mut s = Rat::new(l, g);
    if v.values().next().is_some_and(|x| x.is_negative()) {
        s = -s;
    }
    v.iter().map(|(k, x)| (*k, x * &s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(r: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(r).unwrap()
    }

    #[test]
    fn hnf_small() {
        let a = im(&[vec![2, 4], vec![0, 2]]);
        let (h, u) = hermite_normal_form(&a);
        assert_eq!(h, im(&[vec![2, 0], vec![0, 2]]));
        assert_eq!(a.mul(&u).unwrap(), h);
        assert!(u.is_unimodular());
    }

    #[test]
    fn hnf_degenerate() {
        let z = IntMatrix::zeros(3, 2);
        assert_eq!(hermite_normal_form(&z).0, z);
        let i = IntMatrix::identity(3);
        let (h, u) = hermite_normal_form(&i);
        assert_eq!(h, i);
        assert_eq!(u, i);
    }

    #[test]
    fn snf_small() {
        let a = im(&[vec![2, 0], vec![0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), vec![int(1), int(6)]);
        assert_eq!(s.u.mul(&s.d).unwrap().mul(&s.v).unwrap(), a);
        assert_eq!(smith_normal_form(&im(&[vec![0]])).diagonal(), vec![int(0)]);
    }

    #[test]
    fn sparse_factors_agree_with_dense() {
        // boundary of a triangle plus a doubled column
        let cols = vec![vec![(0, -1), (1, 1)], vec![(1, -1), (2, 1)], vec![(0, -2), (2, 2)]];
        let f = sparse_invariant_factors(3, &cols);
        assert_eq!(f, vec![int(1), int(1)]);
        let cols = vec![vec![(0, 2)], vec![(1, 3)]];
        assert_eq!(sparse_invariant_factors(2, &cols), vec![int(1), int(6)]);
    }

    #[test]
    fn signature_examples() {
        let d = RatMatrix::from_i64_frac(&[vec![(1, 1), (0, 1)], vec![(0, 1), (-1, 1)]]).unwrap();
        assert_eq!(signature(&d).unwrap(), 0);
        let g = RatMatrix::from_i64_frac(&[
            vec![(0, 1), (1, 2), (-1, 2)],
            vec![(1, 2), (0, 1), (-1, 2)],
            vec![(-1, 2), (-1, 2), (0, 1)],
        ])
        .unwrap();
        assert_eq!(signature(&g).unwrap(), -1);
        let ns = RatMatrix::from_i64_frac(&[vec![(0, 1), (1, 1)], vec![(0, 1), (0, 1)]]).unwrap();
        assert!(signature(&ns).is_err());
    }

    #[test]
    fn saturation() {
        let a = im(&[vec![2], vec![4]]);
        assert_eq!(saturate(&a), im(&[vec![1], vec![2]]));
        let k = integer_kernel(&im(&[vec![1, 1, 1]]));
        assert_eq!(k.cols(), 2);
        assert!(im(&[vec![1, 1, 1]]).mul(&k).unwrap().is_zero());
    }

    #[test]
    fn integer_solve() {
        let a = im(&[vec![2, 4], vec![1, 3]]);
        let x = solve_integer(&a, &[int(2), int(2)]).unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), vec![int(2), int(2)]);
        assert!(solve_integer(&im(&[vec![2]]), &[int(1)]).is_none());
    }
}
