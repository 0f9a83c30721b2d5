//! The lattice (Z^{2g}, ω), rational Lagrangians, the Maslov–Kashiwara index and Sp(2g,Z) words.
//!
//! Coordinates are (e_1..e_g, f_1..f_g) with ω(x,y) = xᵀJy, J = [[0,I],[-I,0]], so ω(e_i,f_j) = δ_ij.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zlattice::{
    hnf_with_pivots, int, integer_kernel, lattice_basis, saturate, signature, smith_normal_form, solve_integer,
    IntMatrix, Rat, RatMatrix,
};

pub fn symplectic_form(g: usize) -> IntMatrix {
    IntMatrix::from_fn(2 * g, 2 * g, |i, j| {
        if j == i + g {
            int(1)
        } else if i == j + g {
            int(-1)
        } else {
            int(0)
        }
    })
}

pub fn omega_int(x: &[BigInt], y: &[BigInt]) -> BigInt {
    let g = x.len() / 2;
    let mut s = BigInt::zero();
    for i in 0..g {
        s += &x[i] * &y[g + i] - &x[g + i] * &y[i];
    }
    s
}

pub fn omega_rat(x: &[Rat], y: &[Rat]) -> Rat {
    let g = x.len() / 2;
    let mut s = Rat::zero();
    for i in 0..g {
        s += &x[i] * &y[g + i] - &x[g + i] * &y[i];
    }
    s
}

/// Gram matrix ω(a_i, b_j) of two families of columns.
pub fn omega_matrix(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let ac = a.columns();
    let bc = b.columns();
    IntMatrix::from_fn(ac.len(), bc.len(), |i, j| omega_int(&ac[i], &bc[j]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LagrangianDiagnostic {
    Ok,
    WrongRowCount { rows: usize, expected: usize },
    NotPrimitive { invariant_factors: Vec<BigInt> },
    NotIsotropic { i: usize, j: usize, value: BigInt },
    WrongRank { rank: usize, genus: usize },
}

impl LagrangianDiagnostic {
    pub fn is_ok(&self) -> bool {
        matches!(self, LagrangianDiagnostic::Ok)
    }
}

impl std::fmt::Display for LagrangianDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LagrangianDiagnostic::Ok => write!(f, "Lagrangian"),
            LagrangianDiagnostic::WrongRowCount { rows, expected } => {
                write!(f, "expected {expected} rows, got {rows}")
            }
            LagrangianDiagnostic::NotPrimitive { invariant_factors } => {
                write!(f, "not primitive (invariant factors {invariant_factors:?})")
            }
            LagrangianDiagnostic::NotIsotropic { i, j, value } => {
                write!(f, "not isotropic: omega(gen {i}, gen {j}) = {value}")
            }
            LagrangianDiagnostic::WrongRank { rank, genus } => {
                write!(f, "rank {rank}, a Lagrangian needs rank {genus}")
            }
        }
    }
}

/// Checks primitivity, isotropy and rank, in that order, for a candidate generator matrix.
pub fn is_lagrangian(genus: usize, gens: &IntMatrix) -> Result<LagrangianDiagnostic> {
    if gens.rows() != 2 * genus {
        return Err(Error::Dimension(format!("{} rows for genus {}", gens.rows(), genus)));
    }
    let snf = smith_normal_form(gens);
    let bad: Vec<BigInt> = snf.diagonal().into_iter().filter(|d| !d.is_zero() && !d.is_one()).collect();
    if !bad.is_empty() {
        return Ok(LagrangianDiagnostic::NotPrimitive { invariant_factors: bad });
    }
    let cols = gens.columns();
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let w = omega_int(&cols[i], &cols[j]);
            if !w.is_zero() {
                return Ok(LagrangianDiagnostic::NotIsotropic { i, j, value: w });
            }
        }
    }
    let rank = snf.rank();
    if rank != genus {
        return Ok(LagrangianDiagnostic::WrongRank { rank, genus });
    }
    Ok(LagrangianDiagnostic::Ok)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lagrangian {
    genus: usize,
    gens: IntMatrix,
}

impl Lagrangian {
    /// Validates and canonicalizes (HNF of the column lattice).
    pub fn new(genus: usize, gens: &IntMatrix) -> Result<Self> {
        let d = is_lagrangian(genus, gens)?;
        if !d.is_ok() {
            return Err(Error::NotLagrangian(d.to_string()));
        }
        Ok(Lagrangian { genus, gens: lattice_basis(gens) })
    }

    /// Lagrangian spanned (over Q) by the given columns; the lattice is saturated first.
    pub fn from_span(genus: usize, span: &IntMatrix) -> Result<Self> {
        if span.rows() != 2 * genus {
            return Err(Error::Dimension(format!("{} rows for genus {}", span.rows(), genus)));
        }
        Self::new(genus, &saturate(span))
    }

    /// span(e_1..e_g)
    pub fn standard(genus: usize) -> Self {
        let gens = IntMatrix::from_fn(2 * genus, genus, |i, j| if i == j { int(1) } else { int(0) });
        Lagrangian { genus, gens }
    }

    /// span(f_1..f_g)
    pub fn dual_standard(genus: usize) -> Self {
        let gens = IntMatrix::from_fn(2 * genus, genus, |i, j| if i == j + genus { int(1) } else { int(0) });
        Lagrangian { genus, gens }
    }

    pub fn from_i64_columns(genus: usize, cols: &[Vec<i64>]) -> Result<Self> {
        let m = IntMatrix::from_columns(
            &cols.iter().map(|c| c.iter().map(|&x| int(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            2 * genus,
        )?;
        Self::new(genus, &m)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn gens(&self) -> &IntMatrix {
        &self.gens
    }

    pub fn to_json(&self) -> LagrangianJson {
        LagrangianJson {
            genus: self.genus,
            gens: self.gens.columns().iter().map(|c| c.iter().map(|x| x.to_string().parse().unwrap_or(0)).collect()).collect(),
        }
    }

    pub fn from_json(j: &LagrangianJson) -> Result<Self> {
        Self::from_i64_columns(j.genus, &j.gens)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        // v ∈ L ⇔ v is ω-orthogonal to L (L is its own complement)
        self.gens.columns().iter().all(|c| omega_int(c, v).is_zero())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LagrangianJson {
    pub genus: usize,
    pub gens: Vec<Vec<i64>>,
}

/// Gram matrix of Q(x1,x2,x3) = ω(x1,x2)+ω(x2,x3)+ω(x3,x1) on L1⊕L2⊕L3 in the generator bases.
pub fn maslov_gram(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian) -> Result<RatMatrix> {
    let g = l1.genus;
    if l2.genus != g || l3.genus != g {
        return Err(Error::Dimension("Maslov index of Lagrangians in different lattices".into()));
    }
    let w = [&l1.gens, &l2.gens, &l3.gens];
    let half = Rat::new(int(1), int(2));
    let mut q = RatMatrix::zeros(3 * g, 3 * g);
    // cyclic pairs (0,1), (1,2), (2,0)
    for (a, b) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let m = omega_matrix(w[a], w[b]);
        for i in 0..g {
            for j in 0..g {
                let v = Rat::from_integer(m.get(i, j).clone()) * &half;
                let (r, c) = (a * g + i, b * g + j);
                let cur = q.get(r, c) + &v;
                q.set(r, c, cur);
                let cur = q.get(c, r) + &v;
                q.set(c, r, cur);
            }
        }
    }
    Ok(q)
}

/// Maslov–Kashiwara index τ(L1,L2,L3): signature of Q on L1⊕L2⊕L3.
pub fn maslov_index(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian) -> Result<i64> {
    signature(&maslov_gram(l1, l2, l3)?)
}

// ---------------------------------------------------------------------------
// Sp(2g, Z)

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpElement {
    m: IntMatrix,
}

impl SpElement {
    pub fn new(m: IntMatrix) -> Result<Self> {
        if !m.is_square() || !m.rows().is_multiple_of(2) {
            return Err(Error::NotSymplectic(format!("shape {}x{}", m.rows(), m.cols())));
        }
        let j = symplectic_form(m.rows() / 2);
        if m.transpose().mul(&j)?.mul(&m)? != j {
            return Err(Error::NotSymplectic("MᵀJM ≠ J".into()));
        }
        Ok(SpElement { m })
    }

    pub fn identity(g: usize) -> Self {
        SpElement { m: IntMatrix::identity(2 * g) }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_i64(rows)?)
    }

    pub fn genus(&self) -> usize {
        self.m.rows() / 2
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn compose(&self, o: &SpElement) -> SpElement {
        SpElement { m: self.m.mul(&o.m).expect("same genus") }
    }

    /// M⁻¹ = -J Mᵀ J
    pub fn inverse(&self) -> SpElement {
        let j = symplectic_form(self.genus());
        SpElement { m: j.mul(&self.m.transpose()).unwrap().mul(&j).unwrap().neg() }
    }

    pub fn is_identity(&self) -> bool {
        self.m == IntMatrix::identity(self.m.rows())
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.m.mul_vec(v).expect("length 2g")
    }

    pub fn apply_rat(&self, v: &[Rat]) -> Vec<Rat> {
        self.m.to_rat().mul_vec(v).expect("length 2g")
    }

    /// g=1 generator S = [[0,1],[-1,0]].
    pub fn s() -> Self {
        SpElement { m: IntMatrix::from_i64(&[vec![0, 1], vec![-1, 0]]).unwrap() }
    }

    /// g=1 generator T = [[1,1],[0,1]].
    pub fn t() -> Self {
        SpElement { m: IntMatrix::from_i64(&[vec![1, 1], vec![0, 1]]).unwrap() }
    }

    pub fn power(&self, n: i64) -> SpElement {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = SpElement::identity(self.genus());
        for _ in 0..n.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    /// h ⊔ h' acting on the direct-sum lattice.
    pub fn direct_sum(&self, o: &SpElement) -> SpElement {
        let (g1, g2) = (self.genus(), o.genus());
        let e1 = DirectSum::new(g1, g2);
        let mut m = IntMatrix::zeros(2 * (g1 + g2), 2 * (g1 + g2));
        for i in 0..2 * g1 {
            for j in 0..2 * g1 {
                m.set(e1.first(i), e1.first(j), self.m.get(i, j).clone());
            }
        }
        for i in 0..2 * g2 {
            for j in 0..2 * g2 {
                m.set(e1.second(i), e1.second(j), o.m.get(i, j).clone());
            }
        }
        SpElement { m }
    }
}

/// act_on_lagrangian: canonical generators of M·L.
pub fn act_on_lagrangian(m: &SpElement, l: &Lagrangian) -> Result<Lagrangian> {
    if m.genus() != l.genus {
        return Err(Error::Dimension("genus mismatch".into()));
    }
    let img = m.m.mul(&l.gens)?;
    Ok(Lagrangian { genus: l.genus, gens: lattice_basis(&img) })
}

/// Deterministic symplectic completion [W T] of the canonical generators W of L: ω(w_i,t_j) = δ_ij,
/// ω(t_i,t_j) = 0, and T reduced so that T[r_i][j] ∈ [0, W[r_i][i]) for i ≤ j (r_i the pivot row
/// of w_i). This normal form is unique, so block Lagrangians get block frames.
pub fn adapted_frame(l: &Lagrangian) -> SpElement {
    let g = l.genus;
    let w = &l.gens;
    if g == 0 {
        return SpElement { m: IntMatrix::zeros(0, 0) };
    }
    let j = symplectic_form(g);
    let wtj = w.transpose().mul(&j).unwrap();
    // particular solution of WᵀJ T = I, column by column
    let mut t = IntMatrix::zeros(2 * g, g);
    for c in 0..g {
        let rhs: Vec<BigInt> = (0..g).map(|i| if i == c { int(1) } else { int(0) }).collect();
        let x = solve_integer(&wtj, &rhs).expect("primitive Lagrangian admits a dual frame");
        for (r, v) in x.into_iter().enumerate() {
            t.set(r, c, v);
        }
    }
    // isotropy: T -> T + W Z with Z = strict upper part of A = TᵀJT
    let a = t.transpose().mul(&j).unwrap().mul(&t).unwrap();
    let z = IntMatrix::from_fn(g, g, |r, c| if r < c { a.get(r, c).clone() } else { int(0) });
    t = t.add(&w.mul(&z).unwrap()).unwrap();
    // reduction by symmetric S
    let (_, _, pivots) = hnf_with_pivots(w);
    for i in 0..g {
        let r = pivots[i];
        let d = w.get(r, i).clone();
        for c in i..g {
            let s = t.get(r, c).div_floor(&d);
            if s.is_zero() {
                continue;
            }
            let ns = -s;
            for row in 0..2 * g {
                let v = t.get(row, c) + &ns * w.get(row, i);
                t.set(row, c, v);
            }
            if c != i {
                for row in 0..2 * g {
                    let v = t.get(row, i) + &ns * w.get(row, c);
                    t.set(row, i, v);
                }
            }
        }
    }
    let m = w.hstack(&t).unwrap();
    debug_assert!(SpElement::new(m.clone()).is_ok());
    SpElement { m }
}

/// Index bookkeeping for Z^{2g1} ⊕ Z^{2g2} ≅ Z^{2(g1+g2)} with coordinates (e¹,e²,f¹,f²).
#[derive(Clone, Copy, Debug)]
pub struct DirectSum {
    pub g1: usize,
    pub g2: usize,
}

impl DirectSum {
    pub fn new(g1: usize, g2: usize) -> Self {
        DirectSum { g1, g2 }
    }

    pub fn first(&self, i: usize) -> usize {
        if i < self.g1 { i } else { self.g2 + i }
    }

    pub fn second(&self, i: usize) -> usize {
        if i < self.g2 { self.g1 + i } else { self.g1 + self.g1 + i }
    }

    pub fn genus(&self) -> usize {
        self.g1 + self.g2
    }

    pub fn join<T: Clone + Zero>(&self, a: &[T], b: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); 2 * self.genus()];
        for (i, x) in a.iter().enumerate() {
            out[self.first(i)] = x.clone();
        }
        for (i, x) in b.iter().enumerate() {
            out[self.second(i)] = x.clone();
        }
        out
    }

    pub fn split<T: Clone>(&self, v: &[T]) -> (Vec<T>, Vec<T>) {
        let a = (0..2 * self.g1).map(|i| v[self.first(i)].clone()).collect();
        let b = (0..2 * self.g2).map(|i| v[self.second(i)].clone()).collect();
        (a, b)
    }
}

/// L1 ⊕ L2 in the direct-sum lattice.
pub fn direct_sum(l1: &Lagrangian, l2: &Lagrangian) -> Lagrangian {
    let ds = DirectSum::new(l1.genus, l2.genus);
    let mut cols = Vec::new();
    for c in l1.gens.columns() {
        cols.push(ds.join(&c, &vec![int(0); 2 * l2.genus]));
    }
    for c in l2.gens.columns() {
        cols.push(ds.join(&vec![int(0); 2 * l1.genus], &c));
    }
    let m = IntMatrix::from_columns(&cols, 2 * ds.genus()).unwrap();
    Lagrangian { genus: ds.genus(), gens: lattice_basis(&m) }
}

/// R = diag(I, -I): identifies (Z^{2g}, -ω) with (Z^{2g}, ω). Used for orientation reversal.
pub fn reflection(g: usize) -> IntMatrix {
    IntMatrix::from_fn(2 * g, 2 * g, |i, j| if i != j { int(0) } else if i < g { int(1) } else { int(-1) })
}

pub fn reflect(l: &Lagrangian) -> Lagrangian {
    let img = reflection(l.genus).mul(&l.gens).unwrap();
    Lagrangian { genus: l.genus, gens: lattice_basis(&img) }
}

/// Graph {(R·M x, x)} ⊂ H¹(-Σ) ⊕ H¹(Σ) of a symplectic map, in standard coordinates of the sum.
/// For M = id this is the diagonal.
pub fn graph_lagrangian(m: &SpElement) -> Lagrangian {
    let g = m.genus();
    let ds = DirectSum::new(g, g);
    let rm = reflection(g).mul(&m.m).unwrap();
    let mut cols = Vec::new();
    for i in 0..2 * g {
        let x: Vec<BigInt> = (0..2 * g).map(|r| if r == i { int(1) } else { int(0) }).collect();
        cols.push(ds.join(&rm.mul_vec(&x).unwrap(), &x));
    }
    let span = IntMatrix::from_columns(&cols, 4 * g).unwrap();
    // span is rank 2g; the real span's integer points are the saturation
    Lagrangian::from_span(2 * g, &span).expect("graph of a symplectic map is Lagrangian")
}

// ---------------------------------------------------------------------------
// Words in the generators α(A), β(B), γ

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpToken {
    Alpha(IntMatrix),
    Beta(IntMatrix),
    Gamma,
}

impl SpToken {
    pub fn matrix(&self, g: usize) -> Result<SpElement> {
        let m = match self {
            SpToken::Alpha(a) => {
                if a.rows() != g || a.cols() != g {
                    return Err(Error::Dimension("alpha block size".into()));
                }
                let ainv_t = a.inverse_unimodular()?.transpose();
                a.block_diag(&ainv_t)
            }
            SpToken::Beta(b) => {
                if b.rows() != g || b.cols() != g || !b.is_symmetric() {
                    return Err(Error::Invalid("beta needs a symmetric g×g integer matrix".into()));
                }
                let mut m = IntMatrix::identity(2 * g);
                for i in 0..g {
                    for j in 0..g {
                        m.set(i, g + j, b.get(i, j).clone());
                    }
                }
                m
            }
            SpToken::Gamma => symplectic_form(g),
        };
        Ok(SpElement { m })
    }

    pub fn inverse(&self, g: usize) -> Vec<SpToken> {
        match self {
            SpToken::Alpha(a) => vec![SpToken::Alpha(a.inverse_unimodular().expect("validated"))],
            SpToken::Beta(b) => vec![SpToken::Beta(b.neg())],
            // γ⁻¹ = γ³ = α(-I)γ
            SpToken::Gamma => vec![SpToken::Alpha(IntMatrix::identity(g).neg()), SpToken::Gamma],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpWord {
    pub genus: usize,
    pub tokens: Vec<SpToken>,
}

impl SpWord {
    pub fn evaluate(&self) -> Result<SpElement> {
        let mut m = SpElement::identity(self.genus);
        for t in &self.tokens {
            m = m.compose(&t.matrix(self.genus)?);
        }
        Ok(m)
    }

    pub fn inverse(&self) -> SpWord {
        let tokens = self.tokens.iter().rev().flat_map(|t| t.inverse(self.genus)).collect();
        SpWord { genus: self.genus, tokens }
    }

    /// Merge adjacent α's and β's and drop trivial tokens.
    pub fn simplify(&self) -> SpWord {
        let g = self.genus;
        let mut out: Vec<SpToken> = Vec::new();
        for t in &self.tokens {
            let merged = match (out.last(), t) {
                (Some(SpToken::Alpha(a)), SpToken::Alpha(b)) => Some(SpToken::Alpha(a.mul(b).unwrap())),
                (Some(SpToken::Beta(a)), SpToken::Beta(b)) => Some(SpToken::Beta(a.add(b).unwrap())),
                _ => None,
            };
            match merged {
                Some(m) => {
                    out.pop();
                    out.push(m);
                }
                None => out.push(t.clone()),
            }
            let trivial = match out.last() {
                Some(SpToken::Alpha(a)) => *a == IntMatrix::identity(g),
                Some(SpToken::Beta(b)) => b.is_zero(),
                _ => false,
            };
            if trivial {
                out.pop();
            }
        }
        SpWord { genus: g, tokens: out }
    }
}

/// Decompose a symplectic integer matrix into α/β/γ tokens (deterministic, Euclid on 2×2 blocks).
pub fn sp_decompose(m: &SpElement) -> SpWord {
    let g = m.genus();
    let mut cur = m.m.clone();
    let mut left: Vec<SpToken> = Vec::new(); // tokens applied on the left, in order
    let e = |i: usize| -> IntMatrix { IntMatrix::from_fn(g, g, |r, c| if r == i && c == i { int(1) } else { int(0) }) };
    let apply = |tok: SpToken, cur: &mut IntMatrix, left: &mut Vec<SpToken>| {
        let tm = tok.matrix(g).expect("internal token");
        *cur = tm.m.mul(cur).unwrap();
        left.push(tok);
    };
    for i in 0..g {
        // (1) euclid on each pair (x_l, x_{g+l}), l ≥ i, of column i
        for l in i..g {
            loop {
                let c = cur.get(g + l, i).clone();
                if c.is_zero() {
                    break;
                }
                let a = cur.get(l, i).clone();
                // x_l += t x_{g+l} via β(t E_ll)
                let t = -a.div_floor(&c);
                if !t.is_zero() {
                    apply(SpToken::Beta(e(l).scale(&t)), &mut cur, &mut left);
                }
                let a = cur.get(l, i).clone();
                if a.is_zero() {
                    // move c to the top slot: x_l = c, then x_{g+l} -= x_l
                    apply(SpToken::Beta(e(l)), &mut cur, &mut left);
                    lower(g, l, int(-1), &mut cur, &mut left);
                    break;
                }
                // x_{g+l} += s x_l via L(s) = γ β(-s E) γ⁻¹
                let s = -cur.get(g + l, i).div_floor(&a);
                lower(g, l, s, &mut cur, &mut left);
            }
        }
        // (2) α(U) taking the top part (rows i..g) of column i to e_i, fixing e_0..e_{i-1}
        let top: Vec<BigInt> = (i..g).map(|r| cur.get(r, i).clone()).collect();
        let u_sub = unimodular_to_e1(&top);
        let mut u = IntMatrix::identity(g);
        for r in 0..g - i {
            for c in 0..g - i {
                u.set(i + r, i + c, u_sub.get(r, c).clone());
            }
        }
        if u != IntMatrix::identity(g) {
            apply(SpToken::Alpha(u), &mut cur, &mut left);
        }
        // (3) column g+i: bottom part -> e_i via α(U) with U e_i = e_i, then top via β
        let b: Vec<BigInt> = (0..g).map(|r| cur.get(g + r, g + i).clone()).collect();
        debug_assert!(b[i].is_one());
        // U⁻ᵀ b = e_i with U e_i = e_i: row i of U is bᵀ
        let mut u = IntMatrix::identity(g);
        for c in 0..g {
            u.set(i, c, b[c].clone());
        }
        if u != IntMatrix::identity(g) {
            apply(SpToken::Alpha(u), &mut cur, &mut left);
        }
        let tvec: Vec<BigInt> = (0..g).map(|r| cur.get(r, g + i).clone()).collect();
        let mut s = IntMatrix::zeros(g, g);
        for r in 0..g {
            if r == i {
                s.set(i, i, -tvec[i].clone());
            } else {
                s.set(r, i, -tvec[r].clone());
                s.set(i, r, -tvec[r].clone());
            }
        }
        if !s.is_zero() {
            apply(SpToken::Beta(s), &mut cur, &mut left);
        }
    }
    debug_assert_eq!(cur, IntMatrix::identity(2 * g));
    // W·M = I  =>  M = W⁻¹
    let w = SpWord { genus: g, tokens: left.into_iter().rev().collect() };
    // left was applied in order t1, t2, ...: W = ... t2 t1, so W⁻¹ = t1⁻¹ t2⁻¹ ...
    let tokens: Vec<SpToken> = w.tokens.iter().rev().flat_map(|t| t.inverse(g)).collect();
    SpWord { genus: g, tokens }.simplify()
}

/// Left-multiply by L(s E_ll) = [[I,0],[s E_ll, I]] written as γ β(-s E_ll) γ⁻¹.
fn lower(g: usize, l: usize, s: BigInt, cur: &mut IntMatrix, left: &mut Vec<SpToken>) {
    if s.is_zero() {
        return;
    }
    let e = IntMatrix::from_fn(g, g, |r, c| if r == l && c == l { -s.clone() } else { int(0) });
    // applied right-to-left: first γ⁻¹ = α(-I)γ (γ first, then α(-I)), then β, then γ
    let seq = vec![SpToken::Gamma, SpToken::Alpha(IntMatrix::identity(g).neg()), SpToken::Beta(e), SpToken::Gamma];
    for t in seq {
        let tm = t.matrix(g).unwrap();
        *cur = tm.m.mul(cur).unwrap();
        left.push(t);
    }
}

/// A unimodular U with U·v = e_1 for a primitive integer vector v.
fn unimodular_to_e1(v: &[BigInt]) -> IntMatrix {
    let n = v.len();
    let col = IntMatrix::from_fn(n, 1, |i, _| v[i].clone());
    // row-style reduction: HNF of vᵀ gives vᵀ·U' = (d,0,...), i.e. U'ᵀ v = d e_1
    let (h, u, _) = hnf_with_pivots(&col.transpose());
    debug_assert!(h.get(0, 0).is_one());
    u.transpose()
}

/// Uniformly-ish random word of `len` tokens (β entries and α elementary moves bounded by `bound`).
pub fn random_word<R: Rng>(rng: &mut R, g: usize, len: usize, bound: i64) -> SpWord {
    let mut tokens = Vec::with_capacity(len);
    for _ in 0..len {
        match rng.gen_range(0..3) {
            0 => {
                let mut a = IntMatrix::identity(g);
                if g > 1 {
                    let i = rng.gen_range(0..g);
                    let mut j = rng.gen_range(0..g);
                    if j == i {
                        j = (i + 1) % g;
                    }
                    a.set(i, j, int(rng.gen_range(-bound..=bound)));
                } else if rng.gen_bool(0.5) {
                    a = a.neg();
                }
                tokens.push(SpToken::Alpha(a));
            }
            1 => {
                let mut b = IntMatrix::zeros(g, g);
                for i in 0..g {
                    for j in i..g {
                        let v = int(rng.gen_range(-bound..=bound));
                        b.set(i, j, v.clone());
                        b.set(j, i, v);
                    }
                }
                tokens.push(SpToken::Beta(b));
            }
            _ => tokens.push(SpToken::Gamma),
        }
    }
    SpWord { genus: g, tokens }
}

/// Random primitive Lagrangian: image of the standard one under a random word.
pub fn random_lagrangian<R: Rng>(rng: &mut R, g: usize, len: usize, bound: i64) -> Lagrangian {
    let m = random_word(rng, g, len, bound).evaluate().expect("random word is valid");
    act_on_lagrangian(&m, &Lagrangian::standard(g)).expect("same genus")
}

/// Genus-1 Lagrangian spanned by a primitive vector (a,b).
pub fn line(a: i64, b: i64) -> Result<Lagrangian> {
    if num_integer::gcd(a, b) != 1 {
        return Err(Error::NotLagrangian(format!("({a},{b}) is not primitive")));
    }
    Lagrangian::from_i64_columns(1, &[vec![a, b]])
}

/// Intersection dimension dim(L1 ∩ L2).
pub fn intersection_dim(l1: &Lagrangian, l2: &Lagrangian) -> usize {
    let p = omega_matrix(&l2.gens, &l1.gens);
    l1.genus - smith_normal_form(&p).rank()
}

/// L1 ∩ L2 as a lattice (columns), in canonical form.
pub fn intersection_lattice(l1: &Lagrangian, l2: &Lagrangian) -> IntMatrix {
    let p = omega_matrix(&l2.gens, &l1.gens);
    let k = integer_kernel(&p);
    lattice_basis(&l1.gens.mul(&k).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn lagrangian_checks() {
        let ok = IntMatrix::from_i64(&[vec![1], vec![0]]).unwrap();
        assert!(is_lagrangian(1, &ok).unwrap().is_ok());
        let both = IntMatrix::from_i64(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(matches!(is_lagrangian(1, &both).unwrap(), LagrangianDiagnostic::NotIsotropic { .. }));
        let two = IntMatrix::from_i64(&[vec![2], vec![0]]).unwrap();
        assert!(matches!(is_lagrangian(1, &two).unwrap(), LagrangianDiagnostic::NotPrimitive { .. }));
        assert!(is_lagrangian(2, &ok).is_err());
    }

    #[test]
    fn maslov_example() {
        let (a, b, c) = (line(1, 0).unwrap(), line(0, 1).unwrap(), line(1, 1).unwrap());
        assert_eq!(maslov_index(&a, &b, &c).unwrap(), -1);
        assert_eq!(maslov_index(&b, &a, &c).unwrap(), 1);
        assert_eq!(maslov_index(&a, &a, &c).unwrap(), 0);
    }

    #[test]
    fn frames() {
        assert!(adapted_frame(&Lagrangian::standard(2)).is_identity());
        let f = adapted_frame(&line(0, 1).unwrap());
        assert_eq!(f.matrix(), &IntMatrix::from_i64(&[vec![0, -1], vec![1, 0]]).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let l = random_lagrangian(&mut rng, 2, 8, 3);
            let f = adapted_frame(&l);
            assert!(SpElement::new(f.matrix().clone()).is_ok());
            let w = f.matrix().select_columns(&[0, 1]);
            assert_eq!(&w, l.gens());
        }
    }

    #[test]
    fn decompose_generators() {
        assert!(sp_decompose(&SpElement::identity(2)).tokens.is_empty());
        let w = sp_decompose(&SpElement::t());
        assert_eq!(w.tokens, vec![SpToken::Beta(IntMatrix::from_i64(&[vec![1]]).unwrap())]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for g in 1..=3 {
            for _ in 0..20 {
                let m = random_word(&mut rng, g, 10, 3).evaluate().unwrap();
                assert_eq!(sp_decompose(&m).evaluate().unwrap(), m);
            }
        }
    }

    #[test]
    fn gamma_moves_axis() {
        let l = act_on_lagrangian(&SpElement::s(), &line(1, 0).unwrap()).unwrap();
        assert_eq!(l, line(0, 1).unwrap());
    }

    #[test]
    fn graph_is_diagonal_for_identity() {
        let d = graph_lagrangian(&SpElement::identity(1));
        assert_eq!(d.genus(), 2);
        // (R x, x) for x = e: (e, e); for x = f: (-f, f)
        assert!(d.contains(&[int(1), int(1), int(0), int(0)]));
        assert!(d.contains(&[int(0), int(0), int(-1), int(1)]));
    }
}
