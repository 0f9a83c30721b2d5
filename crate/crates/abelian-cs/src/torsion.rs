//! Reidemeister torsion of based cochain complexes, a Laplacian oracle, and the gluing formula
//! along a simplicial cut.
//!
//! Convention: with b̃^q lifting a basis of B^{q+1} = im d^q and b^q = d^{q-1} b̃^{q-1},
//! D_q = [b^q, h^q, b̃^q] and T = Π_q |det D_q|^{(-1)^{q+1}}.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{sort_sign, SimplicialComplex, SimplicialPair};
use crate::zlattice::{
    int, integer_kernel, primitive, rat_to_f64, smith_normal_form, sparse_abs_det, sparse_invariant_factors, unit,
    IntMatrix, Rat, SparseElim, SparseVec,
};

#[derive(Clone, Debug)]
pub struct BasedChainComplex {
    ranks: Vec<usize>,
    /// cob[q][j] = d^q e_j ∈ C^{q+1}
    cob: Vec<Vec<SparseVec>>,
    hbases: Option<Vec<Vec<SparseVec>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub ranks: Vec<usize>,
    /// d^q as an r_{q+1} × r_q row-major matrix
    pub coboundaries: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbases: Option<Vec<Vec<Vec<i64>>>>,
}

#[derive(Clone, Debug)]
pub struct TorsionDensity {
    pub value: Rat,
    pub hbases: Vec<Vec<SparseVec>>,
}

impl TorsionDensity {
    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

fn apply(cols: &[SparseVec], v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (j, x) in v {
        for (r, a) in &cols[*j] {
            let nv = out.get(r).cloned().unwrap_or_else(Rat::zero) + x * a;
            if nv.is_zero() {
                out.remove(r);
            } else {
                out.insert(*r, nv);
            }
        }
    }
    out
}

/// Pivot columns, image basis and kernel basis of one coboundary.
#[derive(Clone, Debug)]
struct Stage {
    pivots: Vec<usize>,
    image: Vec<SparseVec>,
    kernel: Vec<SparseVec>,
}

fn stage(cols: &[SparseVec], reverse: bool) -> Stage {
    let mut e = SparseElim::new();
    let mut pivots = Vec::new();
    let mut kernel = Vec::new();
    let order: Vec<usize> = if reverse { (0..cols.len()).rev().collect() } else { (0..cols.len()).collect() };
    for j in order {
        match e.insert(cols[j].clone(), unit(j)) {
            Ok(_) => pivots.push(j),
            Err(k) => kernel.push(primitive(&k)),
        }
    }
    pivots.sort_unstable();
    let image = pivots.iter().map(|&j| cols[j].clone()).collect();
    Stage { pivots, image, kernel }
}

impl BasedChainComplex {
    pub fn from_sparse(ranks: Vec<usize>, cob: Vec<Vec<SparseVec>>) -> Result<Self> {
        if cob.len() + 1 != ranks.len().max(1) {
            return Err(Error::Dimension(format!("{} coboundaries for {} degrees", cob.len(), ranks.len())));
        }
        for (q, c) in cob.iter().enumerate() {
            if c.len() != ranks[q] || c.iter().any(|v| v.keys().any(|&r| r >= ranks[q + 1])) {
                return Err(Error::Dimension(format!("coboundary d^{q} has the wrong shape")));
            }
        }
        for q in 0..cob.len().saturating_sub(1) {
            if cob[q].iter().any(|v| !apply(&cob[q + 1], v).is_empty()) {
                return Err(Error::Invalid(format!("d^{} ∘ d^{} ≠ 0", q + 1, q)));
            }
        }
        Ok(BasedChainComplex { ranks, cob, hbases: None })
    }

    pub fn from_dense(ranks: Vec<usize>, mats: &[Vec<Vec<i64>>]) -> Result<Self> {
        let mut cob = Vec::new();
        for (q, m) in mats.iter().enumerate() {
            let (r, c) = (ranks.get(q + 1).copied().unwrap_or(0), ranks[q]);
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(Error::Dimension(format!("coboundary d^{q} should be {r}×{c}")));
            }
            cob.push(
                (0..c)
                    .map(|j| (0..r).filter(|&i| m[i][j] != 0).map(|i| (i, Rat::from_integer(int(m[i][j])))).collect())
                    .collect(),
            );
        }
        Self::from_sparse(ranks, cob)
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self> {
        let c = Self::from_dense(j.ranks.clone(), &j.coboundaries)?;
        match &j.hbases {
            None => Ok(c),
            Some(h) => {
                let hb = h
                    .iter()
                    .map(|vs| vs.iter().map(|v| v.iter().enumerate().filter(|(_, x)| **x != 0).map(|(i, &x)| (i, Rat::from_integer(int(x)))).collect()).collect())
                    .collect();
                c.with_hbases(hb)
            }
        }
    }

    pub fn to_json(&self) -> ComplexJson {
        let dense = |v: &SparseVec, n: usize| -> Vec<i64> {
            (0..n).map(|i| v.get(&i).map(|x| x.to_integer().try_into().unwrap_or(0)).unwrap_or(0)).collect()
        };
        ComplexJson {
            ranks: self.ranks.clone(),
            coboundaries: self
                .cob
                .iter()
                .enumerate()
                .map(|(q, cols)| {
                    let r = self.ranks[q + 1];
                    (0..r).map(|i| cols.iter().map(|c| c.get(&i).map(|x| x.to_integer().try_into().unwrap_or(0)).unwrap_or(0)).collect()).collect()
                })
                .collect(),
            hbases: self.hbases.as_ref().map(|h| h.iter().enumerate().map(|(q, vs)| vs.iter().map(|v| dense(v, self.ranks[q])).collect()).collect()),
        }
    }

    /// Attach cohomology bases; they must be cocycles projecting to a basis of each H^q.
    pub fn with_hbases(mut self, h: Vec<Vec<SparseVec>>) -> Result<Self> {
        if h.len() != self.ranks.len() {
            return Err(Error::Dimension("one h-basis list per degree required".into()));
        }
        let betti = self.betti();
        for q in 0..self.ranks.len() {
            if h[q].len() != betti[q] {
                return Err(Error::Invalid(format!("h^{q} has {} vectors, H^{q} has dimension {}", h[q].len(), betti[q])));
            }
            for v in &h[q] {
                if v.keys().any(|&i| i >= self.ranks[q]) {
                    return Err(Error::Dimension(format!("h^{q} vector out of range")));
                }
                if q < self.cob.len() && !apply(&self.cob[q], v).is_empty() {
                    return Err(Error::Invalid(format!("h^{q} contains a non-cocycle")));
                }
            }
            let mut e = self.boundaries(q);
            for v in &h[q] {
                if e.insert(v.clone(), SparseVec::new()).is_err() {
                    return Err(Error::Invalid(format!("h^{q} is not independent in cohomology")));
                }
            }
        }
        self.hbases = Some(h);
        Ok(self)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn coboundary(&self, q: usize) -> &[SparseVec] {
        &self.cob[q]
    }

    fn stages(&self, reverse: bool) -> Vec<Stage> {
        (0..self.ranks.len())
            .map(|q| match self.cob.get(q) {
                Some(c) => stage(c, reverse),
                None => Stage { pivots: vec![], image: vec![], kernel: (0..self.ranks[q]).map(unit).collect() },
            })
            .collect()
    }

    fn boundaries(&self, q: usize) -> SparseElim {
        let mut e = SparseElim::new();
        if q > 0 {
            for c in &self.cob[q - 1] {
                let _ = e.insert(c.clone(), SparseVec::new());
            }
        }
        e
    }

    pub fn betti(&self) -> Vec<usize> {
        let st = self.stages(false);
        (0..self.ranks.len()).map(|q| st[q].kernel.len() - if q > 0 { st[q - 1].pivots.len() } else { 0 }).collect()
    }

    /// Deterministic rational h-bases: the first kernel vectors (in column order) independent
    /// modulo coboundaries, scaled to primitive integer vectors.
    pub fn default_hbases(&self) -> Vec<Vec<SparseVec>> {
        let st = self.stages(false);
        (0..self.ranks.len())
            .map(|q| {
                let mut e = SparseElim::new();
                if q > 0 {
                    for c in &st[q - 1].image {
                        let _ = e.insert(c.clone(), SparseVec::new());
                    }
                }
                st[q].kernel.iter().filter(|k| e.insert((*k).clone(), SparseVec::new()).is_ok()).cloned().collect()
            })
            .collect()
    }

    pub fn hbases(&self) -> Vec<Vec<SparseVec>> {
        self.hbases.clone().unwrap_or_else(|| self.default_hbases())
    }

    /// Coordinates of the class of a cocycle y ∈ C^q in the h-basis.
    pub fn class_coordinates(&self, q: usize, y: &SparseVec) -> Result<Vec<Rat>> {
        let h = self.hbases();
        let mut e = self.boundaries(q);
        for (i, v) in h[q].iter().enumerate() {
            e.insert(v.clone(), unit(i)).map_err(|_| Error::Invalid("dependent h-basis".into()))?;
        }
        let (rest, combo) = e.reduce(y.clone(), SparseVec::new());
        if !rest.is_empty() {
            return Err(Error::Invalid(format!("vector is not a cocycle of degree {q}")));
        }
        Ok((0..h[q].len()).map(|i| -combo.get(&i).cloned().unwrap_or_else(Rat::zero)).collect())
    }

    fn torsion_with(&self, reverse: bool) -> TorsionDensity {
        let st = self.stages(reverse);
        let h = self.hbases();
        let mut value = Rat::one();
        for q in 0..self.ranks.len() {
            let piv: std::collections::HashSet<usize> = st[q].pivots.iter().copied().collect();
            let restrict = |v: &SparseVec| -> SparseVec {
                // renumber rows outside the pivot set
                v.iter().filter(|(r, _)| !piv.contains(r)).map(|(r, x)| (*r, x.clone())).collect()
            };
            let mut cols: Vec<SparseVec> = Vec::new();
            if q > 0 {
                cols.extend(st[q - 1].image.iter().map(restrict));
            }
            cols.extend(h[q].iter().map(restrict));
            let d = sparse_abs_det(&cols);
            if q % 2 == 1 {
                value *= d;
            } else {
                value /= d;
            }
        }
        TorsionDensity { value, hbases: h }
    }

    pub fn torsion(&self) -> TorsionDensity {
        self.torsion_with(false)
    }

    /// Same value computed with the opposite internal pivot choices (for independence checks).
    pub fn torsion_reversed_pivots(&self) -> TorsionDensity {
        self.torsion_with(true)
    }

    /// Integer coboundaries as sparse i64 columns (None if some entry is not an integer).
    fn integral_columns(&self, q: usize) -> Option<Vec<Vec<(usize, i64)>>> {
        self.cob[q]
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(r, x)| if x.is_integer() { x.to_integer().try_into().ok().map(|v: i64| (*r, v)) } else { None })
                    .collect()
            })
            .collect()
    }

    /// Orders of Tors H^q(C;Z), q = 0..n.
    pub fn torsion_orders(&self) -> Option<Vec<BigInt>> {
        let mut out = vec![BigInt::one(); self.ranks.len()];
        for q in 0..self.cob.len() {
            let cols = self.integral_columns(q)?;
            let f = sparse_invariant_factors(self.ranks[q + 1], &cols);
            out[q + 1] = f.into_iter().product();
        }
        Some(out)
    }

    /// Torsion relative to integral lattice bases of H^q(C;Z)/tors: Π_q |Tors H^q|^{(-1)^{q+1}}.
    pub fn integral_torsion(&self) -> Option<Rat> {
        let t = self.torsion_orders()?;
        let mut v = Rat::one();
        for (q, o) in t.into_iter().enumerate() {
            if q % 2 == 1 {
                v *= Rat::from_integer(o);
            } else {
                v /= Rat::from_integer(o);
            }
        }
        Some(v)
    }

    /// Integral h-bases by dense lattice computations (small complexes only): a Z-basis of the
    /// cocycle lattice, completed from the saturated coboundary lattice.
    pub fn integral_hbases(&self) -> Result<Vec<Vec<SparseVec>>> {
        let n = self.ranks.len();
        let dense = |q: usize| -> IntMatrix {
            let r = self.ranks[q + 1];
            IntMatrix::from_fn(r, self.ranks[q], |i, j| self.cob[q][j].get(&i).map(|x| x.to_integer()).unwrap_or_else(BigInt::zero))
        };
        let mut out = Vec::new();
        for q in 0..n {
            let z = if q < self.cob.len() { integer_kernel(&dense(q)) } else { IntMatrix::identity(self.ranks[q]) };
            let zc = z.cols();
            if zc == 0 {
                out.push(vec![]);
                continue;
            }
            let b = if q > 0 { dense(q - 1) } else { IntMatrix::zeros(self.ranks[q], 0) };
            // B = Z·Y
            let zr = z.to_rat();
            let mut y = IntMatrix::zeros(zc, b.cols());
            for j in 0..b.cols() {
                let col: Vec<Rat> = b.column(j).into_iter().map(Rat::from_integer).collect();
                let s = zr.solve(&col).ok_or_else(|| Error::Invalid("coboundary outside cocycles".into()))?;
                for (i, x) in s.into_iter().enumerate() {
                    if !x.is_integer() {
                        return Err(Error::Invalid("cocycle lattice basis is not a Z-basis".into()));
                    }
                    y.set(i, j, x.to_integer());
                }
            }
            let snf = smith_normal_form(&y);
            let rank = snf.rank();
            let mut hs = Vec::new();
            for c in rank..zc {
                let u = snf.u.column(c);
                let v = z.mul_vec(&u)?;
                hs.push(v.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, Rat::from_integer(x))).collect());
            }
            out.push(hs);
        }
        Ok(out)
    }

    fn dense_f64(&self, q: usize) -> DMatrix<f64> {
        let (r, c) = (self.ranks.get(q + 1).copied().unwrap_or(0), self.ranks[q]);
        let mut m = DMatrix::zeros(r, c);
        if q < self.cob.len() {
            for (j, col) in self.cob[q].iter().enumerate() {
                for (i, x) in col {
                    m[(*i, j)] = rat_to_f64(x);
                }
            }
        }
        m
    }

    /// Direct sum (block diagonal, degrees aligned).
    pub fn direct_sum(&self, o: &BasedChainComplex) -> BasedChainComplex {
        let n = self.ranks.len().max(o.ranks.len());
        let rk = |c: &BasedChainComplex, q: usize| c.ranks.get(q).copied().unwrap_or(0);
        let ranks: Vec<usize> = (0..n).map(|q| rk(self, q) + rk(o, q)).collect();
        let shift = |v: &SparseVec, s: usize| -> SparseVec { v.iter().map(|(i, x)| (i + s, x.clone())).collect() };
        let mut cob = Vec::new();
        for q in 0..n.saturating_sub(1) {
            let mut cols: Vec<SparseVec> = self.cob.get(q).cloned().unwrap_or_else(|| vec![SparseVec::new(); rk(self, q)]);
            let s = rk(self, q + 1);
            let oc = o.cob.get(q).cloned().unwrap_or_else(|| vec![SparseVec::new(); rk(o, q)]);
            cols.extend(oc.iter().map(|v| shift(v, s)));
            cob.push(cols);
        }
        let (ha, hb) = (self.hbases(), o.hbases());
        let h = (0..n)
            .map(|q| {
                let mut v: Vec<SparseVec> = ha.get(q).cloned().unwrap_or_default();
                v.extend(hb.get(q).cloned().unwrap_or_default().iter().map(|x| shift(x, rk(self, q))));
                v
            })
            .collect();
        BasedChainComplex { ranks, cob, hbases: Some(h) }
    }
}

/// Laplacian oracle: Π_q det′(Δ_q)^{(-1)^{q+1} q/2} in the harmonic normalization, corrected by
/// the Gram determinants of the projections of h^q onto harmonic cochains.
pub fn torsion_oracle(c: &BasedChainComplex) -> f64 {
    let n = c.ranks.len();
    let h = c.hbases();
    let mut log = 0.0f64;
    for q in 0..n {
        let rq = c.ranks[q];
        if rq == 0 {
            continue;
        }
        let dq = c.dense_f64(q);
        let mut lap = dq.transpose() * &dq;
        if q > 0 {
            let dp = c.dense_f64(q - 1);
            lap += &dp * dp.transpose();
        }
        let eig = SymmetricEigen::new(lap);
        let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &x| a.max(x.abs()));
        let tol = 1e-9 * scale;
        let sgn = if q % 2 == 1 { 1.0 } else { -1.0 };
        let mut harm = Vec::new();
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l.abs() > tol {
                log += sgn * (q as f64) / 2.0 * l.ln();
            } else {
                harm.push(eig.eigenvectors.column(i).into_owned());
            }
        }
        if !harm.is_empty() {
            let hm = DMatrix::from_fn(rq, h[q].len(), |i, j| h[q][j].get(&i).map(rat_to_f64).unwrap_or(0.0));
            let basis = DMatrix::from_columns(&harm);
            let m = basis.transpose() * hm;
            log += sgn * m.determinant().abs().ln();
        }
    }
    log.exp()
}

/// Random based complex: C = ⊕(B ⊕ B̃ ⊕ H) pushed through random integer changes of basis,
/// coboundaries scaled to integers. `cells` bounds the total rank.
pub fn random_complex<R: Rng>(rng: &mut R, cells: usize, acyclic: bool) -> BasedChainComplex {
    loop {
        let n = rng.gen_range(2..=4usize);
        // a[q] = rank d^q, b[q] = betti
        let a: Vec<usize> = (0..n).map(|q| if q + 1 == n { 0 } else { rng.gen_range(0..=2) }).collect();
        let betti: Vec<usize> = (0..n).map(|_| if acyclic { 0 } else { rng.gen_range(0..=1) }).collect();
        let ranks: Vec<usize> = (0..n).map(|q| a[q] + betti[q] + if q > 0 { a[q - 1] } else { 0 }).collect();
        let total: usize = ranks.iter().sum();
        if total == 0 || total > cells || a.iter().all(|&x| x == 0) {
            continue;
        }
        // adapted coordinates: [image of d^{q-1} | harmonic | lifted]
        let mats: Vec<IntMatrix> = ranks
            .iter()
            .map(|&r| loop {
                let m = IntMatrix::from_fn(r, r, |i, j| int(if i == j { rng.gen_range(1..=2) } else { rng.gen_range(-1..=1) }));
                if !m.det().unwrap().is_zero() {
                    break m;
                }
            })
            .collect();
        let mut cob = Vec::new();
        for q in 0..n - 1 {
            let (rq, rn) = (ranks[q], ranks[q + 1]);
            let off = if q > 0 { a[q - 1] } else { 0 } + betti[q];
            let e = IntMatrix::from_fn(rn, rq, |i, j| int(if j >= off && i == j - off { 1 } else { 0 }));
            let d = mats[q + 1].to_rat().mul(&e.to_rat()).unwrap().mul(&mats[q].to_rat().inverse().unwrap()).unwrap();
            let (di, _) = d.clear_denominators();
            cob.push((0..rq).map(|j| (0..rn).filter(|&i| !di.get(i, j).is_zero()).map(|i| (i, Rat::from_integer(di.get(i, j).clone()))).collect()).collect());
        }
        return BasedChainComplex::from_sparse(ranks, cob).expect("d∘d = 0 by construction");
    }
}

// ---------------------------------------------------------------------------
// Simplicial cochains

/// Cochain complex of a simplicial complex (or of a pair, dropping simplices of the subcomplex).
pub fn cochains(x: &SimplicialComplex, pair: Option<&SimplicialPair>) -> BasedChainComplex {
    let top = x.dim().map_or(0, |d| d + 1);
    let keep = |q: usize, i: usize| pair.is_none_or(|p| !p.in_a(q, i));
    let idx: Vec<Vec<Option<usize>>> = (0..top)
        .map(|q| {
            let mut n = 0;
            (0..x.count(q))
                .map(|i| {
                    if keep(q, i) {
                        n += 1;
                        Some(n - 1)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let ranks: Vec<usize> = idx.iter().map(|v| v.iter().flatten().count()).collect();
    let mut cob = Vec::new();
    for q in 0..top.saturating_sub(1) {
        let mut cols = vec![SparseVec::new(); ranks[q]];
        for (t, s) in x.simplices(q + 1).iter().enumerate() {
            let Some(ti) = idx[q + 1][t] else { continue };
            for i in 0..s.len() {
                let mut f = s.clone();
                f.remove(i);
                let Some(fi) = idx[q][x.index_of(&f).unwrap()] else { continue };
                cols[fi].insert(ti, Rat::from_integer(int(if i % 2 == 0 { 1 } else { -1 })));
            }
        }
        cob.push(cols);
    }
    BasedChainComplex::from_sparse(ranks, cob).expect("simplicial coboundary")
}

/// √T with integral lattice h-bases of the relative cohomology (or absolute when ∂X = ∅).
pub fn torsion_half_density_integral(p: &SimplicialPair) -> Result<f64> {
    let rel = p.a.dim().is_some();
    let c = cochains(&p.x, if rel { Some(p) } else { None });
    let t = c.integral_torsion().ok_or_else(|| Error::Invalid("non-integral complex".into()))?;
    Ok(rat_to_f64(&t).sqrt())
}

/// A simplicial cut: X^cut → X identifies two disjoint copies Σ₊, Σ₋ of Σ.
#[derive(Clone, Debug)]
pub struct CutPresentation {
    pub x: SimplicialComplex,
    pub cut: SimplicialComplex,
    pub sigma: SimplicialComplex,
    /// cut vertex ↦ X vertex
    pub pi: Vec<usize>,
    /// Σ vertex ↦ cut vertex, for the two copies
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueReport {
    pub t_x: f64,
    pub t_cut: f64,
    pub t_sigma: f64,
    /// torsion of the Mayer–Vietoris long exact sequence in the chosen h-bases
    pub t_sequence: f64,
    /// relative residual of T_cut = T_X · T_Σ · T_seq
    pub residual: f64,
}

/// (index, sign) of the image simplex under a vertex map.
fn image(k: &SimplicialComplex, s: &[usize], f: &[usize]) -> Result<(usize, i64)> {
    let im: Vec<usize> = s.iter().map(|&v| f[v]).collect();
    let sg = sort_sign(&im);
    let mut sorted = im;
    sorted.sort_unstable();
    let i = k.index_of(&sorted).ok_or_else(|| Error::Complex(format!("vertex map does not send {s:?} to a simplex")))?;
    Ok((i, sg))
}

impl CutPresentation {
    fn dim(&self) -> usize {
        self.cut.dim().map_or(0, |d| d + 1)
    }

    /// Long exact sequence H^q(X) → H^q(cut) → H^q(Σ) → H^{q+1}(X) as an acyclic based complex in
    /// the h-bases of the three complexes.
    pub fn sequence(&self, cx: &BasedChainComplex, cc: &BasedChainComplex, cs: &BasedChainComplex) -> Result<BasedChainComplex> {
        let n = self.dim();
        let (hx, hc, hs) = (cx.hbases(), cc.hbases(), cs.hbases());
        let get = |h: &Vec<Vec<SparseVec>>, q: usize| h.get(q).cloned().unwrap_or_default();
        let mut ranks = Vec::new();
        for q in 0..n {
            ranks.extend([get(&hx, q).len(), get(&hc, q).len(), get(&hs, q).len()]);
        }
        let mut cob: Vec<Vec<SparseVec>> = Vec::new();
        let coords = |c: &BasedChainComplex, q: usize, y: &SparseVec| -> Result<SparseVec> {
            if q >= c.ranks().len() {
                return Ok(SparseVec::new());
            }
            Ok(c.class_coordinates(q, y)?.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect())
        };
        for q in 0..n {
            // pullback along π
            let pre: Vec<(usize, i64)> =
                self.cut.simplices(q).iter().map(|s| image(&self.x, s, &self.pi)).collect::<Result<_>>()?;
            let pull = |c: &SparseVec| -> SparseVec {
                pre.iter().enumerate().filter_map(|(i, (xi, sg))| c.get(xi).map(|v| (i, v * Rat::from_integer(int(*sg))))).collect()
            };
            cob.push(get(&hx, q).iter().map(|h| coords(cc, q, &pull(h))).collect::<Result<_>>()?);
            // difference of restrictions
            let sp: Vec<(usize, i64)> =
                self.sigma.simplices(q).iter().map(|s| image(&self.cut, s, &self.plus)).collect::<Result<_>>()?;
            let sm: Vec<(usize, i64)> =
                self.sigma.simplices(q).iter().map(|s| image(&self.cut, s, &self.minus)).collect::<Result<_>>()?;
            let restrict = |c: &SparseVec| -> SparseVec {
                let mut out = SparseVec::new();
                for (i, ((a, sa), (b, sb))) in sp.iter().zip(&sm).enumerate() {
                    let v = c.get(a).cloned().unwrap_or_else(Rat::zero) * Rat::from_integer(int(*sa))
                        - c.get(b).cloned().unwrap_or_else(Rat::zero) * Rat::from_integer(int(*sb));
                    if !v.is_zero() {
                        out.insert(i, v);
                    }
                }
                out
            };
            cob.push(get(&hc, q).iter().map(|h| coords(cs, q, &restrict(h))).collect::<Result<_>>()?);
            // connecting map: lift to Σ₊, apply d, descend through π
            if q + 1 < n {
                let up: Vec<(usize, i64)> =
                    self.cut.simplices(q + 1).iter().map(|s| image(&self.x, s, &self.pi)).collect::<Result<_>>()?;
                let mut conn = Vec::new();
                for h in get(&hs, q) {
                    let mut lift = SparseVec::new();
                    for (i, v) in &h {
                        let (a, sa) = sp[*i];
                        lift.insert(a, v * Rat::from_integer(int(sa)));
                    }
                    let dl = apply(cc.coboundary(q), &lift);
                    let mut w = SparseVec::new();
                    for (i, v) in dl {
                        let (xi, sg) = up[i];
                        w.entry(xi).or_insert(v * Rat::from_integer(int(sg)));
                    }
                    conn.push(coords(cx, q + 1, &w)?);
                }
                cob.push(conn);
            }
        }
        BasedChainComplex::from_sparse(ranks, cob)
    }

    pub fn glue_check(&self) -> Result<GlueReport> {
        let cx = cochains(&self.x, None);
        let cc = cochains(&self.cut, None);
        let cs = cochains(&self.sigma, None);
        let seq = self.sequence(&cx, &cc, &cs)?;
        if seq.betti().iter().any(|&b| b != 0) {
            return Err(Error::Invalid("Mayer–Vietoris sequence is not exact (misaligned cut data)".into()));
        }
        let (tx, tc, ts, tq) = (cx.torsion().value, cc.torsion().value, cs.torsion().value, seq.torsion().value);
        let pred = &tx * &ts * &tq;
        let residual = rat_to_f64(&((&tc - &pred) / &tc).abs());
        Ok(GlueReport { t_x: rat_to_f64(&tx), t_cut: rat_to_f64(&tc), t_sigma: rat_to_f64(&ts), t_sequence: rat_to_f64(&tq), residual })
    }
}

/// The n×m grid torus cut along the circles at heights 0 and `at` into two annuli.
pub fn torus_into_annuli(n: usize, m: usize, at: usize) -> CutPresentation {
    use crate::triangulate::{cycle, disjoint_union, grid_torus, product_path};
    let c = cycle(n);
    let x = grid_torus(n, m);
    let (a1, a2) = (product_path(&c, at), product_path(&c, m - at));
    let cut = disjoint_union(&a1, &a2);
    let off = a1.n_vertices();
    let mut pi = vec![0; cut.n_vertices()];
    for v in 0..n {
        for i in 0..=at {
            pi[v + i * n] = v + (i % m) * n;
        }
        for i in 0..=m - at {
            pi[off + v + i * n] = v + ((at + i) % m) * n;
        }
    }
    let sigma = disjoint_union(&c, &c);
    let mut plus = vec![0; 2 * n];
    let mut minus = vec![0; 2 * n];
    for v in 0..n {
        // circle at height 0: bottom of a1 and top of a2; circle at height `at`: top of a1 and bottom of a2
        plus[v] = v;
        minus[v] = off + v + (m - at) * n;
        plus[n + v] = off + v;
        minus[n + v] = v + at * n;
    }
    CutPresentation { x, cut, sigma, pi, plus, minus }
}

/// T² × C_m cut along T² × {0}.
pub fn three_torus_cut(m: usize) -> CutPresentation {
    use crate::triangulate::{grid_torus, product_circle, product_path};
    let t2 = grid_torus(3, 3);
    let n = t2.n_vertices();
    let x = product_circle(&t2, m);
    let cut = product_path(&t2, m);
    let pi = (0..cut.n_vertices()).map(|v| v % (n * m)).collect();
    let plus = (0..n).collect();
    let minus = (0..n).map(|v| v + m * n).collect();
    CutPresentation { x, cut, sigma: t2, pi, plus, minus }
}

/// A cut along an empty surface: X = X₁ ⊔ X₂ is its own cut.
pub fn disjoint_cut(a: &SimplicialComplex, b: &SimplicialComplex) -> CutPresentation {
    let x = crate::triangulate::disjoint_union(a, b);
    let n = x.n_vertices();
    CutPresentation { x: x.clone(), cut: x, sigma: SimplicialComplex::new(0, &[]).unwrap(), pi: (0..n).collect(), plus: vec![], minus: vec![] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zlattice::rat;
    use rand::SeedableRng;

    fn times_two() -> BasedChainComplex {
        BasedChainComplex::from_dense(vec![1, 1], &[vec![vec![2]]]).unwrap()
    }

    #[test]
    fn small_values() {
        assert_eq!(times_two().torsion().value, rat(2, 1));
        assert!((torsion_oracle(&times_two()) - 2.0).abs() < 1e-12);
        let id = BasedChainComplex::from_dense(vec![1, 1], &[vec![vec![1]]]).unwrap();
        assert_eq!(id.torsion().value, rat(1, 1));
        let lens = BasedChainComplex::from_dense(vec![1, 1, 1, 1], &[vec![vec![0]], vec![vec![5]], vec![vec![0]]]).unwrap();
        assert_eq!(lens.integral_torsion().unwrap(), rat(1, 5));
        let lens = lens.clone().with_hbases(lens.integral_hbases().unwrap()).unwrap();
        assert_eq!(lens.torsion().value, rat(1, 5));
    }

    #[test]
    fn circle_against_oracle() {
        let c = cochains(&crate::triangulate::cycle(3), None);
        let t = c.torsion().to_f64();
        assert!((t - torsion_oracle(&c)).abs() < 1e-12 * t);
    }

    #[test]
    fn random_against_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for i in 0..40 {
            let c = random_complex(&mut rng, 12, i % 2 == 0);
            let t = c.torsion();
            assert_eq!(t.value, c.torsion_reversed_pivots().value);
            let o = torsion_oracle(&c);
            assert!((t.to_f64() - o).abs() < 1e-10 * o, "{} vs {o}", t.to_f64());
            let ci = c.clone().with_hbases(c.integral_hbases().unwrap()).unwrap();
            assert_eq!(ci.torsion().value, c.integral_torsion().unwrap());
        }
    }

    #[test]
    fn integral_bases_agree_with_invariant_factors() {
        use crate::triangulate as tri;
        for k in [tri::grid_torus(3, 3), tri::cycle(4), tri::product_circle(&tri::simplex(2), 3), tri::simplex_boundary(2)] {
            let c = cochains(&k, None);
            let h = c.integral_hbases().unwrap();
            let ci = c.clone().with_hbases(h).unwrap();
            assert_eq!(ci.torsion().value, c.integral_torsion().unwrap());
        }
    }

    #[test]
    fn lens_torsion() {
        let c = cochains(&crate::triangulate::lens_space(3, 1).unwrap(), None);
        assert_eq!(c.integral_torsion().unwrap(), rat(1, 3));
    }

    #[test]
    fn half_densities() {
        use crate::triangulate as tri;
        let p = SimplicialPair::with_boundary(tri::solid_torus()).unwrap();
        assert!((torsion_half_density_integral(&p).unwrap() - 1.0).abs() < 1e-12);
        let p = SimplicialPair::with_boundary(tri::surface_cylinder(1)).unwrap();
        assert!((torsion_half_density_integral(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gluing_torus() {
        let r = torus_into_annuli(4, 4, 2).glue_check().unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
    }

    #[test]
    fn gluing_three_torus() {
        let r = three_torus_cut(3).glue_check().unwrap();
        assert!(r.residual < 1e-9, "{r:?}");
    }

    #[test]
    fn gluing_disjoint() {
        use crate::triangulate as tri;
        let (a, b) = (tri::grid_torus(3, 3), tri::cycle(5));
        let (ca, cb) = (cochains(&a, None), cochains(&b, None));
        let u = cochains(&tri::disjoint_union(&a, &b), None);
        let prod = ca.torsion().value * cb.torsion().value;
        let sum = ca.direct_sum(&cb);
        assert_eq!(sum.torsion().value, prod);
        assert_eq!(u.integral_torsion(), Some(ca.integral_torsion().unwrap() * cb.integral_torsion().unwrap()));
    }
}
