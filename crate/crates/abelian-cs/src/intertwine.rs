//! BKS pairings, intertwiners F_{L₂L₁}, and the extended mapping-class operators U(h,m).
//!
//! Matrices are kept in an exact form: a common scale k^e·N^{-1/2} times, per entry, a list of
//! phase exponents θ (entry = scale·Σ e^{iπθ}). Complex matrices are produced only at the end.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::phase::{expi_pi, reduce_mod2, CMatrix};
use crate::quantize::{HilbertSpace, Level};
use crate::symplectic::{act_on_lagrangian, maslov_index, omega_matrix, Lagrangian, SpElement, SpToken, SpWord};
use crate::zlattice::{int, rat_to_f64, smith_normal_form, IntMatrix, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub k: u64,
    /// overall factor k^{k_exp}
    pub k_exp: Rat,
    /// overall factor count^{-1/2}
    pub count: BigInt,
    pub terms: Vec<Vec<Vec<Rat>>>,
}

impl PhaseMatrix {
    pub fn scale(&self) -> f64 {
        (self.k as f64).powf(rat_to_f64(&self.k_exp)) / self.count.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let s: Complex64 = self.terms[i][j].iter().map(expi_pi).sum();
        s * self.scale()
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        let sc = self.scale();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let s: Complex64 = self.terms[i][j].iter().map(expi_pi).sum();
                m.set(i, j, s * sc);
            }
        }
        m
    }

    /// Entry terms reduced into [0,2) and sorted, for exact comparison.
    pub fn normalized(&self) -> PhaseMatrix {
        let mut out = self.clone();
        for row in out.terms.iter_mut() {
            for e in row.iter_mut() {
                for t in e.iter_mut() {
                    *t = reduce_mod2(t);
                }
                e.sort();
            }
        }
        out
    }

    /// Exact equality of the represented matrices, assuming each side has distinct terms per entry.
    pub fn exact_eq(&self, o: &PhaseMatrix) -> bool {
        let a = self.normalized();
        let b = o.normalized();
        a.rows == b.rows && a.cols == b.cols && a.k == b.k && a.k_exp == b.k_exp && a.count == b.count && a.terms == b.terms
    }

    pub fn add_phase(&mut self, theta: &Rat) {
        for row in self.terms.iter_mut() {
            for e in row.iter_mut() {
                for t in e.iter_mut() {
                    *t = reduce_mod2(&(&*t + theta));
                }
            }
        }
    }

    /// self ∘ mono, for a monomial operator.
    pub fn compose_monomial(&self, mono: &Monomial) -> PhaseMatrix {
        let mut terms = vec![vec![Vec::new(); mono.target.len()]; self.rows];
        for (q, (&tq, th)) in mono.target.iter().zip(&mono.phase).enumerate() {
            for r in 0..self.rows {
                terms[r][q] = self.terms[r][tq].iter().map(|t| reduce_mod2(&(t + th))).collect();
            }
        }
        PhaseMatrix { rows: self.rows, cols: mono.target.len(), k: self.k, k_exp: self.k_exp.clone(), count: self.count.clone(), terms }
    }
}

/// v_q ↦ e^{iπ phase[q]} v'_{target[q]}
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub target: Vec<usize>,
    pub phase: Vec<Rat>,
}

impl Monomial {
    pub fn to_phase_matrix(&self, k: u64) -> PhaseMatrix {
        let n = self.target.len();
        let mut terms = vec![vec![Vec::new(); n]; n];
        for (q, (&t, th)) in self.target.iter().zip(&self.phase).enumerate() {
            terms[t][q].push(th.clone());
        }
        PhaseMatrix { rows: n, cols: n, k, k_exp: Rat::zero(), count: BigInt::one(), terms }
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    pub domain: HilbertSpace,
    pub codomain: HilbertSpace,
    pub matrix: CMatrix,
    pub exact: Option<PhaseMatrix>,
}

impl Operator {
    fn from_exact(domain: &HilbertSpace, codomain: &HilbertSpace, pm: PhaseMatrix) -> Self {
        Operator { domain: domain.clone(), codomain: codomain.clone(), matrix: pm.to_cmatrix(), exact: Some(pm) }
    }

    pub fn then(&self, next: &Operator) -> Result<Operator> {
        if next.domain.lagrangian() != self.codomain.lagrangian() {
            return Err(Error::Dimension("operator composition across different polarizations".into()));
        }
        Ok(Operator {
            domain: self.domain.clone(),
            codomain: next.codomain.clone(),
            matrix: next.matrix.mul(&self.matrix),
            exact: None,
        })
    }

    pub fn adjoint(&self) -> Operator {
        Operator { domain: self.codomain.clone(), codomain: self.domain.clone(), matrix: self.matrix.adjoint(), exact: None }
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }
}

fn small(m: &IntMatrix) -> Result<Vec<Vec<i128>>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_i128().ok_or_else(|| Error::Unsupported("entry exceeds i128".into()))).collect())
        .collect()
}

fn mv(m: &[Vec<i128>], v: &[i128]) -> Vec<i128> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn om(x: &[i128], y: &[i128]) -> i128 {
    let g = x.len() / 2;
    (0..g).map(|i| x[i] * y[g + i] - x[g + i] * y[i]).sum()
}

/// Exact BKS pairing matrix, entry (q₂,q₁) = ⟨⟨v²_{q₂}, v¹_{q₁}⟩⟩.
///
/// Λ₁(q₁) ∩ Λ₂(q₂) = {x₀¹ + W₁a : Pa ≡ (q₂ − Rq₁)/k mod Z^g}, P = W₂ᵀJW₁, R = W₂ᵀJT₁. With
/// P = U·D·V the components are a′ = Va, a′_i = (c′_i + j)/d_i (i ≤ rank), free a′_i = 0; the
/// section product is constant along each component.
pub fn bks_pairing(s2: &HilbertSpace, s1: &HilbertSpace) -> Result<PhaseMatrix> {
    if s1.genus() != s2.genus() || s1.k() != s2.k() {
        return Err(Error::Dimension("BKS pairing of incompatible spaces".into()));
    }
    let g = s1.genus();
    let k = s1.k();
    let f1 = s1.frame().matrix();
    let f2 = s2.frame().matrix();
    let w1 = f1.select_columns(&(0..g).collect::<Vec<_>>());
    let t1 = f1.select_columns(&(g..2 * g).collect::<Vec<_>>());
    let w2 = f2.select_columns(&(0..g).collect::<Vec<_>>());
    let t2 = f2.select_columns(&(g..2 * g).collect::<Vec<_>>());
    let p = omega_matrix(&w2, &w1);
    let r = omega_matrix(&w2, &t1);
    let snf = smith_normal_form(&p);
    let rank = snf.rank();
    let diag: Vec<i128> = snf.diagonal()[..rank]
        .iter()
        .map(|d| d.to_i128().ok_or_else(|| Error::Unsupported("intersection too large".into())))
        .collect::<Result<_>>()?;
    let n_comp: BigInt = diag.iter().map(|&d| BigInt::from(d)).product();
    let d = g - rank;
    let dmax = diag.last().copied().unwrap_or(1);
    // every vector below is an integer numerator over den
    let den: i128 = k as i128 * dmax;
    let (uinv, vinv) = (small(&snf.p)?, small(&snf.q)?);
    let (w1, t1, w2, t2, r) = (small(&w1)?, small(&t1)?, small(&w2)?, small(&t2)?, small(&r)?);
    let f2inv = small(s2.frame().inverse().matrix())?;
    let base = |t: &[Vec<i128>], q: &[i64]| -> Vec<i128> {
        let qq: Vec<i128> = q.iter().map(|&x| x as i128 * dmax).collect();
        mv(t, &qq)
    };

    let mut tuples: Vec<Vec<i128>> = vec![vec![]];
    for &di in &diag {
        tuples = tuples.into_iter().flat_map(|t| (0..di).map(move |j| { let mut u = t.clone(); u.push(j); u })).collect();
    }

    let modulus = 2 * den * den;
    let den2 = BigInt::from(den * den);
    let kk = k as i128;
    let dim = s1.dim();
    let mut terms = vec![vec![Vec::new(); dim]; dim];
    for i1 in 0..dim {
        let q1 = s1.label(i1);
        let x01 = base(&t1, &q1);
        let rq1 = mv(&r, &q1.iter().map(|&x| x as i128).collect::<Vec<_>>());
        for i2 in 0..dim {
            let q2 = s2.label(i2);
            let c: Vec<i128> = (0..g).map(|j| (q2[j] as i128 - rq1[j]) * dmax).collect();
            let cp = mv(&uinv, &c);
            if cp[rank..].iter().any(|x| x % den != 0) {
                continue;
            }
            let x02 = base(&t2, &q2);
            for tup in &tuples {
                let mut ap = vec![0i128; g];
                for i in 0..rank {
                    ap[i] = (cp[i] + tup[i] * den) / diag[i];
                }
                let a = mv(&vinv, &ap);
                let v = mv(&w1, &a);
                let pt: Vec<i128> = x01.iter().zip(&v).map(|(x, y)| x + y).collect();
                let dd: Vec<i128> = pt.iter().zip(&x02).map(|(x, y)| x - y).collect();
                let co = mv(&f2inv, &dd);
                let (a2, b2) = co.split_at(g);
                debug_assert!(b2.iter().all(|b| b % den == 0));
                let b2: Vec<i128> = b2.iter().map(|b| b / den).collect();
                let v2 = mv(&w2, a2);
                let lam: Vec<i128> = mv(&t2, &b2).into_iter().map(|x| x * den).collect();
                let xv: Vec<i128> = x02.iter().zip(&v2).map(|(x, y)| x + y).collect();
                let num = om(&x01, &v) - om(&lam, &xv) - om(&x02, &v2);
                let th = (kk * num).rem_euclid(modulus);
                terms[i2][i1].push(Rat::new(BigInt::from(th), den2.clone()));
            }
        }
    }
    Ok(PhaseMatrix {
        rows: dim,
        cols: dim,
        k,
        k_exp: Rat::new(int(d as i64) - int(g as i64), int(2)),
        count: n_comp,
        terms,
    })
}

/// F_{L₂L₁}: H(L₁) → H(L₂).
pub fn intertwiner(l2: &Lagrangian, l1: &Lagrangian, level: Level) -> Result<Operator> {
    let s1 = HilbertSpace::new(l1, level);
    let s2 = HilbertSpace::new(l2, level);
    let pm = bks_pairing(&s2, &s1)?;
    Ok(Operator::from_exact(&s1, &s2, pm))
}

/// The pushforward h_*: H(L) → H(hL), s ↦ s∘h⁻¹, as a monomial matrix, with the target space.
pub fn transport(h: &SpElement, space: &HilbertSpace) -> Result<(HilbertSpace, Monomial)> {
    let hl = act_on_lagrangian(h, space.lagrangian())?;
    let target_space = HilbertSpace::new(&hl, space.level());
    let mut target = Vec::with_capacity(space.dim());
    let mut phase = Vec::with_capacity(space.dim());
    for i in 0..space.dim() {
        let x0 = space.base_point(&space.label(i));
        let y = h.apply_rat(&x0);
        let q = target_space.label_of(&y)?;
        target.push(target_space.index(&q));
        phase.push(reduce_mod2(&-target_space.section_phase(&q, &y)?));
    }
    Ok((target_space, Monomial { target, phase }))
}

/// An e-2-morphism (h, m) of an extended surface (Σ, L) to itself; m is kept mod 8.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedSp {
    pub h: SpElement,
    pub m: i64,
}

impl ExtendedSp {
    pub fn new(h: SpElement, m: i64) -> Self {
        ExtendedSp { h, m: m.rem_euclid(8) }
    }

    pub fn identity(g: usize) -> Self {
        ExtendedSp::new(SpElement::identity(g), 0)
    }

    /// (h,m)·(h′,m′) = (h′h, m + m′ + τ(L, h′L, h′hL)); U(h′,m′)U(h,m) = U((h,m)·(h′,m′)).
    pub fn then(&self, o: &ExtendedSp, l: &Lagrangian) -> Result<ExtendedSp> {
        let hl = act_on_lagrangian(&o.h, l)?;
        let hhl = act_on_lagrangian(&o.h.compose(&self.h), l)?;
        let tau = maslov_index(l, &hl, &hhl)?;
        Ok(ExtendedSp::new(o.h.compose(&self.h), self.m + o.m + tau))
    }

    pub fn inverse(&self) -> ExtendedSp {
        ExtendedSp::new(self.h.inverse(), -self.m)
    }
}

/// Exact matrix of U(h,m) = e^{iπm/4} F_{L′,hL} ∘ h_* : H(L) → H(L′).
pub fn mapping_class_exact(h: &SpElement, m: i64, l: &Lagrangian, l_out: &Lagrangian, level: Level) -> Result<PhaseMatrix> {
    let space = HilbertSpace::new(l, level);
    let (hl_space, mono) = transport(h, &space)?;
    let out = HilbertSpace::new(l_out, level);
    let f = bks_pairing(&out, &hl_space)?;
    let mut pm = f.compose_monomial(&mono);
    pm.add_phase(&Rat::new(int(m), int(4)));
    Ok(pm)
}

pub fn mapping_class_operator(h: &SpElement, m: i64, l: &Lagrangian, level: Level) -> Result<Operator> {
    let pm = mapping_class_exact(h, m, l, l, level)?;
    let space = HilbertSpace::new(l, level);
    Ok(Operator::from_exact(&space, &space, pm))
}

pub fn extended_operator(x: &ExtendedSp, l: &Lagrangian, level: Level) -> Result<Operator> {
    mapping_class_operator(&x.h, x.m, l, level)
}

/// The explicit generator matrices: U(α)v_q = v_{A⁻ᵀq}, U(β)v_q = e^{iπqᵀBq/k}v_q,
/// U(γ)v_q = k^{-g/2} Σ_{q′} e^{2πi q·q′/k} v_{q′}.
pub fn generator_exact(token: &SpToken, g: usize, level: Level) -> Result<PhaseMatrix> {
    let k = level.get();
    let space = HilbertSpace::new(&Lagrangian::standard(g), level);
    let n = space.dim();
    let kr = Rat::from_integer(BigInt::from(k));
    let mut terms = vec![vec![Vec::new(); n]; n];
    let mut k_exp = Rat::zero();
    match token {
        SpToken::Alpha(a) => {
            if a.rows() != g || !a.is_unimodular() {
                return Err(Error::Invalid("alpha parameter must be in GL(g,Z)".into()));
            }
            let ait = a.inverse_unimodular()?.transpose();
            for i in 0..n {
                let q: Vec<BigInt> = space.label(i).into_iter().map(int).collect();
                let tq: Vec<i64> = ait.mul_vec(&q)?.iter().map(|x| x.to_i64().unwrap()).collect();
                terms[space.index(&tq)][i].push(Rat::zero());
            }
        }
        SpToken::Beta(b) => {
            if b.rows() != g || !b.is_symmetric() {
                return Err(Error::Invalid("beta parameter must be a symmetric g×g integer matrix".into()));
            }
            for i in 0..n {
                let q: Vec<BigInt> = space.label(i).into_iter().map(int).collect();
                let bq = b.mul_vec(&q)?;
                let qbq: BigInt = q.iter().zip(&bq).map(|(x, y)| x * y).sum();
                terms[i][i].push(reduce_mod2(&(Rat::from_integer(qbq) / &kr)));
            }
        }
        SpToken::Gamma => {
            k_exp = Rat::new(-int(g as i64), int(2));
            for i in 0..n {
                let q = space.label(i);
                for j in 0..n {
                    let q2 = space.label(j);
                    let dot: i64 = q.iter().zip(&q2).map(|(x, y)| x * y).sum();
                    terms[j][i].push(reduce_mod2(&Rat::new(int(2 * dot), int(k as i64))));
                }
            }
        }
    }
    Ok(PhaseMatrix { rows: n, cols: n, k, k_exp, count: BigInt::one(), terms })
}

pub fn generator_operator(token: &SpToken, space: &HilbertSpace) -> Result<Operator> {
    let pm = generator_exact(token, space.genus(), space.level())?;
    Ok(Operator::from_exact(space, space, pm))
}

/// U of a word, each token taken with m = 0, together with its extended element.
pub fn word_operator(word: &SpWord, l: &Lagrangian, level: Level) -> Result<(ExtendedSp, CMatrix)> {
    let space = HilbertSpace::new(l, level);
    let mut acc = ExtendedSp::identity(word.genus);
    let mut mat = CMatrix::identity(space.dim());
    for t in &word.tokens {
        let x = ExtendedSp::new(t.matrix(word.genus)?, 0);
        let u = extended_operator(&x, l, level)?;
        // U(acc)·U(x) = U(x·acc)
        mat = mat.mul(&u.matrix);
        acc = x.then(&acc, l)?;
    }
    Ok((acc, mat))
}

/// max |F_{L₁L₃}F_{L₃L₂}F_{L₂L₁} − e^{−iπτ(L₁,L₂,L₃)/4} I| and τ.
pub fn triple_law_residual(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian, level: Level) -> Result<(f64, i64)> {
    let f21 = intertwiner(l2, l1, level)?;
    let f32 = intertwiner(l3, l2, level)?;
    let f13 = intertwiner(l1, l3, level)?;
    let prod = f13.matrix.mul(&f32.matrix).mul(&f21.matrix);
    let tau = maslov_index(l1, l2, l3)?;
    let expect = CMatrix::identity(prod.rows).scale(expi_pi(&Rat::new(int(-tau), int(4))));
    Ok((prod.max_abs_diff(&expect), tau))
}

/// The identity matrix as an IntMatrix helper for α tokens.
pub fn alpha_identity(g: usize) -> SpToken {
    SpToken::Alpha(IntMatrix::identity(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{line, random_lagrangian};
    use rand::SeedableRng;

    fn lv(k: u64) -> Level {
        Level::new(k).unwrap()
    }

    #[test]
    fn dual_pair_is_gamma() {
        for k in [2, 4, 6] {
            let f = bks_pairing(
                &HilbertSpace::new(&Lagrangian::dual_standard(1), lv(k)),
                &HilbertSpace::new(&Lagrangian::standard(1), lv(k)),
            )
            .unwrap();
            let gm = generator_exact(&SpToken::Gamma, 1, lv(k)).unwrap();
            assert!(f.exact_eq(&gm));
        }
    }

    #[test]
    fn unitary_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in [2, 4] {
            for g in 1..=2 {
                for _ in 0..10 {
                    let a = random_lagrangian(&mut rng, g, 6, 2);
                    let b = random_lagrangian(&mut rng, g, 6, 2);
                    let f = intertwiner(&b, &a, lv(k)).unwrap();
                    assert!(f.unitarity_residual() < 1e-9, "k={k} {:?} {:?}", a, b);
                }
            }
        }
        let f = intertwiner(&line(1, 1).unwrap(), &line(1, 0).unwrap(), lv(2)).unwrap();
        assert!(f.unitarity_residual() < 1e-9);
    }

    #[test]
    fn triple_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for k in [2, 4] {
            for g in 1..=2 {
                for _ in 0..10 {
                    let a = random_lagrangian(&mut rng, g, 6, 2);
                    let b = random_lagrangian(&mut rng, g, 6, 2);
                    let c = random_lagrangian(&mut rng, g, 6, 2);
                    let (res, tau) = triple_law_residual(&a, &b, &c, lv(k)).unwrap();
                    assert!(res < 1e-9, "k={k} g={g} tau={tau} res={res}");
                }
            }
        }
    }

    #[test]
    fn generators_match_transport() {
        for k in [2, 4] {
            for g in 1..=2 {
                let l = Lagrangian::standard(g);
                let toks = vec![
                    SpToken::Gamma,
                    SpToken::Beta(IntMatrix::from_fn(g, g, |i, j| int(if i == j { 1 } else { 2 }))),
                    SpToken::Alpha(IntMatrix::from_fn(g, g, |i, j| int(if i == j { 1 } else if i < j { 3 } else { 0 }))),
                ];
                for t in toks {
                    let u = mapping_class_operator(&t.matrix(g).unwrap(), 0, &l, lv(k)).unwrap();
                    let e = generator_exact(&t, g, lv(k)).unwrap();
                    assert!(u.matrix.max_abs_diff(&e.to_cmatrix()) < 1e-12, "{t:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn strict_representation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for g in 1..=2 {
            let l = Lagrangian::standard(g);
            for _ in 0..10 {
                let x = ExtendedSp::new(crate::symplectic::random_word(&mut rng, g, 4, 2).evaluate().unwrap(), 1);
                let y = ExtendedSp::new(crate::symplectic::random_word(&mut rng, g, 4, 2).evaluate().unwrap(), 3);
                let ux = extended_operator(&x, &l, lv(2)).unwrap();
                let uy = extended_operator(&y, &l, lv(2)).unwrap();
                let uxy = extended_operator(&y.then(&x, &l).unwrap(), &l, lv(2)).unwrap();
                assert!(ux.matrix.mul(&uy.matrix).max_abs_diff(&uxy.matrix) < 1e-9);
            }
        }
    }
}
