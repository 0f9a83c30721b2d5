//! Level-k quantization of the torus H¹(Σ;R)/H¹(Σ;Z) in a rational real polarization.
//!
//! Sections obey f(x+λ) = e^{iπkω(λ,x)} f(x) for λ ∈ Z^{2g} (symmetric gauge). A Bohr–Sommerfeld
//! leaf with label q is x₀ + span_R(L), x₀ = Σ (q_i/k) t_i in the adapted frame [W T]; its unit
//! section is e^{iπkω(x₀,v)} at x₀+v. All phases are returned as exact exponents θ of e^{iπθ}.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::phase::{expi_pi, is_zero_mod2, reduce_mod2};
use crate::symplectic::{adapted_frame, omega_int, omega_rat, Lagrangian, SpElement};
use crate::zlattice::{int, Rat, RatMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Level(u64);

impl Level {
    pub fn new(k: u64) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::Invalid(format!("level must be a positive even integer, got {k}")));
        }
        Ok(Level(k))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn rat(self) -> Rat {
        Rat::from_integer(BigInt::from(self.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BSLeaf {
    pub label: Vec<i64>,
    pub base: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSpace {
    genus: usize,
    lagrangian: Lagrangian,
    level: Level,
    frame: SpElement,
    frame_rat: RatMatrix,
    frame_inv: RatMatrix,
}

impl HilbertSpace {
    pub fn new(l: &Lagrangian, level: Level) -> Self {
        let frame = adapted_frame(l);
        let frame_inv = frame.inverse().matrix().to_rat();
        let frame_rat = frame.matrix().to_rat();
        HilbertSpace { genus: l.genus(), lagrangian: l.clone(), level, frame, frame_rat, frame_inv }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn k(&self) -> u64 {
        self.level.0
    }

    pub fn frame(&self) -> &SpElement {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        (self.k() as usize).pow(self.genus as u32)
    }

    /// Label of basis index `idx` (lexicographic, first coordinate most significant).
    pub fn label(&self, mut idx: usize) -> Vec<i64> {
        let k = self.k() as usize;
        let mut q = vec![0i64; self.genus];
        for i in (0..self.genus).rev() {
            q[i] = (idx % k) as i64;
            idx /= k;
        }
        q
    }

    pub fn index(&self, q: &[i64]) -> usize {
        let k = self.k() as i64;
        q.iter().fold(0usize, |acc, &x| acc * k as usize + x.rem_euclid(k) as usize)
    }

    fn w(&self, i: usize) -> Vec<BigInt> {
        self.frame.matrix().column(i)
    }

    fn t(&self, i: usize) -> Vec<BigInt> {
        self.frame.matrix().column(self.genus + i)
    }

    pub fn base_point(&self, q: &[i64]) -> Vec<Rat> {
        let k = self.level.rat();
        let mut x = vec![Rat::zero(); 2 * self.genus];
        for i in 0..self.genus {
            let c = Rat::from_integer(int(q[i])) / &k;
            for (r, t) in self.t(i).into_iter().enumerate() {
                x[r] += &c * Rat::from_integer(t);
            }
        }
        x
    }

    pub fn leaf(&self, idx: usize) -> BSLeaf {
        let label = self.label(idx);
        let base = self.base_point(&label);
        BSLeaf { label, base }
    }

    pub fn leaves(&self) -> Vec<BSLeaf> {
        (0..self.dim()).map(|i| self.leaf(i)).collect()
    }

    /// Frame coordinates (a, b) with y = W a + T b.
    pub fn frame_coords(&self, y: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
        let c = self.frame_inv.mul_vec(y).expect("length 2g");
        let (a, b) = c.split_at(self.genus);
        (a.to_vec(), b.to_vec())
    }

    /// Label of the leaf through x (reduced mod k) — kω(w_i, x) mod k, which must be integral.
    pub fn label_of(&self, x: &[Rat]) -> Result<Vec<i64>> {
        let k = self.level.rat();
        (0..self.genus)
            .map(|i| {
                let w: Vec<Rat> = self.w(i).into_iter().map(Rat::from_integer).collect();
                let v = omega_rat(&w, x) * &k;
                if !v.is_integer() {
                    return Err(Error::Invalid("point is not on a Bohr–Sommerfeld leaf".into()));
                }
                Ok(v.to_integer().to_i64().unwrap().rem_euclid(self.k() as i64))
            })
            .collect()
    }

    /// θ with section value e^{iπθ} of the basis section of leaf q at the cover point x.
    pub fn section_phase(&self, q: &[i64], x: &[Rat]) -> Result<Rat> {
        let x0 = self.base_point(q);
        let d: Vec<Rat> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let (a, b) = self.frame_coords(&d);
        if b.iter().any(|v| !v.is_integer()) {
            return Err(Error::Invalid("point is not on the leaf".into()));
        }
        let g = self.genus;
        let fr = &self.frame_rat;
        let mut v = vec![Rat::zero(); 2 * g];
        let mut lam = vec![Rat::zero(); 2 * g];
        for r in 0..2 * g {
            for i in 0..g {
                v[r] += fr.get(r, i) * &a[i];
                lam[r] += fr.get(r, g + i) * &b[i];
            }
        }
        let x0v: Vec<Rat> = x0.iter().zip(&v).map(|(p, q)| p + q).collect();
        let k = self.level.rat();
        Ok(reduce_mod2(&(k * (omega_rat(&lam, &x0v) + omega_rat(&x0, &v)))))
    }
}

/// leaf_section_phase as a complex number.
pub fn leaf_section_phase(space: &HilbertSpace, leaf: &BSLeaf, x: &[Rat]) -> Result<Complex64> {
    Ok(expi_pi(&space.section_phase(&leaf.label, x)?))
}

/// Exponent θ of the holonomy e^{iπθ} picked up by the symmetric-gauge section when transported
/// from x₀ once around the lattice circuit v ∈ L ∩ Z^{2g}: θ = 2kω(x₀,v). Zero mod 2 exactly on
/// Bohr–Sommerfeld leaves.
pub fn circuit_holonomy(x0: &[Rat], v: &[BigInt], k: u64) -> Rat {
    let v: Vec<Rat> = v.iter().cloned().map(Rat::from_integer).collect();
    reduce_mod2(&(Rat::from_integer(BigInt::from(2 * k)) * omega_rat(x0, &v)))
}

pub fn bs_leaves(l: &Lagrangian, level: Level) -> Vec<BSLeaf> {
    HilbertSpace::new(l, level).leaves()
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub space: HilbertSpace,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(space: &HilbertSpace) -> Self {
        StateVector { space: space.clone(), amps: vec![Complex64::new(0.0, 0.0); space.dim()] }
    }

    pub fn basis(space: &HilbertSpace, q: &[i64]) -> Self {
        let mut v = Self::zeros(space);
        v.amps[space.index(q)] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn scale(&self, s: Complex64) -> Self {
        StateVector { space: self.space.clone(), amps: self.amps.iter().map(|a| a * s).collect() }
    }

    pub fn inner(&self, o: &StateVector) -> Complex64 {
        crate::phase::inner(&self.amps, &o.amps)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }
}

/// Exponent θ of c_Σ(a,l) = e^{iπθ} = e^{−iπkω(a,l)}. Any integer k is accepted here.
pub fn gauge_cocycle(a: &[Rat], l: &[BigInt], k: i64) -> Rat {
    let l: Vec<Rat> = l.iter().cloned().map(Rat::from_integer).collect();
    reduce_mod2(&(-Rat::from_integer(BigInt::from(k)) * omega_rat(a, &l)))
}

#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub k: i64,
    pub trials: usize,
    pub passed: bool,
    /// (a, l1, l2) violating c(a,l1+l2) = c(a,l1)·c(a+l1,l2)
    pub witness: Option<(Vec<Rat>, Vec<BigInt>, Vec<BigInt>)>,
}

fn cocycle_defect(a: &[Rat], l1: &[BigInt], l2: &[BigInt], k: i64) -> Rat {
    let sum: Vec<BigInt> = l1.iter().zip(l2).map(|(x, y)| x + y).collect();
    let shifted: Vec<Rat> = a.iter().zip(l1).map(|(x, y)| x + Rat::from_integer(y.clone())).collect();
    reduce_mod2(&(gauge_cocycle(a, &sum, k) - gauge_cocycle(a, l1, k) - gauge_cocycle(&shifted, l2, k)))
}

/// Checks the cocycle identity on an exhaustive small box of g=1 integer pairs, then on random
/// genus-`g` triples.
pub fn cocycle_check<R: Rng>(k: i64, g: usize, trials: usize, rng: &mut R) -> CocycleReport {
    let mut cases: Vec<(Vec<Rat>, Vec<BigInt>, Vec<BigInt>)> = Vec::new();
    let a0 = vec![Rat::new(int(1), int(2)); 2 * g];
    for l1 in 0..4i64 {
        for l2 in 0..4i64 {
            let mut x = vec![int(0); 2 * g];
            let mut y = vec![int(0); 2 * g];
            if g > 0 {
                x[0] = int(l1 & 1);
                x[g] = int(l1 >> 1);
                y[0] = int(l2 & 1);
                y[g] = int(l2 >> 1);
            }
            cases.push((a0.clone(), x, y));
        }
    }
    for _ in 0..trials {
        let a: Vec<Rat> = (0..2 * g).map(|_| Rat::new(int(rng.gen_range(-12..=12)), int(rng.gen_range(1..=12)))).collect();
        let l1: Vec<BigInt> = (0..2 * g).map(|_| int(rng.gen_range(-3..=3))).collect();
        let l2: Vec<BigInt> = (0..2 * g).map(|_| int(rng.gen_range(-3..=3))).collect();
        cases.push((a, l1, l2));
    }
    let n = cases.len();
    let witness = cases.into_iter().find(|(a, l1, l2)| !is_zero_mod2(&cocycle_defect(a, l1, l2, k)));
    CocycleReport { k, trials: n, passed: witness.is_none(), witness }
}

/// True iff (k/2)·ω(l1,l2) ∈ Z, i.e. the cocycle defect e^{−iπkω(l1,l2)} is trivial.
pub fn cocycle_condition(l1: &[BigInt], l2: &[BigInt], k: i64) -> bool {
    (omega_int(l1, l2) * BigInt::from(k)) % 2 == BigInt::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::line;
    use crate::zlattice::rat;

    #[test]
    fn leaves_g1() {
        let s = HilbertSpace::new(&Lagrangian::standard(1), Level::new(2).unwrap());
        let l = s.leaves();
        assert_eq!(l.len(), 2);
        assert_eq!(l[0].base, vec![rat(0, 1), rat(0, 1)]);
        assert_eq!(l[1].base, vec![rat(0, 1), rat(1, 2)]);
        let g0 = HilbertSpace::new(&Lagrangian::standard(0), Level::new(4).unwrap());
        assert_eq!(g0.dim(), 1);
    }

    #[test]
    fn section_quasi_periodic() {
        let s = HilbertSpace::new(&line(1, 2).unwrap(), Level::new(4).unwrap());
        for leaf in s.leaves() {
            assert!(s.section_phase(&leaf.label, &leaf.base).unwrap().is_zero());
            assert_eq!(s.label_of(&leaf.base).unwrap(), leaf.label);
            // f(x+λ) = e^{iπkω(λ,x)} f(x)
            let x: Vec<Rat> = leaf.base.iter().zip([rat(1, 3), rat(2, 3)]).map(|(a, b)| a + b).collect();
            let lam = [rat(2, 1), rat(-1, 1)];
            let y: Vec<Rat> = x.iter().zip(&lam).map(|(a, b)| a + b).collect();
            let lhs = s.section_phase(&leaf.label, &y).unwrap();
            let rhs = s.section_phase(&leaf.label, &x).unwrap() + rat(4, 1) * omega_rat(&lam, &x);
            assert!(is_zero_mod2(&(lhs - rhs)));
        }
    }

    #[test]
    fn holonomy_detects_bs() {
        let v = [int(1), int(0)];
        assert!(circuit_holonomy(&[rat(0, 1), rat(1, 2)], &v, 2).is_zero());
        assert!(!circuit_holonomy(&[rat(0, 1), rat(1, 3)], &v, 2).is_zero());
    }

    #[test]
    fn cocycle_example() {
        let th = gauge_cocycle(&[rat(1, 2), rat(0, 1)], &[int(0), int(1)], 2);
        assert_eq!(th, rat(1, 1));
        let mut rng = rand::thread_rng();
        assert!(cocycle_check(4, 1, 20, &mut rng).passed);
        assert!(!cocycle_check(3, 1, 0, &mut rng).passed);
    }
}
