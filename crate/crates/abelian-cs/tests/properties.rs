use abelian_cs::intertwine::{intertwiner, word_operator};
use abelian_cs::quantize::{cocycle_condition, gauge_cocycle, HilbertSpace, Level};
use abelian_cs::symplectic::{
    act_on_lagrangian, maslov_index, random_lagrangian, random_word, sp_decompose, symplectic_form, Lagrangian, SpElement,
};
use abelian_cs::torsion::{random_complex, torsion_oracle};
use abelian_cs::zlattice::{hermite_normal_form, int, integer_kernel, signature, smith_normal_form, IntMatrix, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: usize, cols: usize, r: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-r..=r, rows * cols)
        .prop_map(move |v| IntMatrix::from_fn(rows, cols, |i, j| int(v[i * cols + j])))
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..5, 1usize..5)
}

fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hnf_is_canonical_and_idempotent(a in dims().prop_flat_map(|(m, n)| matrix(m, n, 6))) {
        let (h, u) = hermite_normal_form(&a);
        prop_assert!(u.is_unimodular());
        prop_assert_eq!(a.mul(&u).unwrap(), h.clone());
        let (h2, _) = hermite_normal_form(&h);
        prop_assert_eq!(h2, h);
    }

    #[test]
    fn snf_divisibility_chain(a in dims().prop_flat_map(|(m, n)| matrix(m, n, 6))) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.p.mul(&a).unwrap().mul(&s.q).unwrap(), s.d.clone());
        prop_assert_eq!(s.u.mul(&s.d).unwrap().mul(&s.v).unwrap(), a.clone());
        let d = s.diagonal();
        for w in d.windows(2) {
            if !w[1].is_zero() {
                prop_assert!(!w[0].is_zero() && (&w[1] % &w[0]).is_zero());
            }
        }
        prop_assert!(d.iter().all(|x| !x.is_negative()));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                prop_assert!(i == j || s.d.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn kernel_is_saturated_kernel(a in dims().prop_flat_map(|(m, n)| matrix(m, n, 4))) {
        let k = integer_kernel(&a);
        prop_assert!(a.mul(&k).unwrap().is_zero());
        prop_assert_eq!(k.cols(), a.cols() - smith_normal_form(&a).rank());
        prop_assert!(smith_normal_form(&k).torsion().is_empty());
    }

    #[test]
    fn signature_is_congruence_invariant(s in matrix(4, 4, 4), p in matrix(4, 4, 3)) {
        let s = s.add(&s.transpose()).unwrap();
        prop_assume!(!p.det().unwrap().is_zero());
        let c = p.transpose().mul(&s).unwrap().mul(&p).unwrap();
        prop_assert_eq!(signature(&c.to_rat()).unwrap(), signature(&s.to_rat()).unwrap());
    }

    #[test]
    fn maslov_axioms(seed in any::<u64>(), g in 1usize..3) {
        let mut rng = rng_from(seed);
        let l: Vec<Lagrangian> = (0..4).map(|_| random_lagrangian(&mut rng, g, 5, 2)).collect();
        let t = |a: usize, b: usize, c: usize| maslov_index(&l[a], &l[b], &l[c]).unwrap();
        prop_assert_eq!(t(0, 1, 2), -t(1, 0, 2));
        prop_assert_eq!(t(0, 1, 2), t(1, 2, 0));
        prop_assert_eq!(t(0, 0, 2), 0);
        prop_assert_eq!(t(0, 1, 2) - t(0, 1, 3) + t(0, 2, 3) - t(1, 2, 3), 0);
        prop_assert!(t(0, 1, 2).abs() <= g as i64);
        let h = random_word(&mut rng, g, 6, 3).evaluate().unwrap();
        let m: Vec<Lagrangian> = l.iter().map(|x| act_on_lagrangian(&h, x).unwrap()).collect();
        prop_assert_eq!(maslov_index(&m[0], &m[1], &m[2]).unwrap(), t(0, 1, 2));
    }

    #[test]
    fn lagrangian_canonical_form(seed in any::<u64>(), g in 1usize..4, ops in prop::collection::vec((0usize..3, 0usize..3, -3i64..4, any::<bool>()), 0..8)) {
        let l = random_lagrangian(&mut rng_from(seed), g, 6, 2);
        // unimodular change of generators from elementary column operations
        let mut gens = l.gens().clone();
        for (i, j, c, neg) in ops {
            let (i, j) = (i % g, j % g);
            if i != j {
                gens.add_col_multiple(i, j, &int(c));
            } else if neg {
                gens.negate_col(i);
            }
        }
        prop_assert_eq!(Lagrangian::new(g, &gens).unwrap(), l);
    }

    #[test]
    fn gauge_cocycle_even_levels(a in prop::collection::vec((-9i64..9, 1i64..9), 2), l1 in prop::collection::vec(-3i64..4, 2), l2 in prop::collection::vec(-3i64..4, 2), half_k in 1i64..6) {
        let k = 2 * half_k;
        let a: Vec<Rat> = a.iter().map(|&(n, d)| Rat::new(int(n), int(d))).collect();
        let l1: Vec<BigInt> = l1.into_iter().map(int).collect();
        let l2: Vec<BigInt> = l2.into_iter().map(int).collect();
        let sum: Vec<BigInt> = l1.iter().zip(&l2).map(|(x, y)| x + y).collect();
        let shifted: Vec<Rat> = a.iter().zip(&l1).map(|(x, y)| x + Rat::from_integer(y.clone())).collect();
        let defect = gauge_cocycle(&a, &sum, k) - gauge_cocycle(&a, &l1, k) - gauge_cocycle(&shifted, &l2, k);
        let two = Rat::from_integer(int(2));
        prop_assert!((defect / two).is_integer());
        prop_assert!(cocycle_condition(&l1, &l2, k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sp_decompose_round_trip(seed in any::<u64>(), g in 1usize..4, len in 0usize..10) {
        let h = random_word(&mut rng_from(seed), g, len, 3).evaluate().unwrap();
        let j = SpElement::new(symplectic_form(g)).unwrap();
        prop_assert_eq!(h.matrix().transpose().mul(j.matrix()).unwrap().mul(h.matrix()).unwrap(), j.matrix().clone());
        prop_assert_eq!(sp_decompose(&h).evaluate().unwrap(), h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn intertwiners_are_unitary(seed in any::<u64>(), g in 1usize..3, half_k in 1u64..3) {
        let mut rng = rng_from(seed);
        let lv = Level::new(2 * half_k).unwrap();
        let a = random_lagrangian(&mut rng, g, 5, 2);
        let b = random_lagrangian(&mut rng, g, 5, 2);
        let f = intertwiner(&b, &a, lv).unwrap();
        prop_assert!(f.unitarity_residual() < 1e-9);
        prop_assert_eq!(HilbertSpace::new(&a, lv).dim(), (2 * half_k as usize).pow(g as u32));
    }

    #[test]
    fn word_operators_are_unitary(seed in any::<u64>(), g in 1usize..3) {
        let w = random_word(&mut rng_from(seed), g, 5, 2);
        let (_, m) = word_operator(&w, &Lagrangian::standard(g), Level::new(4).unwrap()).unwrap();
        prop_assert!(m.unitarity_residual() < 1e-9);
    }

    #[test]
    fn torsion_matches_oracle_and_integral_identity(seed in any::<u64>(), acyclic in any::<bool>()) {
        let c = random_complex(&mut rng_from(seed), 12, acyclic);
        let t = c.torsion();
        let o = torsion_oracle(&c);
        prop_assert!((t.to_f64() - o).abs() <= 1e-10 * o);
        let ci = c.clone().with_hbases(c.integral_hbases().unwrap()).unwrap();
        prop_assert_eq!(ci.torsion().value, c.integral_torsion().unwrap());
        prop_assert!(t.value > Rat::zero() || t.value.is_one());
    }
}
