//! Executable checks of the theory's structural claims, grouped into suites. Each check reports
//! the number of cases, the worst residual against its oracle, and pass/fail at its tolerance.

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::homology::{boundary_lagrangian, cohomology, cohomology_closed, lefschetz_identity, SimplicialPair};
use crate::intertwine::{bks_pairing, generator_exact, mapping_class_exact, triple_law_residual, word_operator};
use crate::phase::{max_abs_diff_vec, CMatrix};
use crate::quantize::{bs_leaves, cocycle_check, HilbertSpace, Level, StateVector};
use crate::symplectic::{
    act_on_lagrangian, direct_sum, is_lagrangian, line, maslov_index, random_lagrangian, random_word, reflect, Lagrangian,
    SpElement, SpToken, SpWord,
};
use crate::torsion::{random_complex, torsion_oracle, torus_into_annuli, BasedChainComplex};
use crate::tqft::{
    closed_invariant, closed_invariant_by_gluing, conjugate, direct_closed_formula, framing_phase, lens_cs_table,
    lens_gauss_oracle, lens_word, mapping_torus_invariant, tensor, ExtendedCobordism, SurgeryWord,
};
use crate::triangulate as tri;
use crate::zlattice::{int, IntMatrix, Rat, SparseVec};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, cases: usize, residual: f64, tolerance: f64, ok: bool, detail: String) -> Check {
        Check { name: name.into(), passed: ok && residual <= tolerance, cases, residual, tolerance, detail }
    }

    fn exact(name: &str, cases: usize, failures: usize, detail: String) -> Check {
        Check::new(name, cases, failures as f64, 0.0, failures == 0, detail)
    }

    fn failed(name: &str, e: impl std::fmt::Display) -> Check {
        Check { name: name.into(), passed: false, cases: 0, residual: f64::INFINITY, tolerance: 0.0, detail: format!("error: {e}") }
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Report {
        Report { suite: suite.into(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Axioms,
    Cocycle,
    Torsion,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "axioms" => Ok(Suite::Axioms),
            "cocycle" => Ok(Suite::Cocycle),
            "torsion" => Ok(Suite::Torsion),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?} (axioms|cocycle|torsion|all)")),
        }
    }
}

/// Run a suite. `levels` drives the representation checks; the cocycle suite tests exactly those
/// levels (odd ones are expected to produce a witness, which counts as a failure).
pub fn run_suite(suite: Suite, levels: &[u64], seed: u64, tolerance: Option<f64>) -> Report {
    let tol = |t: f64| tolerance.unwrap_or(t);
    let name = match suite {
        Suite::Axioms => "axioms",
        Suite::Cocycle => "cocycle",
        Suite::Torsion => "torsion",
        Suite::All => "all",
    };
    let mut checks = Vec::new();
    if matches!(suite, Suite::Axioms | Suite::All) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        checks.push(dimension_law(&mut rng, &[0, 1, 2, 3], levels, 5));
        checks.push(composition_anomaly(&mut rng, levels, 200, 50, tol(1e-9)));
        checks.push(generator_reproduction(levels, tol(1e-12)));
        checks.push(strict_representation(&mut rng, levels, 500, tol(1e-9)));
        checks.push(sl2_relations(levels));
        checks.push(maslov_exhaustive());
        checks.push(maslov_random(&mut rng, 200));
        checks.extend(tqft_axioms(&mut rng, levels, tol(1e-12), tol(1e-9)));
        checks.push(lens_cross_engine(&[2, 3, 4, 5], levels, tol(1e-9)));
    }
    if matches!(suite, Suite::Cocycle | Suite::All) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &k in levels {
            checks.push(cocycle(k as i64, &mut rng));
        }
    }
    if matches!(suite, Suite::Torsion | Suite::All) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        checks.push(torsion_oracle_check(&mut rng, 100, tol(1e-12)));
        checks.push(torsion_times_two());
        checks.push(torsion_gluing(tol(1e-9)));
        checks.push(torsion_scaling(&mut rng, 50));
        checks.push(homology_engine());
    }
    Report::new(name, seed, checks)
}

fn levels_of(ks: &[u64]) -> Vec<Level> {
    ks.iter().filter_map(|&k| Level::new(k).ok()).collect()
}

// ---------------------------------------------------------------------------
// Quantization and representation

pub fn dimension_law<R: Rng>(rng: &mut R, genera: &[usize], levels: &[u64], per: usize) -> Check {
    let name = "dimension law";
    let mut cases = 0;
    let mut bad = Vec::new();
    for &g in genera {
        for lv in levels_of(levels) {
            for _ in 0..per {
                let l = random_lagrangian(rng, g, 5, 2);
                let n = bs_leaves(&l, lv).len();
                let d = HilbertSpace::new(&l, lv).dim();
                let want = (lv.get() as usize).pow(g as u32);
                cases += 1;
                if n != want || d != want {
                    bad.push(format!("g={g} k={} leaves={n} dim={d}", lv.get()));
                }
            }
        }
    }
    Check::exact(name, cases, bad.len(), bad.join("; "))
}

pub fn composition_anomaly<R: Rng>(rng: &mut R, levels: &[u64], n1: usize, n2: usize, tol: f64) -> Check {
    run("composition anomaly", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for lv in levels_of(levels) {
            for (g, n) in [(1, n1), (2, n2)] {
                for _ in 0..n {
                    let a = random_lagrangian(rng, g, 6, 2);
                    let b = random_lagrangian(rng, g, 6, 2);
                    let c = random_lagrangian(rng, g, 6, 2);
                    worst = worst.max(triple_law_residual(&a, &b, &c, lv)?.0);
                    cases += 1;
                }
            }
        }
        Ok(Check::new("composition anomaly", cases, worst, tol, true, "max |F13 F32 F21 − e^{−iπτ/4} I|".into()))
    })
}

fn gamma_formula(g: usize, k: u64) -> CMatrix {
    let sp = HilbertSpace::new(&Lagrangian::standard(g), Level::new(k).expect("even"));
    let n = sp.dim();
    let mut m = CMatrix::zeros(n, n);
    let sc = (k as f64).powf(-(g as f64) / 2.0);
    for i in 0..n {
        for j in 0..n {
            let dot: i64 = sp.label(i).iter().zip(sp.label(j)).map(|(a, b)| a * b).sum();
            let th = 2.0 * std::f64::consts::PI * dot as f64 / k as f64;
            m.set(j, i, Complex64::from_polar(sc, th));
        }
    }
    m
}

pub fn generator_reproduction(levels: &[u64], tol: f64) -> Check {
    run("generator reproduction", || {
        let mut worst: f64 = 0.0;
        let mut inexact = Vec::new();
        let mut cases = 0;
        for lv in levels_of(levels) {
            for g in 1..=2 {
                let f = bks_pairing(
                    &HilbertSpace::new(&Lagrangian::dual_standard(g), lv),
                    &HilbertSpace::new(&Lagrangian::standard(g), lv),
                )?;
                worst = worst.max(f.to_cmatrix().max_abs_diff(&gamma_formula(g, lv.get())));
                cases += 1;
            }
            let l = Lagrangian::standard(1);
            let one = IntMatrix::identity(1);
            for (name, h, tok) in [("T", SpElement::t(), SpToken::Beta(one)), ("S", SpElement::s(), SpToken::Gamma)] {
                let u = mapping_class_exact(&h, 0, &l, &l, lv)?;
                if !u.exact_eq(&generator_exact(&tok, 1, lv)?) {
                    inexact.push(format!("U({name}) k={}", lv.get()));
                }
                cases += 1;
            }
        }
        Ok(Check::new("generator reproduction", cases, worst, tol, inexact.is_empty(), inexact.join("; ")))
    })
}

pub fn strict_representation<R: Rng>(rng: &mut R, levels: &[u64], pairs: usize, tol: f64) -> Check {
    run("strict representation", || {
        let mut worst: f64 = 0.0;
        let lvs = levels_of(levels);
        for i in 0..pairs {
            let lv = lvs[i % lvs.len()];
            let g = 1 + i % 2;
            let l = if i % 10 == 0 { random_lagrangian(rng, g, 4, 2) } else { Lagrangian::standard(g) };
            let nx = rng.gen_range(1..=4);
            let x = random_word(rng, g, nx, 2);
            let ny = rng.gen_range(1..=4);
            let y = random_word(rng, g, ny, 2);
            let (ax, mx) = word_operator(&x, &l, lv)?;
            let (ay, my) = word_operator(&y, &l, lv)?;
            // U(x)U(y) = U(y·x) with the τ-corrected integer of the composite
            let axy = ay.then(&ax, &l)?;
            let u = mapping_class_exact(&axy.h, axy.m, &l, &l, lv)?.to_cmatrix();
            worst = worst.max(mx.mul(&my).max_abs_diff(&u));
        }
        Ok(Check::new("strict representation", pairs, worst, tol, true, "U(x)U(y) vs U(x·y)".into()))
    })
}

/// S⁴ and (ST)⁶ act as e^{iπm/4}·I with m the accumulated τ bookkeeping; (ST)³ = U(S², m).
pub fn sl2_relations(levels: &[u64]) -> Check {
    run("SL(2,Z) relations", || {
        let st = [SpToken::Gamma, SpToken::Beta(IntMatrix::identity(1))];
        let words = [
            ("S^4", vec![SpToken::Gamma; 4]),
            ("(ST)^3", st.iter().cycle().take(6).cloned().collect()),
            ("(ST)^6", st.iter().cycle().take(12).cloned().collect()),
        ];
        let l = Lagrangian::standard(1);
        let mut worst: f64 = 0.0;
        let mut detail = Vec::new();
        for lv in levels_of(levels) {
            for (name, toks) in &words {
                let (acc, mat) = word_operator(&SpWord { genus: 1, tokens: toks.clone() }, &l, lv)?;
                let base = mapping_class_exact(&acc.h, 0, &l, &l, lv)?.to_cmatrix();
                worst = worst.max(mat.max_abs_diff(&base.scale(framing_phase(acc.m))));
                if acc.h.is_identity() {
                    worst = worst.max(mat.max_abs_diff(&CMatrix::identity(mat.rows).scale(framing_phase(acc.m))));
                }
                detail.push(format!("{name} k={} m={}", lv.get(), acc.m));
            }
        }
        Ok(Check::new("SL(2,Z) relations", detail.len(), worst, 1e-9, true, detail.join(", ")))
    })
}

// ---------------------------------------------------------------------------
// Maslov index

fn primitive_lines(r: i64) -> Vec<Lagrangian> {
    let mut out = Vec::new();
    for a in 0..=r {
        for b in -r..=r {
            if (a > 0 || b > 0) && num_integer::gcd(a, b) == 1 {
                out.push(line(a, b).expect("primitive"));
            }
        }
    }
    out
}

fn maslov_properties(ts: &[(Lagrangian, Lagrangian, Lagrangian, Lagrangian)], hs: &[SpElement]) -> Result<usize> {
    let mut bad = 0;
    for (a, b, c, d) in ts {
        let t = maslov_index(a, b, c)?;
        bad += (maslov_index(b, a, c)? != -t) as usize;
        bad += (maslov_index(a, c, b)? != -t) as usize;
        bad += (maslov_index(b, c, a)? != t) as usize;
        bad += (maslov_index(a, a, c)? != 0) as usize;
        let cocycle = t - maslov_index(a, b, d)? + maslov_index(a, c, d)? - maslov_index(b, c, d)?;
        bad += (cocycle != 0) as usize;
        for h in hs {
            let m = |l: &Lagrangian| act_on_lagrangian(h, l);
            bad += (maslov_index(&m(a)?, &m(b)?, &m(c)?)? != t) as usize;
        }
    }
    Ok(bad)
}

/// All ordered triples of the 8 lines through primitive vectors in {−2..2}², each with a fourth
/// line cycling through the list for the cocycle identity.
pub fn maslov_exhaustive() -> Check {
    run("Maslov index (g=1 exhaustive)", || {
        let ls = primitive_lines(2);
        let n = ls.len();
        let mut ts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for d in &ls {
                        ts.push((ls[i].clone(), ls[j].clone(), ls[k].clone(), d.clone()));
                    }
                }
            }
        }
        let hs = [SpElement::s(), SpElement::t(), SpElement::t().power(-2).compose(&SpElement::s())];
        let bad = maslov_properties(&ts, &hs)?;
        Ok(Check::exact("Maslov index (g=1 exhaustive)", n * n * n, bad, format!("{n} lines, {} quadruples", ts.len())))
    })
}

pub fn maslov_random<R: Rng>(rng: &mut R, n: usize) -> Check {
    run("Maslov index (g=2 random)", || {
        let ts: Vec<_> = (0..n)
            .map(|_| {
                (
                    random_lagrangian(rng, 2, 5, 2),
                    random_lagrangian(rng, 2, 5, 2),
                    random_lagrangian(rng, 2, 5, 2),
                    random_lagrangian(rng, 2, 5, 2),
                )
            })
            .collect();
        let hs: Vec<SpElement> = (0..2).map(|_| random_word(rng, 2, 5, 2).evaluate()).collect::<Result<_>>()?;
        let bad = maslov_properties(&ts, &hs)?;
        Ok(Check::exact("Maslov index (g=2 random)", n, bad, String::new()))
    })
}

// ---------------------------------------------------------------------------
// TQFT axioms

fn random_handlebody<R: Rng>(rng: &mut R, g: usize) -> Result<ExtendedCobordism> {
    let h = random_word(rng, g, 3, 2).evaluate()?;
    Ok(ExtendedCobordism::handlebody_with(g, h)?
        .with_lagrangian(random_lagrangian(rng, g, 4, 2))?
        .with_framing(rng.gen_range(0..8)))
}

pub fn tqft_axioms<R: Rng>(rng: &mut R, levels: &[u64], tol_exact: f64, tol: f64) -> Vec<Check> {
    let lvs = levels_of(levels);
    let mut out = Vec::new();
    out.push(run("disjoint union", || {
        let mut worst: f64 = 0.0;
        for &lv in &lvs {
            for _ in 0..4 {
                let a = random_handlebody(rng, 1)?;
                let b = random_handlebody(rng, 1)?;
                let u = a.union(&b).assign_vector(lv)?;
                let t = tensor(&a.assign_vector(lv)?, &b.assign_vector(lv)?)?;
                worst = worst.max(max_abs_diff_vec(&u.amps, &t.amps));
            }
        }
        Ok(Check::new("disjoint union", 4 * lvs.len(), worst, tol_exact, true, "Z(X⊔Y) vs Z(X)⊗Z(Y)".into()))
    }));
    out.push(run("orientation reversal", || {
        let mut worst: f64 = 0.0;
        for &lv in &lvs {
            for g in 1..=2 {
                let a = random_handlebody(rng, g)?;
                let r = a.reversed().assign_vector(lv)?;
                let c = conjugate(&a.assign_vector(lv)?)?;
                worst = worst.max(max_abs_diff_vec(&r.amps, &c.amps));
            }
        }
        Ok(Check::new("orientation reversal", 2 * lvs.len(), worst, tol_exact, true, "Z(−X) vs conj(Z(X))".into()))
    }));
    out.push(run("cylinder axiom", || {
        let mut worst: f64 = 0.0;
        for &lv in &lvs {
            for g in 1..=2 {
                let l = random_lagrangian(rng, g, 4, 2);
                let z = ExtendedCobordism::cylinder(g).with_lagrangian(direct_sum(&reflect(&l), &l))?.assign_vector(lv)?;
                let s = HilbertSpace::new(&l, lv);
                let mut id = StateVector::zeros(&z.space);
                for i in 0..s.dim() {
                    let v = StateVector::basis(&s, &s.label(i));
                    let t = tensor(&conjugate(&v)?, &v)?;
                    id.amps.iter_mut().zip(&t.amps).for_each(|(a, b)| *a += b);
                }
                worst = worst.max(max_abs_diff_vec(&z.amps, &id.amps));
            }
        }
        Ok(Check::new("cylinder axiom", 2 * lvs.len(), worst, tol, true, "Z(Σ×I) vs Σ_q C(v_q)⊗v_q".into()))
    }));
    out.push(run("Σ×S¹ self-gluing", || {
        let mut worst: f64 = 0.0;
        for &lv in &lvs {
            for g in 1..=2 {
                let (z, _) = mapping_torus_invariant(&SpElement::identity(g), 0, lv)?;
                worst = worst.max((z - Complex64::new((lv.get() as f64).powi(g as i32), 0.0)).norm());
            }
        }
        Ok(Check::new("Σ×S¹ self-gluing", 2 * lvs.len(), worst, tol, true, "value k^g".into()))
    }));
    out.push(run("solid torus gluings", || {
        let mut worst: f64 = 0.0;
        let mut detail = Vec::new();
        for &lv in &lvs {
            let k = lv.get() as f64;
            let (s3, n3) = closed_invariant_by_gluing(&SurgeryWord::parse_compact(1, "S")?, lv)?;
            let (s2s1, n1) = closed_invariant_by_gluing(&SurgeryWord::parse_compact(1, "")?, lv)?;
            worst = worst.max((s3.norm() - k.powf(-0.5)).abs()).max((s2s1 - Complex64::new(1.0, 0.0)).norm());
            detail.push(format!("k={}: S³ n={n3}, S²×S¹ n={n1}", lv.get()));
        }
        Ok(Check::new("solid torus gluings", 2 * lvs.len(), worst, tol, true, detail.join("; ")))
    }));
    out
}

/// Heegaard value of S T^p S against the Gauss-sum oracle and the direct formula on a
/// triangulated L(p,1) (CS values fed back, framing offset applied).
pub fn lens_cross_engine(ps: &[i64], levels: &[u64], tol: f64) -> Check {
    run("lens cross-engine", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        let mut framings = Vec::new();
        for &p in ps {
            let prof = cohomology_closed(&tri::lens_space(p as usize, 1)?);
            let (cs, offset) = lens_cs_table(p);
            let mass = (1.0 / prof.tors_order().to_f64().unwrap_or(f64::NAN)).sqrt();
            for lv in levels_of(levels) {
                let (v, n) = closed_invariant(&lens_word(p), lv)?;
                let oracle = lens_gauss_oracle(p, lv.get());
                let direct = direct_closed_formula(&prof, &cs, mass, lv)? * framing_phase(offset);
                worst = worst.max((v.norm() - oracle.norm()).abs()).max((v - direct).norm());
                framings.push(n);
                cases += 1;
            }
        }
        framings.dedup();
        Ok(Check::new("lens cross-engine", cases, worst, tol, true, format!("framings {framings:?}")))
    })
}

// ---------------------------------------------------------------------------
// Cocycle / evenness

pub fn cocycle(k: i64, rng: &mut impl Rng) -> Check {
    let r = cocycle_check(k, 2, 200, rng);
    let detail = match &r.witness {
        Some((a, l1, l2)) => format!(
            "k={k}: witness a={:?} l1={:?} l2={:?}",
            a.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            l1.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            l2.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        ),
        None => format!("k={k}: identity holds"),
    };
    Check::exact(&format!("cocycle k={k}"), r.trials, (!r.passed) as usize, detail)
}

/// Even k ≤ 10 pass; every odd k ≤ 9 yields a witness.
pub fn evenness(rng: &mut impl Rng) -> Check {
    let mut bad = Vec::new();
    for k in 1..=10i64 {
        let r = cocycle_check(k, 2, 100, rng);
        if r.passed != (k % 2 == 0) || (k % 2 == 1 && r.witness.is_none()) {
            bad.push(k.to_string());
        }
    }
    Check::exact("level evenness", 10, bad.len(), format!("unexpected at k = [{}]", bad.join(",")))
}

// ---------------------------------------------------------------------------
// Torsion

pub fn torsion_oracle_check<R: Rng>(rng: &mut R, n: usize, tol: f64) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let c = random_complex(rng, 12, true);
        let t = c.torsion().to_f64();
        let o = torsion_oracle(&c);
        worst = worst.max((t - o).abs() / o.abs());
    }
    Check::new("torsion vs Laplacian oracle", n, worst, tol, true, "relative error".into())
}

pub fn torsion_times_two() -> Check {
    run("×2 complex", || {
        let c = BasedChainComplex::from_dense(vec![1, 1], &[vec![vec![2]]])?;
        let t = c.torsion().value;
        Ok(Check::exact("×2 complex", 1, (t != Rat::from_integer(int(2))) as usize, format!("torsion {t}")))
    })
}

pub fn torsion_gluing(tol: f64) -> Check {
    run("torsion gluing", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for (n, m, at) in [(4, 4, 2), (4, 5, 2), (3, 6, 3)] {
            let r = torus_into_annuli(n, m, at).glue_check()?;
            worst = worst.max(r.residual);
            cases += 1;
        }
        Ok(Check::new("torsion gluing", cases, worst, tol, true, "torus cut into annuli".into()))
    })
}

fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> IntMatrix {
    loop {
        let m = IntMatrix::from_fn(n, n, |_, _| int(rng.gen_range(-3..=3)));
        if !m.det().expect("square").is_zero() {
            return m;
        }
    }
}

/// T(h·A) = T(h) · Π_q |det A_q|^{(−1)^{q+1}}, exactly.
pub fn torsion_scaling<R: Rng>(rng: &mut R, n: usize) -> Check {
    run("torsion scaling law", || {
        let mut bad = 0;
        let mut cases = 0;
        while cases < n {
            let c = random_complex(rng, 12, false);
            if c.betti().iter().all(|&b| b == 0) {
                continue;
            }
            let h = c.hbases();
            let t0 = c.torsion().value;
            let mut factor = Rat::one();
            let mut h2 = Vec::new();
            for (q, hq) in h.iter().enumerate() {
                let a = random_invertible(rng, hq.len());
                let d = Rat::from_integer(if hq.is_empty() { int(1) } else { a.det()?.abs() });
                factor = if q % 2 == 1 { factor * d } else { factor / d };
                h2.push(
                    (0..hq.len())
                        .map(|j| {
                            let mut v = SparseVec::new();
                            for (i, hv) in hq.iter().enumerate() {
                                let s = Rat::from_integer(a.get(i, j).clone());
                                for (idx, x) in hv {
                                    let e = v.entry(*idx).or_insert_with(Rat::zero);
                                    *e += x * &s;
                                }
                            }
                            v.retain(|_, x| !x.is_zero());
                            v
                        })
                        .collect::<Vec<_>>(),
                );
            }
            let t1 = c.clone().with_hbases(h2)?.torsion().value;
            bad += (t1 != t0 * factor) as usize;
            cases += 1;
        }
        Ok(Check::exact("torsion scaling law", cases, bad, "exact rational comparison".into()))
    })
}

// ---------------------------------------------------------------------------
// Homology engine

pub fn homology_pairs() -> Result<Vec<(String, SimplicialPair)>> {
    let mut out = vec![
        ("solid torus".to_string(), SimplicialPair::with_boundary(tri::solid_torus())?),
        ("genus-2 handlebody".to_string(), SimplicialPair::with_boundary(tri::handlebody(2))?),
        ("Σ₁×I".to_string(), SimplicialPair::with_boundary(tri::surface_cylinder(1))?),
    ];
    for (p, q) in [(2, 1), (3, 1), (5, 2)] {
        out.push((format!("L({p},{q}) piece"), SimplicialPair::with_boundary(tri::lens_piece(p, q)?)?));
    }
    Ok(out)
}

/// Boundary Lagrangian is Lagrangian; Lefschetz identity; Tors H²(X,∂X) ≅ Tors H²(X).
pub fn homology_engine() -> Check {
    run("homology engine", || {
        let pairs = homology_pairs()?;
        let mut bad = Vec::new();
        for (name, p) in &pairs {
            let bd = boundary_lagrangian(p)?;
            let l = &bd.lagrangian;
            if !is_lagrangian(l.genus(), l.gens())?.is_ok() {
                bad.push(format!("{name}: not Lagrangian"));
            }
            let prof = cohomology(p);
            if !lefschetz_identity(&prof) {
                bad.push(format!("{name}: Lefschetz identity"));
            }
            let mut a = prof.torsion_h2.clone();
            let mut b = prof.rel_torsion_h2.clone().unwrap_or_default();
            a.sort();
            b.sort();
            if a != b {
                bad.push(format!("{name}: Tors H² mismatch"));
            }
        }
        Ok(Check::exact("homology engine", pairs.len(), bad.len(), bad.join("; ")))
    })
}
