use std::time::{Duration, Instant};

use abelian_cs::verify::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Criterion {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Criterion {
    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.budget.is_none_or(|b| self.elapsed <= b)
    }

    fn line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} [{} cases, residual {:.3e} ≤ {:.0e}{}]", c.name, c.cases, c.residual, c.tolerance, if c.passed { "" } else { " FAILED" }))
            .collect();
        let time = match self.budget {
            Some(b) => format!("{:.2?} of {:?}", self.elapsed, b),
            None => format!("{:.2?}", self.elapsed),
        };
        format!("criterion {:>2}: {} — {} — {} ({time})", self.id, if self.passed() { "PASS" } else { "FAIL" }, self.title, parts.join("; "))
    }
}

fn criterion(id: usize, title: &'static str, budget: Option<u64>, f: impl FnOnce() -> Vec<Check>) -> Criterion {
    let t = Instant::now();
    let checks = f();
    Criterion { id, title, checks, elapsed: t.elapsed(), budget: budget.map(Duration::from_secs) }
}

#[test]
fn acceptance() {
    let levels = [2, 4];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cs = vec![
        criterion(1, "dimension law", Some(1), || vec![dimension_law(&mut rng, &[0, 1, 2, 3], &[2, 4, 6], 5)]),
        criterion(2, "composition-law anomaly", Some(30), || vec![composition_anomaly(&mut rng, &levels, 200, 50, 1e-9)]),
        criterion(3, "generator reproduction", None, || vec![generator_reproduction(&levels, 1e-12)]),
        criterion(4, "strict extended representation", None, || {
            vec![strict_representation(&mut rng, &levels, 500, 1e-9), sl2_relations(&levels)]
        }),
        criterion(5, "Maslov index properties", None, || vec![maslov_exhaustive(), maslov_random(&mut rng, 200)]),
        criterion(6, "TQFT axioms", None, || tqft_axioms(&mut rng, &levels, 1e-12, 1e-9)),
        criterion(7, "lens cross-engine equality", None, || vec![lens_cross_engine(&[2, 3, 4, 5], &levels, 1e-9)]),
        criterion(8, "torsion engine", None, || {
            vec![torsion_oracle_check(&mut rng, 100, 1e-12), torsion_times_two(), torsion_gluing(1e-9), torsion_scaling(&mut rng, 50)]
        }),
        criterion(9, "evenness of the level", None, || vec![evenness(&mut rng)]),
        criterion(10, "homology engine", None, || vec![homology_engine()]),
    ];
    for c in &cs {
        println!("{}", c.line());
    }
    let failed: Vec<usize> = cs.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
