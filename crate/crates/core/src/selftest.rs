//! Seeded randomized property suites, runnable outside the test harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{eval_f, fixed_points};
use crate::padic::{Padic, PrecisionConfig};
use crate::phase::brute_force_cross_check;
use crate::potts::{agrees_relative, compatibility_check, random_rational, BoundaryField, CompatOptions, ModelParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &str) -> Self {
        Self { result: SuiteResult { name: name.into(), cases: 0, failures: 0, first_failure: None } }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.result.cases += 1;
        if !ok {
            self.result.failures += 1;
            if self.result.first_failure.is_none() {
                self.result.first_failure = Some(what());
            }
        }
    }
}

/// Equal at the precision both sides carry.
fn same(a: &Padic, b: &Padic) -> bool {
    a.sub(b).is_ok_and(|d| d.is_zero())
}

const PRIMES: [u64; 5] = [2, 3, 5, 7, 13];

fn field_axioms(rng: &mut ChaCha8Rng, cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("field axioms");
    for &p in &PRIMES {
        let m = ModelParams::new(p, 1, 1, cfg).expect("valid");
        for _ in 0..100 {
            let (a, b, c) = (random_rational(&m, rng), random_rational(&m, rng), random_rational(&m, rng));
            let assoc = a.add(&b).and_then(|x| x.add(&c)).ok().zip(b.add(&c).and_then(|x| a.add(&x)).ok());
            s.check(assoc.is_some_and(|(l, r)| same(&l, &r)), || format!("(a+b)+c, a={a}"));
            let dist = b.add(&c).and_then(|x| a.mul(&x)).ok().zip(a.mul(&b).and_then(|x| a.mul(&c).and_then(|y| x.add(&y))).ok());
            s.check(dist.is_some_and(|(l, r)| same(&l, &r)), || format!("a(b+c), a={a}"));
            let inv = a.inv().and_then(|i| i.mul(&a)).map(|one| agrees_relative(&one, &m.int(1), cfg.cap() as i64 - 2));
            s.check(inv.unwrap_or(false), || format!("a * a^-1, a={a}"));
        }
    }
    s.result
}

fn sqrt_soundness(rng: &mut ChaCha8Rng, cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("square roots");
    for &p in &PRIMES {
        let m = ModelParams::new(p, 1, 1, cfg).expect("valid");
        for _ in 0..100 {
            let a = random_rational(&m, rng);
            let square = a.mul(&a).expect("same prime");
            s.check(square.has_sqrt().unwrap_or(false), || format!("a^2 has no root, a={a}"));
            if let Ok(r) = random_rational(&m, rng).sqrt() {
                let x = r.canonical.mul(&r.canonical).expect("same prime");
                s.check(x.valuation().is_ok(), || "degenerate root".into());
            }
            if let Ok(roots) = a.sqrt() {
                let back = roots.canonical.mul(&roots.canonical).expect("same prime");
                s.check(agrees_relative(&back, &a, cfg.cap() as i64 - 2), || format!("r^2 != a for a={a}"));
            }
        }
    }
    s.result
}

fn fixed_point_sweep(cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("fixed points and Vieta");
    for p in [3u64, 5, 7] {
        for q in 1..=10u32 {
            for n in (-4..=4i64).filter(|n| *n != 0) {
                let m = ModelParams::new(p, q, n, cfg).expect("valid");
                let Ok(f) = fixed_points(&m) else {
                    s.check(false, || format!("fixed_points failed for ({p},{q},{n})"));
                    continue;
                };
                if let Some(agrees) = f.agrees_with_theorem {
                    s.check(agrees || f.degenerate, || format!("existence disagrees at ({p},{q},{n})"));
                }
                if let (Some(x1), Some(x2)) = (&f.x1, &f.x2) {
                    let t = &m.theta;
                    let sum = t.mul(t).unwrap().sub(&t.mul_i64(2).unwrap()).unwrap().add_i64(1 - 2 * q as i64).unwrap();
                    s.check(agrees_relative(&x1.add(x2).unwrap(), &sum, cfg.cap() as i64 - 4) || sum.is_zero(), || {
                        format!("x1 + x2 at ({p},{q},{n})")
                    });
                    let prod = m.int((q * q) as i64);
                    s.check(agrees_relative(&x1.mul(x2).unwrap(), &prod, cfg.cap() as i64 - 4), || format!("x1 x2 at ({p},{q},{n})"));
                    for x in [x1, x2] {
                        let fx = eval_f(x, &m);
                        s.check(fx.is_ok_and(|fx| agrees_relative(&fx, x, cfg.cap() as i64 / 2)), || format!("f(x) != x at ({p},{q},{n})"));
                    }
                }
            }
        }
    }
    s.result
}

fn compatibility(rng: &mut ChaCha8Rng, cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("compatibility");
    for (p, q, n) in [(3u64, 1u32, 1i64), (5, 1, 2), (3, 2, 2), (5, 5, 3)] {
        let m = ModelParams::new(p, q, n, cfg).expect("valid");
        let f = fixed_points(&m).expect("computable");
        for i in 0..3 {
            let Some(x) = f.root(i) else { continue };
            let h = BoundaryField::invariant_line(&m, x, 1, &m.int(1)).expect("valid");
            let r = compatibility_check(2, &h, &m, CompatOptions::for_params(&m));
            s.check(r.is_ok_and(|r| r.passed), || format!("mu{i} at ({p},{q},{n})"));
        }
        if q <= 2 {
            let h = BoundaryField::random(&m, 3, rng);
            let r = compatibility_check(2, &h, &m, CompatOptions::for_params(&m));
            s.check(r.is_ok_and(|r| !r.passed && !r.failures.is_empty()), || format!("random field accepted at ({p},{q},{n})"));
        }
    }
    s.result
}

fn norm_formulas(cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("norm formulas");
    for (p, q, n) in [(3u64, 1u32, 1i64), (5, 1, 2), (3, 2, 2), (3, 1, -2), (5, 5, 3)] {
        let m = ModelParams::new(p, q, n, cfg).expect("valid");
        let f = fixed_points(&m).expect("computable");
        for i in 0..3 {
            if f.root(i).is_none() {
                continue;
            }
            let r = brute_force_cross_check(i, 2, &m, &f, 0, 1);
            s.check(r.is_ok_and(|r| r.passed()), || format!("mu{i} at ({p},{q},{n})"));
        }
    }
    s.result
}

fn orbits(rng: &mut ChaCha8Rng, cfg: PrecisionConfig) -> SuiteResult {
    let mut s = Suite::new("antiferromagnetic sphere invariance");
    let m = ModelParams::new(3, 1, -2, cfg).expect("valid");
    for _ in 0..50 {
        let u: i64 = rng.gen_range(1..=300);
        let d: i64 = rng.gen_range(1..=300);
        if u % 3 == 0 || d % 3 == 0 {
            continue;
        }
        let mut x = Padic::from_ratio(u, d, 3, cfg).expect("nonzero");
        for _ in 0..20 {
            match eval_f(&x, &m) {
                Ok(y) => x = y,
                Err(_) => break,
            }
        }
        s.check(x.valuation() == Ok(0), || format!("{u}/{d} left the unit sphere"));
    }
    s.result
}

/// Runs every suite with the given seed and precision.
pub fn run_self_test(seed: u64, cfg: PrecisionConfig) -> SelfTestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suites = vec![
        field_axioms(&mut rng, cfg),
        sqrt_soundness(&mut rng, cfg),
        fixed_point_sweep(cfg),
        compatibility(&mut rng, cfg),
        norm_formulas(cfg),
        orbits(&mut rng, cfg),
    ];
    SelfTestReport { seed, passed: suites.iter().all(SuiteResult::passed), suites }
}
