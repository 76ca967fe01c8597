//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use padic_gibbs::dynamics::*;
use padic_gibbs::padic::{sqrt_mod_prime, Padic, PrecisionConfig};
use padic_gibbs::phase::*;
use padic_gibbs::potts::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const COMPAT_CASES: [(u64, u32, i64); 4] = [(3, 1, 1), (5, 1, 2), (3, 2, 2), (5, 5, 3)];

fn cfg() -> PrecisionConfig {
    PrecisionConfig::default()
}

fn setup(p: u64, q: u32, n: i64) -> (ModelParams, FixedPointReport) {
    let m = ModelParams::new(p, q, n, cfg()).expect("valid parameters");
    let f = fixed_points(&m).expect("fixed points computable");
    (m, f)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:.2?}, budget {budget:?}"))
}

/// Square units modulo `p^6`, as a bitmap indexed by residue.
fn unit_squares(p: u64) -> Vec<bool> {
    let modulus = p.pow(6);
    let mut table = vec![false; modulus as usize];
    for y in (1..modulus).filter(|y| y % p != 0) {
        table[((y as u128 * y as u128) % modulus as u128) as usize] = true;
    }
    table
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = cfg().cap() as i64;
    let mut roots_checked = 0;
    for p in [2u64, 3, 5, 7, 13] {
        let squares = unit_squares(p);
        for _ in 0..500 {
            let num: i64 = rng.gen_range(1..=1_000_000) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let den: i64 = rng.gen_range(1..=1_000_000);
            let shift: i64 = rng.gen_range(-4..=4);
            let a = Padic::from_ratio(num, den, p, cfg()).map_err(|e| e.to_string())?.shift(shift);
            let v = a.valuation().map_err(|e| e.to_string())?;
            let unit = a.shift(-v).residue(6).map_err(|e| e.to_string())?.to_usize().expect("small");
            let oracle = v % 2 == 0 && squares[unit];
            let claimed = a.has_sqrt().map_err(|e| e.to_string())?;
            ensure(claimed == oracle, || format!("p = {p}, a = {num}/{den} * {p}^{shift}: claimed {claimed}, oracle {oracle}"))?;
            if let Ok(roots) = a.sqrt() {
                for r in [&roots.canonical, &roots.other] {
                    let residual = r.mul(r).and_then(|s| s.sub(&a)).map_err(|e| e.to_string())?;
                    let ok = residual.valuation().map_or(true, |vr| vr - v >= k - 2);
                    ensure(ok, || format!("p = {p}: |r^2 - a| too large for a = {a}"))?;
                    roots_checked += 1;
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "2500 samples agree with squaring mod p^6; {roots_checked} roots with relative residual <= p^-(K-2); {:.2?}",
        start.elapsed()
    ))
}

/// `sqrt_mod_prime(a, p)` is `2` or `p - 2`.
fn root_pair_contains_two(a: u64, p: u64) -> bool {
    sqrt_mod_prime(a, p).is_some_and(|r| r == 2 || p - r == 2)
}

fn criterion_2() -> Outcome {
    let root7 = Padic::from_i64(-3, 7, cfg()).and_then(|a| a.sqrt()).map_err(|e| e.to_string())?;
    let digit7 = root7.canonical.leading_digit().expect("unit");
    ensure(root_pair_contains_two(4, 7) && digit7 == 2, || format!("sqrt(-3) mod 7 gave {digit7}"))?;
    let root5 = Padic::from_i64(-11, 5, cfg()).and_then(|a| a.sqrt()).map_err(|e| e.to_string())?;
    let digit5 = root5.canonical.leading_digit().expect("unit");
    ensure(root_pair_contains_two(4, 5) && digit5 == 2, || format!("sqrt(-11) mod 5 gave {digit5}"))?;
    let (m, f) = setup(3, 1, 1);
    let d = discriminant_exact(&m);
    ensure(d == BigRational::zero(), || format!("D(3,1,1) = {d}"))?;
    ensure(f.degenerate, || "(3,1,1) not flagged degenerate".into())?;
    Ok("sqrt(-3) = 2 mod 7, sqrt(-11) = 2 mod 5, D = 0 exactly at (3,1,1)".into())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut fields = 0;
    let mut rejected = 0;
    for (p, q, n) in COMPAT_CASES {
        let (m, f) = setup(p, q, n);
        let opts = CompatOptions::for_params(&m);
        for i in 0..3 {
            let Some(x) = f.root(i) else { continue };
            let h = BoundaryField::invariant_line(&m, x, 1, &m.int(1)).map_err(|e| e.to_string())?;
            for depth in 2..=3 {
                let r = compatibility_check(depth, &h, &m, opts).map_err(|e| e.to_string())?;
                let tight = r.max_violation_exponent.is_none_or(|v| v >= cfg().cap() as i64 - 8);
                ensure(r.passed && tight, || format!("mu{i} at ({p},{q},{n}), n = {depth}: {:?}", r.max_violation_exponent))?;
                fields += 1;
            }
        }
        for _ in 0..20 {
            let h = BoundaryField::random(&m, 4, &mut rng);
            for depth in 2..=3 {
                let r = compatibility_check(depth, &h, &m, opts).map_err(|e| e.to_string())?;
                ensure(!r.passed && !r.failures.is_empty(), || format!("random field accepted at ({p},{q},{n}), n = {depth}"))?;
                rejected += 1;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{fields} fixed-point fields compatible, {rejected} random fields rejected with witnesses; {:.2?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let mut checks = 0;
    for (p, q, n) in COMPAT_CASES {
        let (m, f) = setup(p, q, n);
        for i in 0..3 {
            let Some(x) = f.root(i) else { continue };
            let h = BoundaryField::invariant_line(&m, x, 1, &m.int(1)).map_err(|e| e.to_string())?;
            for depth in 1..=2 {
                let r = partition_recursion_check(depth, &h, &m).map_err(|e| e.to_string())?;
                ensure(r.holds, || format!("Z_(n+1) != A Z_n for mu{i} at ({p},{q},{n}), n = {depth}"))?;
                checks += 1;
            }
        }
    }
    Ok(format!("Z_(n+1) = A Z_n in {checks} cases"))
}

fn criterion_5() -> Outcome {
    let expect = |p: u64, q: u32, n: i64, table: [(i64, FixedPointClass); 3]| -> Result<(), String> {
        let (m, f) = setup(p, q, n);
        for (i, (v, class)) in table.into_iter().enumerate() {
            let x = f.root(i).ok_or_else(|| format!("x{i} missing at ({p},{q},{n})"))?;
            let c = classify_fixed_point(x, &m).map_err(|e| e.to_string())?;
            ensure(c.multiplier_valuation == v && c.class == class, || {
                format!("x{i} at ({p},{q},{n}): v(f'(x)) = {}, {:?}; expected {v}, {class:?}", c.multiplier_valuation, c.class)
            })?;
        }
        Ok(())
    };
    use FixedPointClass::*;
    expect(5, 5, 3, [(-1, Repelling), (2, Attractive), (-1, Repelling)])?;
    let (m, _) = setup(3, 1, -2);
    let q_over_theta = m.q_valuation() - m.coupling;
    expect(3, 1, -2, [(0, Neutral), (-m.coupling, Attractive), (q_over_theta, Attractive)])?;
    Ok(format!("(5,5,3): 5, 5^-2, 5; (3,1,-2): 1, 3^-2, |q/theta| = 3^-{q_over_theta}"))
}

fn criterion_6() -> Outcome {
    let k = cfg().cap() as i64;
    let mut triples = 0;
    for p in [3u64, 5, 7] {
        for q in 1..=10u32 {
            for n in (-4..=4i64).filter(|n| *n != 0) {
                let (m, f) = setup(p, q, n);
                let (Some(x1), Some(x2)) = (&f.x1, &f.x2) else { continue };
                let t = &m.theta;
                let sum =
                    t.mul(t).and_then(|s| s.sub(&t.mul_i64(2)?)).and_then(|s| s.add_i64(1 - 2 * q as i64)).map_err(|e| e.to_string())?;
                let s = x1.add(x2).map_err(|e| e.to_string())?;
                let prod = x1.mul(x2).map_err(|e| e.to_string())?;
                let sum_ok = s.sub(&sum).is_ok_and(|d| d.is_zero()) || agrees_relative(&s, &sum, k - 4);
                ensure(sum_ok, || format!("x1 + x2 at ({p},{q},{n})"))?;
                ensure(agrees_relative(&prod, &m.int((q * q) as i64), k - 4), || format!("x1 x2 at ({p},{q},{n})"))?;
                triples += 1;
            }
        }
    }
    Ok(format!("Vieta relations hold to K-4 digits for all {triples} triples with roots"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = cfg().cap() as usize;
    let (m, f) = setup(5, 5, 3);
    for _ in 0..100 {
        let v = loop {
            let v: i64 = rng.gen_range(-6..=6);
            if v != 0 {
                break v;
            }
        };
        let x = sample_with_valuation(&m, v, &mut rng);
        let orbit = iterate_orbit(&x, &m, &f, k);
        ensure(matches!(&orbit.verdict, OrbitVerdict::ConvergedTo { label, .. } if label == "x1"), || {
            format!("(5,5,3) start {x}: {:?}", orbit.verdict)
        })?;
    }
    let (m, f) = setup(3, 1, -2);
    for _ in 0..100 {
        let x = sample_with_valuation(&m, rng.gen_range(1..=6), &mut rng);
        let orbit = iterate_orbit(&x, &m, &f, k);
        ensure(matches!(&orbit.verdict, OrbitVerdict::ConvergedTo { label, .. } if label == "x2"), || {
            format!("(3,1,-2) start {x}: {:?}", orbit.verdict)
        })?;
    }
    for _ in 0..200 {
        let mut x = sample_with_valuation(&m, 0, &mut rng);
        for step in 0..50 {
            x = eval_f(&x, &m).map_err(|e| e.to_string())?;
            ensure(x.valuation() == Ok(0), || format!("left S_1(0) at step {step}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("100 ferro starts -> x1, 100 starts in B_1(0) -> x2, 200 sphere orbits stay on S_1(0); {:.2?}", start.elapsed()))
}

/// Draws samples with valuation in `range` until `count` of them land in `region`, checking every one.
fn region_suite(
    name: &str,
    region: &str,
    range: std::ops::RangeInclusive<i64>,
    count: usize,
    m: &ModelParams,
    rng: &mut ChaCha8Rng,
    check: impl Fn(&Padic, &ModelParams) -> (&'static str, Result<(), String>),
) -> Result<(), String> {
    let mut hits = 0;
    let mut draws = 0;
    while hits < count {
        draws += 1;
        ensure(draws < 50 * count, || format!("{name}: region {region} too rarely hit"))?;
        let x = sample_with_valuation(m, rng.gen_range(range.clone()), rng);
        let (got, verdict) = check(&x, m);
        verdict.map_err(|e| format!("{name} {got}: {e}"))?;
        if got == region {
            hits += 1;
        }
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let per = 1000;
    let mut regions = 0;

    for (p, q, n) in [(3u64, 3u32, 2i64), (5, 1, -1), (7, 2, 1), (5, 5, 3)] {
        let m = ModelParams::new(p, q, n, cfg()).map_err(|e| e.to_string())?;
        let mut checked = 0;
        while checked < per {
            let x = sample_with_valuation(&m, rng.gen_range(-4..=4), &mut rng);
            let y = sample_with_valuation(&m, rng.gen_range(-4..=4), &mut rng);
            let (Ok(fx), Ok(fy)) = (eval_f(&x, &m), eval_f(&y, &m)) else { continue };
            let (Ok(actual), Ok(predicted)) = (fx.sub(&fy).map_err(|e| e.to_string())?.valuation(), difference_valuation(&x, &y, &m))
            else {
                continue;
            };
            ensure(actual == predicted, || format!("difference formula at ({p},{q},{n}): {actual} != {predicted}"))?;
            checked += 1;
        }
        regions += 1;
    }

    for (p, q, n) in [(5u64, 5u32, 3i64), (3, 3, 2), (2, 2, 2)] {
        let m = ModelParams::new(p, q, n, cfg()).map_err(|e| e.to_string())?;
        let vq = m.q_valuation();
        let far = -(n - vq) - 1;
        region_suite("ferro g", "below", 1..=8, per, &m, &mut rng, check_ferro_g)?;
        region_suite("ferro g", "far", far - 6..=far, per, &m, &mut rng, check_ferro_g)?;
        if far < -1 {
            region_suite("ferro g", "middle", far + 1..=-1, per, &m, &mut rng, check_ferro_g)?;
            regions += 1;
        }
        let pole = big_a(&m).neg();
        for _ in 0..per {
            let x = pole.add(&sample_with_valuation(&m, rng.gen_range(vq + 1..=vq + 8), &mut rng)).map_err(|e| e.to_string())?;
            let vg = eval_g(&x, &m).map_err(|e| e.to_string())?.valuation().map_err(|e| e.to_string())?;
            ensure(vg < 0 && x.valuation() == Ok(0), || format!("ferro g near -A at ({p},{q},{n})"))?;
        }
        for _ in 0..per {
            let x = sample_with_valuation(&m, rng.gen_range(-8..=8), &mut rng);
            check_ferro_g_large(&x, &m).map_err(|e| format!("ferro g at ({p},{q},{n}): {e}"))?;
        }
        regions += 4;
    }

    for (p, q, n) in [(3u64, 1u32, -2i64), (5, 5, -2), (7, 2, -3)] {
        let m = ModelParams::new(p, q, n, cfg()).map_err(|e| e.to_string())?;
        let nbar = -n;
        let vq = m.q_valuation();
        region_suite("antiferro f", "outer", -nbar - 6..=-nbar - 1, per, &m, &mut rng, check_antiferro_f)?;
        region_suite("antiferro f", "annulus", -nbar + 1..=vq + nbar - 1, per, &m, &mut rng, check_antiferro_f)?;
        region_suite("antiferro f", "inner", vq + nbar..=vq + nbar + 6, per, &m, &mut rng, check_antiferro_f)?;
        regions += 3;

        region_suite("antiferro g", "(i)", nbar..=nbar + 6, per, &m, &mut rng, check_antiferro_g)?;
        if nbar > 1 {
            region_suite("antiferro g", "(ii)", 1..=nbar - 1, per, &m, &mut rng, check_antiferro_g)?;
            region_suite("antiferro g", "(iv)", -nbar + 1..=-1, per, &m, &mut rng, check_antiferro_g)?;
            regions += 2;
        }
        region_suite("antiferro g", "(v)", -nbar..=-nbar, per, &m, &mut rng, check_antiferro_g)?;
        region_suite("antiferro g", "(v strict)", -nbar - 6..=-nbar - 1, per, &m, &mut rng, check_antiferro_g)?;
        regions += 3;
        for (label, lo, hi) in [("(iii)", 1, 8), ("(vi)", -2 * nbar - 6, -2 * nbar)] {
            for _ in 0..per {
                let x = sample_with_valuation(&m, rng.gen_range(lo..=hi), &mut rng);
                let y = sample_with_valuation(&m, rng.gen_range(lo..=hi), &mut rng);
                let (got, verdict) = check_antiferro_g_pair(&x, &y, &m);
                ensure(got == label || got == "pole", || format!("antiferro g pair landed in {got}"))?;
                verdict.map_err(|e| format!("antiferro g {label} at ({p},{q},{n}): {e}"))?;
            }
            regions += 1;
        }
    }
    Ok(format!("{regions} regions x {per} points, exact exponents"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for (p, q, n) in [(3u64, 1u32, 1i64), (5, 1, 2), (3, 2, 2), (3, 1, -2), (3, 2, -2)] {
        let (m, f) = setup(p, q, n);
        for i in 0..3 {
            if f.root(i).is_none() {
                continue;
            }
            for depth in 1..=3 {
                let r = brute_force_cross_check(i, depth, &m, &f, 0, 1).map_err(|e| e.to_string())?;
                ensure(r.passed(), || format!("mu{i} at ({p},{q},{n}), n = {depth}: {:?}", r.mismatches.first()))?;
                checked += r.checked;
            }
        }
    }
    Ok(format!("{checked} configurations agree with the closed form; {:.2?}", start.elapsed()))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let verdict = |p, q, n| -> Result<PhaseReport, String> {
        let (m, f) = setup(p, q, n);
        phase_diagnosis(&m, &f, DEFAULT_PHASE_DEPTH).map_err(|e| e.to_string())
    };

    let (m, f) = setup(5, 5, 3);
    let strong = verdict(5, 5, 3)?;
    if strong.verdict != Verdict::StrongTransition {
        problems.push(format!("(5,5,3) -> {:?}", strong.verdict));
    }
    let witness = Family { boundary_is_line: true, all_equal: false };
    let vq = m.q_valuation();
    for n in 2..=4u32 {
        let sigma = witness.configuration(n, 5, 1);
        let e2 = measure_norm_exponent(2, &sigma, &m, &f, 0, 1).map_err(|e| e.to_string())?;
        let e1 = measure_norm_exponent(1, &sigma, &m, &f, 0, 1).map_err(|e| e.to_string())?;
        if e2 != 2 * ((1 << n) - 2) {
            problems.push(format!("e(mu2) = {e2} at n = {n}"));
        }
        if e1 + e2 != -4 * vq {
            problems.push(format!("n = {n}: e(mu1) + e(mu2) = {} (|mu1 mu2| = |q|^{}), expected |q|^4", e1 + e2, -(e1 + e2) / vq));
        }
    }

    for ((p, q, n), expected) in [
        ((7, 1, 1), Verdict::QuasiTransition),
        ((3, 1, -2), Verdict::QuasiTransition),
        ((3, 1, -1), Verdict::NoTransition),
        ((2, 1, 1), Verdict::NoTransition),
    ] {
        let r = verdict(p, q, n)?;
        if r.verdict != expected {
            problems.push(format!("({p},{q},{n}) -> {:?}, expected {expected:?}", r.verdict));
        }
    }

    let (m, _) = setup(3, 1, -2);
    let anti = verdict(3, 1, -2)?;
    let claimed = antiferro_claimed_bounds(&m, 0).expect("antiferro");
    for (i, bound) in claimed.iter().enumerate() {
        let s = anti.measure(i);
        if s.bounded != Boundedness::Bounded || s.bound_exponent.is_none_or(|b| b > *bound) {
            problems.push(format!("(3,1,-2) mu{i}: {:?}, exponent {:?} vs claimed {bound}", s.bounded, s.bound_exponent));
        }
    }
    if start.elapsed() >= Duration::from_secs(10) {
        problems.push(format!("took {:.2?}", start.elapsed()));
    }
    if problems.is_empty() {
        Ok("verdicts, witness exponents and bounds as stated".into())
    } else {
        Err(problems.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("square-root existence vs squaring oracle", criterion_1),
        ("residue facts and vanishing discriminant", criterion_2),
        ("compatibility of fixed-point fields", criterion_3),
        ("partition-function recursion", criterion_4),
        ("fixed-point classification", criterion_5),
        ("Vieta invariants", criterion_6),
        ("basins and sphere invariance", criterion_7),
        ("norm-lemma regions", criterion_8),
        ("norm formulas vs exhaustive measures", criterion_9),
        ("phase verdicts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
