//! Norm-lemma checkers shared by the property tests and the acceptance suite.
//! Each checker classifies a sample into a region and verifies the stated norm law there.
#![allow(dead_code)]

use padic_gibbs::dynamics::{eval_f, eval_g};
use padic_gibbs::padic::Padic;
use padic_gibbs::potts::ModelParams;
use rand::Rng;

/// `u/d * p^v` with `u`, `d` prime to `p`.
pub fn sample_with_valuation<R: Rng>(params: &ModelParams, v: i64, rng: &mut R) -> Padic {
    let p = params.p as i64;
    let pick = |rng: &mut R, hi: i64| loop {
        let x: i64 = rng.gen_range(1..=hi);
        if x % p != 0 {
            break x;
        }
    };
    let u = pick(rng, 100_000) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let d = pick(rng, 10_000);
    Padic::from_ratio(u, d, params.p, params.cfg).expect("nonzero").shift(v)
}

fn val(x: &Padic) -> Option<i64> {
    x.valuation().ok()
}

/// Ferromagnetic `g` with `|q|_p < 1`, `|theta|_p <= |q|_p^2`.
/// Regions: "below" (`|x| < 1`), "far" (`|x| > |q/theta|`), "middle" (`1 < |x| <= |q/theta|`), "sphere".
pub fn check_ferro_g(x: &Padic, m: &ModelParams) -> (&'static str, Result<(), String>) {
    let vq = m.q_valuation();
    let n = m.coupling;
    let vx = val(x).expect("nonzero sample");
    let g = eval_g(x, m);
    let vg = g.as_ref().ok().and_then(val);
    let fail = |what: &str| Err(format!("{what}: v(x) = {vx}, v(g) = {vg:?}"));
    if vx > 0 {
        return ("below", if vg == Some(vq) { Ok(()) } else { fail("|g(x)| = |q|") });
    }
    if vx < 0 {
        if -vx > n - vq {
            return ("far", if vg == Some(n) { Ok(()) } else { fail("|g(x)| = |theta|") });
        }
        return ("middle", if vg.is_some_and(|v| v >= vq) { Ok(()) } else { fail("|g(x)| <= |q|") });
    }
    // |g(x)| > 1 forces |x| = 1: nothing can fail on the sphere itself, check the converse region instead.
    ("sphere", Ok(()))
}

/// `|g(x)|_p > 1` only for `|x|_p = 1`.
pub fn check_ferro_g_large(x: &Padic, m: &ModelParams) -> Result<(), String> {
    match eval_g(x, m).ok().as_ref().and_then(val) {
        Some(vg) if vg < 0 && val(x) != Some(0) => Err(format!("|g(x)| > 1 with v(x) = {:?}", val(x))),
        _ => Ok(()),
    }
}

/// Antiferromagnetic `f`. Regions: "outer" (`|x| > |theta|`), "annulus" (`|q/theta| < |x| < |theta|`), "inner".
pub fn check_antiferro_f(x: &Padic, m: &ModelParams) -> (&'static str, Result<(), String>) {
    let nbar = -m.coupling;
    let vq = m.q_valuation();
    let vx = val(x).expect("nonzero sample");
    let vf = eval_f(x, m).ok().as_ref().and_then(val);
    let fail = |what: &str| Err(format!("{what}: v(x) = {vx}, v(f) = {vf:?}"));
    if vx < -nbar {
        ("outer", if vf == Some(-2 * nbar) { Ok(()) } else { fail("|f(x)| = |theta|^2") })
    } else if vx > -nbar && vx < vq + nbar {
        ("annulus", if vf == Some(2 * vx) { Ok(()) } else { fail("|f(x)| = |x|^2") })
    } else if vx >= vq + nbar {
        ("inner", if vf.is_none_or(|v| v >= 2 * (vq + nbar)) { Ok(()) } else { fail("|f(x)| <= |q/theta|^2") })
    } else {
        ("boundary", Ok(()))
    }
}

/// Antiferromagnetic `g`, items (i), (ii), (iv), (v).
pub fn check_antiferro_g(x: &Padic, m: &ModelParams) -> (&'static str, Result<(), String>) {
    let nbar = -m.coupling;
    let vx = val(x).expect("nonzero sample");
    let vg = eval_g(x, m).ok().as_ref().and_then(val);
    let fail = |what: &str| Err(format!("{what}: v(x) = {vx}, v(g) = {vg:?}"));
    if vx >= nbar {
        ("(i)", if vg.is_none_or(|v| v >= nbar) { Ok(()) } else { fail("|g(x)| <= 1/|theta|") })
    } else if vx > 0 {
        ("(ii)", if vg == Some(vx) { Ok(()) } else { fail("|g(x)| = |x|") })
    } else if vx < 0 && vx > -nbar {
        ("(iv)", if vg == Some(vx) { Ok(()) } else { fail("|g(x)| = |x|") })
    } else if vx == -nbar {
        ("(v)", if vg.is_some_and(|v| v <= -nbar) { Ok(()) } else { fail("|g(x)| >= |theta|") })
    } else if vx < -nbar {
        ("(v strict)", if vg == Some(-nbar) { Ok(()) } else { fail("|g(x)| = |theta|") })
    } else {
        ("sphere", Ok(()))
    }
}

/// Antiferromagnetic `g` on pairs, items (iii) and (vi).
pub fn check_antiferro_g_pair(x: &Padic, y: &Padic, m: &ModelParams) -> (&'static str, Result<(), String>) {
    let nbar = -m.coupling;
    let (vx, vy) = (val(x).expect("nonzero"), val(y).expect("nonzero"));
    let dxy = x.sub(y).ok().as_ref().and_then(val);
    let dg = match (eval_g(x, m), eval_g(y, m)) {
        (Ok(a), Ok(b)) => a.sub(&b).ok().as_ref().and_then(val),
        _ => return ("pole", Ok(())),
    };
    let fail = |what: &str| Err(format!("{what}: v(x) = {vx}, v(y) = {vy}, v(x-y) = {dxy:?}, v(g(x)-g(y)) = {dg:?}"));
    if vx > 0 && vy > 0 {
        ("(iii)", if dg == dxy { Ok(()) } else { fail("isometry on B_1(0)") })
    } else if vx <= -2 * nbar && vy <= -2 * nbar {
        let ok = match (dg, dxy) {
            (Some(a), Some(b)) => a >= b + 2 * nbar,
            (None, _) => true,
            (Some(_), None) => false,
        };
        ("(vi)", if ok { Ok(()) } else { fail("contraction by |theta|^2") })
    } else {
        ("other", Ok(()))
    }
}
