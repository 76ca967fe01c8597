use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::maps::{big_a, eval_f, eval_f_prime};
use crate::error::{Error, Result};
use crate::padic::{legendre, Padic, PadicError, SquareRootTest};
use crate::potts::{agrees_relative, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixedPointClass {
    Attractive,
    Neutral,
    Repelling,
}

impl FixedPointClass {
    /// From the valuation of the multiplier `f'(x*)`.
    pub fn from_multiplier_valuation(v: i64) -> Self {
        match v.cmp(&0) {
            std::cmp::Ordering::Greater => FixedPointClass::Attractive,
            std::cmp::Ordering::Equal => FixedPointClass::Neutral,
            std::cmp::Ordering::Less => FixedPointClass::Repelling,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: FixedPointClass,
    /// `|f'(x*)|_p = p^-multiplier_valuation`.
    pub multiplier_valuation: i64,
}

/// Classifies `x*` after checking `f(x*) = x*` to half the working precision.
pub fn classify_fixed_point(x: &Padic, params: &ModelParams) -> Result<Classification> {
    let fx = eval_f(x, params)?;
    let half = (params.cfg.cap() as i64 + 1) / 2;
    if !agrees_relative(&fx, x, half) {
        return Err(Error::NotAFixedPoint);
    }
    let d = eval_f_prime(x, params)?;
    let v = d.valuation()?;
    Ok(Classification { class: FixedPointClass::from_multiplier_valuation(v), multiplier_valuation: v })
}

/// One fixed point with the valuations of the quantities the norm lemmas talk about.
/// Every `*_valuation` field `v` means `|.|_p = p^-v`; `None` marks a value lost at precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPoint {
    pub label: String,
    pub value: Padic,
    pub valuation: Option<i64>,
    pub theta_x_plus_q_valuation: Option<i64>,
    pub x_plus_a_valuation: Option<i64>,
    pub x_plus_q_valuation: Option<i64>,
    pub multiplier_valuation: Option<i64>,
    pub class: Option<FixedPointClass>,
}

impl FixedPoint {
    fn build(label: &str, value: Padic, params: &ModelParams) -> Result<Self> {
        let q = params.int(params.q as i64);
        let v = |z: Padic| z.valuation().ok();
        let classification = classify_fixed_point(&value, params).ok();
        Ok(Self {
            label: label.to_string(),
            valuation: v(value.clone()),
            theta_x_plus_q_valuation: v(params.theta.mul(&value)?.add(&q)?),
            x_plus_a_valuation: v(value.add(&big_a(params))?),
            x_plus_q_valuation: v(value.add(&q)?),
            multiplier_valuation: classification.map(|c| c.multiplier_valuation),
            class: classification.map(|c| c.class),
            value,
        })
    }
}

/// Existence as asserted by the digit criteria for `(p, q, N)`, when they assert anything.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremPrediction {
    pub rule: String,
    pub roots_exist: bool,
}

pub fn theorem_prediction(p: u64, q: u32, coupling: i64) -> Option<TheoremPrediction> {
    let pred = |rule: &str, roots_exist: bool| Some(TheoremPrediction { rule: rule.to_string(), roots_exist });
    let q = q as u64;
    if coupling < 0 {
        return if (-coupling) % 2 == 0 { pred("antiferromagnetic, -N even", true) } else { None };
    }
    if q == 1 {
        return match p {
            2 => pred("Ising, p = 2", false),
            3 => pred("Ising, p = 3", coupling == 1),
            _ => pred("Ising, p >= 5: -3 a residue", legendre(p - 3, p) == 1),
        };
    }
    if q.is_multiple_of(p) {
        return pred("Potts, |q|_p < 1", true);
    }
    match p {
        2 => pred("Potts, p = 2, q odd", false),
        3 if q % 3 == 2 => pred("Potts, p = 3, |q-2|_p < 1", false),
        3 => None,
        _ if (4 * q - 1).is_multiple_of(p) => pred("Potts, p >= 5, |4q-1|_p < 1", false),
        _ => None,
    }
}

/// Fixed points of `f` with existence diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointReport {
    pub p: u64,
    pub q: u32,
    #[serde(rename = "N")]
    pub coupling: i64,
    pub discriminant: Padic,
    pub discriminant_exact: String,
    /// `None` when the discriminant vanishes exactly.
    pub sqrt_test: Option<SquareRootTest>,
    pub exists: bool,
    pub reason: String,
    /// Exactly vanishing discriminant: `x1 = x2`.
    pub degenerate: bool,
    pub x0: Padic,
    pub x1: Option<Padic>,
    pub x2: Option<Padic>,
    pub points: Vec<FixedPoint>,
    pub theorem: Option<TheoremPrediction>,
    pub agrees_with_theorem: Option<bool>,
}

impl FixedPointReport {
    pub fn point(&self, label: &str) -> Option<&FixedPoint> {
        self.points.iter().find(|p| p.label == label)
    }

    /// `x_i` for `i` in `0..=2`.
    pub fn root(&self, i: usize) -> Option<&Padic> {
        match i {
            0 => Some(&self.x0),
            1 => self.x1.as_ref(),
            2 => self.x2.as_ref(),
            _ => None,
        }
    }

    /// Number of pairwise distinct fixed points.
    pub fn distinct_count(&self) -> usize {
        let mut seen: Vec<&Padic> = Vec::new();
        for x in [Some(&self.x0), self.x1.as_ref(), self.x2.as_ref()].into_iter().flatten() {
            if !seen.iter().any(|y| x.sub(y).map(|d| d.is_zero()).unwrap_or(false)) {
                seen.push(x);
            }
        }
        seen.len()
    }
}

/// `D = theta^2 - 2 theta - 4 q + 1` exactly.
pub fn discriminant_exact(params: &ModelParams) -> BigRational {
    let t = &params.theta_exact;
    let q = BigRational::from_integer(BigInt::from(params.q));
    t * t - t * BigRational::from_integer(2.into()) - q * BigRational::from_integer(4.into()) + BigRational::one()
}

/// `b = 2 theta - theta^2 + 2 q - 1`, so that `x^2 + b x + q^2 = 0`.
fn linear_coefficient(params: &ModelParams) -> BigRational {
    let t = &params.theta_exact;
    let q = BigRational::from_integer(BigInt::from(params.q));
    t * BigRational::from_integer(2.into()) - t * t + q * BigRational::from_integer(2.into()) - BigRational::one()
}

/// Both roots at working precision `K + extra`, cut back to `K` digits.
fn roots_with_guard(params: &ModelParams, extra: u32) -> Result<(Padic, Padic)> {
    let wide = params.cfg.widened(extra);
    let p = params.p;
    let d = Padic::from_big_rational(&discriminant_exact(params), p, wide)?;
    let roots = d.sqrt()?;
    let minus_b = Padic::from_big_rational(&-linear_coefficient(params), p, wide)?;
    let theta_minus_one = Padic::from_big_rational(&(&params.theta_exact - BigRational::one()), p, wide)?;
    let two = Padic::from_i64(2, p, wide)?;
    let s = theta_minus_one.mul(&roots.canonical)?;
    let plus = minus_b.add(&s)?.div(&two)?;
    let minus = minus_b.sub(&s)?.div(&two)?;
    let k = params.cfg.cap();
    Ok((plus.truncated(k), minus.truncated(k)))
}

fn roots(params: &ModelParams) -> Result<(Padic, Padic)> {
    let k = params.cfg.cap();
    let mut extra = 16u32;
    for _ in 0..6 {
        let (a, b) = roots_with_guard(params, extra)?;
        let short = [&a, &b].iter().map(|r| k.saturating_sub(r.rel_precision().unwrap_or(0))).max().unwrap_or(0);
        if short == 0 {
            return Ok((a, b));
        }
        extra += short + 8;
    }
    Err(Error::Padic(PadicError::PrecisionExhausted))
}

pub fn fixed_points(params: &ModelParams) -> Result<FixedPointReport> {
    let p = params.p;
    let d_exact = discriminant_exact(params);
    let discriminant = params.rational(&d_exact);
    let theorem = theorem_prediction(p, params.q, params.coupling);
    let x0 = params.int(1);

    let (sqrt_test, exists, reason, degenerate, pair) = if d_exact.is_zero() {
        let x = params.rational(&(-linear_coefficient(params) / BigRational::from_integer(2.into())));
        (None, true, "discriminant vanishes exactly: double root".to_string(), true, Some((x.clone(), x)))
    } else {
        let test = params.rational(&d_exact).square_root_test()?;
        let exists = test.exists;
        let reason = match &test.failure {
            None => "square root of the discriminant exists".to_string(),
            Some(f) => f.to_string(),
        };
        let pair = if exists { Some(roots(params)?) } else { None };
        (Some(test), exists, reason, false, pair)
    };

    let (x1, x2) = match pair {
        None => (None, None),
        Some((plus, minus)) => {
            let (a, b) = label_roots(params, plus, minus);
            (Some(a), Some(b))
        }
    };

    let mut points = vec![FixedPoint::build("x0", x0.clone(), params)?];
    if let Some(x) = &x1 {
        points.push(FixedPoint::build("x1", x.clone(), params)?);
    }
    if let Some(x) = &x2 {
        points.push(FixedPoint::build("x2", x.clone(), params)?);
    }
    let agrees_with_theorem = theorem.as_ref().map(|t| t.roots_exist == exists);
    Ok(FixedPointReport {
        p,
        q: params.q,
        coupling: params.coupling,
        discriminant,
        discriminant_exact: d_exact.to_string(),
        sqrt_test,
        exists,
        reason,
        degenerate,
        x0,
        x1,
        x2,
        points,
        theorem,
        agrees_with_theorem,
    })
}

/// Orders `(plus, minus)` as `(x1, x2)`: by norm where the regime pins it, else by sqrt branch.
fn label_roots(params: &ModelParams, plus: Padic, minus: Padic) -> (Padic, Padic) {
    let target = if params.coupling < 0 {
        Some(2 * params.coupling)
    } else {
        let vq = params.q_valuation();
        (vq > 0).then_some(2 * vq)
    };
    if let Some(t) = target {
        let vp = plus.valuation().ok();
        let vm = minus.valuation().ok();
        if vm == Some(t) && vp != Some(t) {
            return (minus, plus);
        }
    }
    (plus, minus)
}
