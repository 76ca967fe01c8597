use crate::error::{Error, Result};
use crate::padic::Padic;
use crate::potts::ModelParams;

/// `A = theta + q - 1`.
pub fn big_a(params: &ModelParams) -> Padic {
    params.theta.add(&params.int(params.q as i64 - 1)).expect("same prime")
}

fn q_of(params: &ModelParams) -> Padic {
    params.int(params.q as i64)
}

fn pole_f() -> Error {
    Error::PoleEncountered { pole: "1-theta-q".into() }
}

/// `x + A`, failing when it vanishes at precision.
pub fn pole_distance(x: &Padic, params: &ModelParams) -> Result<Padic> {
    let den = x.add(&big_a(params))?;
    if den.is_zero() {
        return Err(pole_f());
    }
    Ok(den)
}

/// `g(x) = (theta x + q) / (x + A)`.
pub fn eval_g(x: &Padic, params: &ModelParams) -> Result<Padic> {
    let den = pole_distance(x, params)?;
    let num = params.theta.mul(x)?.add(&q_of(params))?;
    Ok(num.div(&den)?)
}

/// `f(x) = g(x)^2`.
pub fn eval_f(x: &Padic, params: &ModelParams) -> Result<Padic> {
    let g = eval_g(x, params)?;
    Ok(g.mul(&g)?)
}

/// `f'(x) = g(x)^2 * 2 (theta - 1)(theta + q) / ((theta x + q)(x + A))`.
pub fn eval_f_prime(x: &Padic, params: &ModelParams) -> Result<Padic> {
    let den_a = pole_distance(x, params)?;
    let num = params.theta.mul(x)?.add(&q_of(params))?;
    let g = num.div(&den_a)?;
    let theta_minus_one = params.theta.sub(&params.int(1))?;
    let theta_plus_q = params.theta.add(&q_of(params))?;
    let factor = theta_minus_one.mul(&theta_plus_q)?.mul_i64(2)?;
    let den = num.mul(&den_a)?;
    if den.is_zero() {
        return Err(Error::PoleEncountered { pole: "-q/theta".into() });
    }
    Ok(g.mul(&g)?.mul(&factor)?.div(&den)?)
}

/// `g^{-1}(x) = (A x - q) / (theta - x)`.
pub fn eval_g_inverse(x: &Padic, params: &ModelParams) -> Result<Padic> {
    let den = params.theta.sub(x)?;
    if den.is_zero() {
        return Err(Error::PoleEncountered { pole: "theta".into() });
    }
    let num = big_a(params).mul(x)?.sub(&q_of(params))?;
    Ok(num.div(&den)?)
}

/// `eta(x, y) = A theta (x + y) + 2 theta x y + 2 q A + q (x + y)`.
pub fn eval_eta(x: &Padic, y: &Padic, params: &ModelParams) -> Result<Padic> {
    let a = big_a(params);
    let q = q_of(params);
    let s = x.add(y)?;
    let t1 = a.mul(&params.theta)?.mul(&s)?;
    let t2 = params.theta.mul(x)?.mul(y)?.mul_i64(2)?;
    let t3 = q.mul(&a)?.mul_i64(2)?;
    let t4 = q.mul(&s)?;
    Ok(t1.add(&t2)?.add(&t3)?.add(&t4)?)
}

/// Valuation of `f(x) - f(y)` predicted by the product formula
/// `|theta-1| |theta+q| |x-y| |eta| / (|x+A|^2 |y+A|^2)`.
pub fn difference_valuation(x: &Padic, y: &Padic, params: &ModelParams) -> Result<i64> {
    let v = |z: Padic| -> Result<i64> { Ok(z.valuation()?) };
    let q = q_of(params);
    let num = v(params.theta.sub(&params.int(1))?)? + v(params.theta.add(&q)?)? + v(x.sub(y)?)? + v(eval_eta(x, y, params)?)?;
    let den = 2 * v(pole_distance(x, params)?)? + 2 * v(pole_distance(y, params)?)?;
    Ok(num - den)
}
