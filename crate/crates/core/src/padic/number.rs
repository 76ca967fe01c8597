use std::cell::RefCell;
use std::cmp::{max, min, Ordering};
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{is_prime, PadicError};

pub const DEFAULT_PRECISION: u32 = 64;
pub const MIN_PRECISION: u32 = 8;

/// Cap `K` on the relative precision (in base-p digits) of freshly built values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionConfig {
    cap: u32,
}

impl PrecisionConfig {
    pub fn new(cap: u32) -> Result<Self, PadicError> {
        if cap < MIN_PRECISION {
            return Err(PadicError::InvalidPrecision(cap));
        }
        Ok(Self { cap })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Same configuration with `extra` guard digits.
    pub fn widened(&self, extra: u32) -> Self {
        Self { cap: self.cap + extra }
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self { cap: DEFAULT_PRECISION }
    }
}

thread_local! {
    static POWERS: RefCell<HashMap<u64, Vec<BigUint>>> = RefCell::new(HashMap::new());
}

/// Runs `f` with `p^e` borrowed from a per-thread cache.
pub(crate) fn with_power<R>(p: u64, e: u32, f: impl FnOnce(&BigUint) -> R) -> R {
    POWERS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let table = cache.entry(p).or_insert_with(|| vec![BigUint::one()]);
        while table.len() <= e as usize {
            let next = table.last().expect("seeded") * p;
            table.push(next);
        }
        f(&table[e as usize])
    })
}

pub(crate) fn power(p: u64, e: u32) -> BigUint {
    with_power(p, e, |m| m.clone())
}

/// Splits `x` into `(v_p(x), x / p^v)`. `x` must be nonzero.
pub(crate) fn split_valuation(x: &BigUint, p: u64) -> (u32, BigUint) {
    debug_assert!(!x.is_zero());
    let p_big = BigUint::from(p);
    let mut v = 0;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Kind {
    Unit {
        valuation: i64,
        unit: BigUint,
        precision: u32,
    },
    /// `bound == None` is the exact zero.
    Zero {
        bound: Option<i64>,
    },
}

/// An element of `Q_p` at capped relative precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Padic {
    pub(crate) prime: u64,
    pub(crate) kind: Kind,
}

/// How close two values are, as an absolute valuation of their difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closeness {
    /// Representations are identical exact values.
    Exact,
    /// Difference vanishes to the known precision: `|x - y|_p <= p^-m`.
    AtLeast(i64),
    /// `|x - y|_p = p^-v` exactly.
    Exactly(i64),
}

impl Closeness {
    /// True when the difference is known to satisfy `|x - y|_p <= p^-m`.
    pub fn within(self, m: i64) -> bool {
        match self {
            Closeness::Exact => true,
            Closeness::AtLeast(b) => b >= m,
            Closeness::Exactly(v) => v >= m,
        }
    }

    /// Lower bound on the valuation of the difference.
    pub fn valuation_floor(self) -> Option<i64> {
        match self {
            Closeness::Exact => None,
            Closeness::AtLeast(b) | Closeness::Exactly(b) => Some(b),
        }
    }
}

impl Padic {
    fn check_prime(p: u64) -> Result<(), PadicError> {
        if is_prime(p) {
            Ok(())
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn zero(prime: u64) -> Self {
        Self { prime, kind: Kind::Zero { bound: None } }
    }

    /// A value only known to be `0 mod p^bound`.
    pub fn zero_mod(prime: u64, bound: i64) -> Self {
        Self { prime, kind: Kind::Zero { bound: Some(bound) } }
    }

    pub fn one(prime: u64, cfg: PrecisionConfig) -> Self {
        Self::from_unit(prime, 0, BigUint::one(), cfg.cap())
    }

    fn from_unit(prime: u64, valuation: i64, unit: BigUint, precision: u32) -> Self {
        Self { prime, kind: Kind::Unit { valuation, unit, precision } }
    }

    /// `p^valuation * unit` with `unit` known mod `p^precision`.
    pub fn from_parts(prime: u64, valuation: i64, unit: BigUint, precision: u32) -> Result<Self, PadicError> {
        Self::check_prime(prime)?;
        if precision == 0 {
            return Err(PadicError::PrecisionExhausted);
        }
        if (&unit % prime).is_zero() {
            return Err(PadicError::NotAUnit);
        }
        let unit = with_power(prime, precision, |m| unit % m);
        Ok(Self::from_unit(prime, valuation, unit, precision))
    }

    /// Builds `p^valuation * sum(digits[i] p^i)` from little-endian base-p digits.
    /// Leading zero digits shift the valuation; an all-zero digit list is the exact zero.
    pub fn from_digits(prime: u64, valuation: i64, digits: &[u64], cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::check_prime(prime)?;
        let mut value = BigUint::zero();
        for &d in digits.iter().rev() {
            if d >= prime {
                return Err(PadicError::NotAUnit);
            }
            value = value * prime + d;
        }
        if value.is_zero() {
            return Ok(Self::zero(prime));
        }
        let (shift, unit) = split_valuation(&value, prime);
        Self::from_parts(prime, valuation + shift as i64, unit, cfg.cap())
    }

    pub fn from_bigint(n: &BigInt, prime: u64, cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::from_rational(n, &BigInt::one(), prime, cfg)
    }

    pub fn from_i64(n: i64, prime: u64, cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::from_bigint(&BigInt::from(n), prime, cfg)
    }

    pub fn from_ratio(num: i64, den: i64, prime: u64, cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::from_rational(&BigInt::from(num), &BigInt::from(den), prime, cfg)
    }

    pub fn from_big_rational(r: &BigRational, prime: u64, cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::from_rational(r.numer(), r.denom(), prime, cfg)
    }

    /// Canonical image of `num/den` at relative precision `K`.
    pub fn from_rational(num: &BigInt, den: &BigInt, prime: u64, cfg: PrecisionConfig) -> Result<Self, PadicError> {
        Self::check_prime(prime)?;
        if den.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero(prime));
        }
        let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
        let (vn, un) = split_valuation(num.magnitude(), prime);
        let (vd, ud) = split_valuation(den.magnitude(), prime);
        let r = cfg.cap();
        let unit = with_power(prime, r, |m| {
            let inv = (&ud % m).modinv(m).expect("unit is invertible");
            let u = (un % m) * inv % m;
            if negative {
                m - u
            } else {
                u
            }
        });
        Ok(Self::from_unit(prime, vn as i64 - vd as i64, unit, r))
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// True for both the exact zero and a zero at precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero { bound: None })
    }

    /// The absolute bound `m` of a zero at precision.
    pub fn zero_bound(&self) -> Option<i64> {
        match self.kind {
            Kind::Zero { bound } => bound,
            Kind::Unit { .. } => None,
        }
    }

    /// The valuation `e`, meaning `|x|_p = p^-e`.
    pub fn valuation(&self) -> Result<i64, PadicError> {
        match self.kind {
            Kind::Unit { valuation, .. } => Ok(valuation),
            Kind::Zero { bound } => Err(PadicError::ZeroAtPrecision { bound }),
        }
    }

    /// Alias of [`Padic::valuation`]: the norm exponent with `|x|_p = p^-e`.
    pub fn norm_valuation(&self) -> Result<i64, PadicError> {
        self.valuation()
    }

    /// Relative precision of a nonzero value.
    pub fn rel_precision(&self) -> Option<u32> {
        match self.kind {
            Kind::Unit { precision, .. } => Some(precision),
            Kind::Zero { .. } => None,
        }
    }

    /// `v + r` for nonzero values, the bound for zeros, `None` for the exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { valuation, precision, .. } => Some(valuation + precision as i64),
            Kind::Zero { bound } => bound,
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.kind {
            Kind::Unit { unit, .. } => Some(unit),
            Kind::Zero { .. } => None,
        }
    }

    /// Little-endian base-p digits of the unit part (exactly `rel_precision` of them).
    pub fn unit_digits(&self) -> Vec<u64> {
        match &self.kind {
            Kind::Unit { unit, precision, .. } => {
                let mut digits = Vec::with_capacity(*precision as usize);
                let mut rest = unit.clone();
                let p = BigUint::from(self.prime);
                for _ in 0..*precision {
                    let (q, r) = rest.div_rem(&p);
                    digits.push(r.to_u64().expect("digit < p"));
                    rest = q;
                }
                digits
            }
            Kind::Zero { .. } => Vec::new(),
        }
    }

    /// Lowest unit digit `a_0`.
    pub fn leading_digit(&self) -> Option<u64> {
        self.unit().map(|u| (u % self.prime).to_u64().expect("digit < p"))
    }

    /// `x mod p^m` as an integer, for integral `x` known to at least `m` digits.
    pub fn residue(&self, m: u32) -> Result<BigUint, PadicError> {
        match &self.kind {
            Kind::Zero { bound: None } => Ok(BigUint::zero()),
            Kind::Zero { bound: Some(b) } => {
                if *b >= m as i64 {
                    Ok(BigUint::zero())
                } else {
                    Err(PadicError::PrecisionExhausted)
                }
            }
            Kind::Unit { valuation, unit, precision } => {
                if *valuation < 0 {
                    return Err(PadicError::PrecisionExhausted);
                }
                if *valuation >= m as i64 {
                    return Ok(BigUint::zero());
                }
                if valuation + (*precision as i64) < m as i64 {
                    return Err(PadicError::PrecisionExhausted);
                }
                let shifted = unit * power(self.prime, *valuation as u32);
                Ok(with_power(self.prime, m, |md| shifted % md))
            }
        }
    }

    /// Drops relative precision to at most `r` digits.
    pub fn truncated(&self, r: u32) -> Self {
        match &self.kind {
            Kind::Unit { valuation, unit, precision } if *precision > r && r > 0 => {
                let unit = with_power(self.prime, r, |m| unit % m);
                Self::from_unit(self.prime, *valuation, unit, r)
            }
            _ => self.clone(),
        }
    }

    /// Forgets everything below `p^m` (absolute truncation).
    fn truncate_abs(&self, m: i64) -> Self {
        match &self.kind {
            Kind::Zero { bound: None } => Self::zero_mod(self.prime, m),
            Kind::Zero { bound: Some(b) } => Self::zero_mod(self.prime, min(*b, m)),
            Kind::Unit { valuation, unit, precision } => {
                if *valuation >= m {
                    return Self::zero_mod(self.prime, m);
                }
                let width = min(*precision as i64, m - valuation) as u32;
                if width == *precision {
                    return self.clone();
                }
                let unit = with_power(self.prime, width, |md| unit % md);
                Self::from_unit(self.prime, *valuation, unit, width)
            }
        }
    }

    fn same_field(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch { left: self.prime, right: other.prime })
        }
    }

    /// `p^base * s` where `s` is known mod `p^width`.
    fn normalize(prime: u64, base: i64, s: BigUint, width: u32) -> Self {
        if s.is_zero() {
            return Self::zero_mod(prime, base + width as i64);
        }
        let (t, unit) = split_valuation(&s, prime);
        Self::from_unit(prime, base + t as i64, unit, width - t)
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_field(other)?;
        let p = self.prime;
        Ok(match (&self.kind, &other.kind) {
            (Kind::Zero { bound: None }, _) => other.clone(),
            (_, Kind::Zero { bound: None }) => self.clone(),
            (Kind::Zero { bound: Some(m) }, _) => other.truncate_abs(*m),
            (_, Kind::Zero { bound: Some(m) }) => self.truncate_abs(*m),
            (Kind::Unit { valuation: v1, unit: u1, precision: r1 }, Kind::Unit { valuation: v2, unit: u2, precision: r2 }) => {
                let abs = min(v1 + *r1 as i64, v2 + *r2 as i64);
                let base = min(*v1, *v2);
                let width = (abs - base) as u32;
                let lift = |u: &BigUint, v: i64| -> BigUint {
                    let shift = (v - base) as u32;
                    if shift >= width {
                        BigUint::zero()
                    } else if shift == 0 {
                        u.clone()
                    } else {
                        with_power(p, shift, |s| u * s)
                    }
                };
                let sum = lift(u1, *v1) + lift(u2, *v2);
                let s = with_power(p, width, |m| sum % m);
                Self::normalize(p, base, s, width)
            }
        })
    }

    pub fn neg(&self) -> Self {
        match &self.kind {
            Kind::Zero { .. } => self.clone(),
            Kind::Unit { valuation, unit, precision } => {
                let unit = with_power(self.prime, *precision, |m| m - unit);
                Self::from_unit(self.prime, *valuation, unit, *precision)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_field(other)?;
        let p = self.prime;
        Ok(match (&self.kind, &other.kind) {
            (Kind::Zero { bound: None }, _) | (_, Kind::Zero { bound: None }) => Self::zero(p),
            (Kind::Zero { bound: Some(a) }, Kind::Zero { bound: Some(b) }) => Self::zero_mod(p, a + b),
            (Kind::Zero { bound: Some(m) }, Kind::Unit { valuation, .. })
            | (Kind::Unit { valuation, .. }, Kind::Zero { bound: Some(m) }) => Self::zero_mod(p, m + valuation),
            (Kind::Unit { valuation: v1, unit: u1, precision: r1 }, Kind::Unit { valuation: v2, unit: u2, precision: r2 }) => {
                let r = min(*r1, *r2);
                let unit = with_power(p, r, |m| (u1 * u2) % m);
                Self::from_unit(p, v1 + v2, unit, r)
            }
        })
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.kind {
            Kind::Zero { .. } => Err(PadicError::DivisionByZero),
            Kind::Unit { valuation, unit, precision } => {
                let unit = with_power(self.prime, *precision, |m| unit.modinv(m).expect("unit is invertible"));
                Ok(Self::from_unit(self.prime, -valuation, unit, *precision))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.same_field(other)?;
        if other.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, PadicError> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let p = self.prime;
        match &self.kind {
            Kind::Zero { .. } if e == 0 => Ok(Self::from_unit(p, 0, BigUint::one(), DEFAULT_PRECISION)),
            Kind::Zero { bound: None } => Ok(Self::zero(p)),
            Kind::Zero { bound: Some(m) } => Ok(Self::zero_mod(p, m * e)),
            Kind::Unit { valuation, unit, precision } => {
                let unit = with_power(p, *precision, |m| unit.modpow(&BigUint::from(e as u64), m));
                Ok(Self::from_unit(p, valuation * e, unit, *precision))
            }
        }
    }

    /// Multiplies by the exact power `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        match &self.kind {
            Kind::Zero { bound: None } => self.clone(),
            Kind::Zero { bound: Some(b) } => Self::zero_mod(self.prime, b + k),
            Kind::Unit { valuation, unit, precision } => Self::from_unit(self.prime, valuation + k, unit.clone(), *precision),
        }
    }

    pub fn add_i64(&self, n: i64) -> Result<Self, PadicError> {
        let cfg = self.local_config();
        self.add(&Self::from_i64(n, self.prime, cfg)?)
    }

    pub fn mul_i64(&self, n: i64) -> Result<Self, PadicError> {
        let cfg = self.local_config();
        self.mul(&Self::from_i64(n, self.prime, cfg)?)
    }

    /// A precision config wide enough not to truncate `self` when mixed with integers.
    fn local_config(&self) -> PrecisionConfig {
        let cap = match self.kind {
            Kind::Unit { valuation, precision, .. } => max(precision as i64, valuation + precision as i64),
            Kind::Zero { bound: Some(b) } => b,
            Kind::Zero { bound: None } => DEFAULT_PRECISION as i64,
        };
        PrecisionConfig { cap: max(cap, DEFAULT_PRECISION as i64).clamp(1, u32::MAX as i64) as u32 }
    }

    /// Compares two values through the valuation of their difference.
    pub fn closeness(&self, other: &Self) -> Result<Closeness, PadicError> {
        if self.is_exact_zero() && other.is_exact_zero() {
            return Ok(Closeness::Exact);
        }
        let diff = self.sub(other)?;
        Ok(match diff.kind {
            Kind::Unit { valuation, .. } => Closeness::Exactly(valuation),
            Kind::Zero { bound: Some(b) } => Closeness::AtLeast(b),
            Kind::Zero { bound: None } => Closeness::Exact,
        })
    }

    /// True when `|self - other|_p <= p^-m` is certain at the known precision.
    pub fn agrees_to(&self, other: &Self, m: i64) -> bool {
        self.closeness(other).map(|c| c.within(m)).unwrap_or(false)
    }

    /// Compares norms: `Less` means `|self|_p < |other|_p`. Zeros compare as smallest.
    pub fn cmp_norm(&self, other: &Self) -> Ordering {
        match (self.valuation(), other.valuation()) {
            (Ok(a), Ok(b)) => b.cmp(&a),
            (Err(_), Ok(_)) => Ordering::Less,
            (Ok(_), Err(_)) => Ordering::Greater,
            (Err(_), Err(_)) => Ordering::Equal,
        }
    }

    /// Signed integer representative of `u` in `(-p^r/2, p^r/2]`, for display only.
    fn balanced_unit(&self) -> Option<BigInt> {
        match &self.kind {
            Kind::Unit { unit, precision, .. } => {
                let m = power(self.prime, *precision);
                let u = BigInt::from(unit.clone());
                let m = BigInt::from(m);
                Some(if &u * 2 > m { u - m } else { u })
            }
            Kind::Zero { .. } => None,
        }
    }
}

impl fmt::Debug for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Zero { bound: None } => write!(f, "0"),
            Kind::Zero { bound: Some(b) } => write!(f, "O({}^{})", self.prime, b),
            Kind::Unit { valuation, precision, .. } => {
                let u = self.balanced_unit().expect("nonzero");
                // Small representatives print as plain integers, others as digits.
                if u.abs() < BigInt::from(1_000_000u32) {
                    write!(f, "{u}")?;
                } else {
                    let digits = self.unit_digits();
                    let shown: Vec<String> = digits.iter().take(8).map(|d| d.to_string()).collect();
                    write!(f, "[{}...]", shown.join(" "))?;
                }
                if *valuation != 0 {
                    write!(f, "*{}^{}", self.prime, valuation)?;
                }
                write!(f, " + O({}^{})", self.prime, valuation + *precision as i64)
            }
        }
    }
}
