use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::number::{with_power, Kind};
use super::{legendre, sqrt_mod_prime, Padic, PadicError};

/// Which existence condition a square root failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum SqrtFailure {
    OddValuation {
        valuation: i64,
    },
    NonResidue {
        digit: u64,
        prime: u64,
    },
    /// p = 2 needs the unit to be 1 mod 8.
    NotOneModEight {
        residue: u64,
    },
}

impl fmt::Display for SqrtFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SqrtFailure::OddValuation { valuation } => write!(f, "valuation odd ({valuation})"),
            SqrtFailure::NonResidue { digit, prime } => {
                write!(f, "leading digit {digit} is not a quadratic residue mod {prime}")
            }
            SqrtFailure::NotOneModEight { residue } => {
                write!(f, "unit is {residue} mod 8, digits a1 and a2 must vanish")
            }
        }
    }
}

/// The two roots `{+r, -r}`; `canonical` carries the normalized branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtRoots {
    pub canonical: Padic,
    pub other: Padic,
}

/// Step-by-step evaluation of the existence conditions, kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquareRootTest {
    pub prime: u64,
    pub valuation: i64,
    pub valuation_even: bool,
    pub leading_digit: u64,
    /// Odd p: Legendre symbol of the leading digit. p = 2: unit mod 8.
    pub residue_check: i64,
    pub exists: bool,
    pub failure: Option<SqrtFailure>,
}

impl SquareRootTest {
    pub fn trace(&self) -> Vec<String> {
        let mut lines = vec![format!("valuation = {} ({})", self.valuation, if self.valuation_even { "even" } else { "odd" })];
        if self.prime == 2 {
            lines.push(format!("unit mod 8 = {}", self.residue_check));
        } else {
            lines.push(format!("leading digit a0 = {}, legendre(a0/{}) = {}", self.leading_digit, self.prime, self.residue_check));
        }
        match &self.failure {
            None => lines.push("square root exists".to_string()),
            Some(f) => lines.push(format!("no square root: {f}")),
        }
        lines
    }
}

impl Padic {
    /// Evaluates the existence conditions without lifting.
    pub fn square_root_test(&self) -> Result<SquareRootTest, PadicError> {
        let (valuation, unit, precision) = match &self.kind {
            Kind::Unit { valuation, unit, precision } => (*valuation, unit, *precision),
            Kind::Zero { bound } => return Err(PadicError::ZeroAtPrecision { bound: *bound }),
        };
        let p = self.prime;
        let leading_digit = (unit % p).to_u64().expect("digit < p");
        let valuation_even = valuation % 2 == 0;
        let residue_check = if p == 2 {
            if precision < 3 {
                return Err(PadicError::PrecisionExhausted);
            }
            (unit % 8u32).to_i64().expect("small")
        } else {
            legendre(leading_digit, p) as i64
        };
        let failure = if !valuation_even {
            Some(SqrtFailure::OddValuation { valuation })
        } else if p == 2 && residue_check != 1 {
            Some(SqrtFailure::NotOneModEight { residue: residue_check as u64 })
        } else if p != 2 && residue_check != 1 {
            Some(SqrtFailure::NonResidue { digit: leading_digit, prime: p })
        } else {
            None
        };
        Ok(SquareRootTest { prime: p, valuation, valuation_even, leading_digit, residue_check, exists: failure.is_none(), failure })
    }

    pub fn has_sqrt(&self) -> Result<bool, PadicError> {
        if self.is_exact_zero() {
            return Ok(true);
        }
        Ok(self.square_root_test()?.exists)
    }

    /// Both square roots, canonical branch first. Exact zero maps to zero.
    pub fn sqrt(&self) -> Result<SqrtRoots, PadicError> {
        if self.is_exact_zero() {
            return Ok(SqrtRoots { canonical: self.clone(), other: self.clone() });
        }
        let test = self.square_root_test()?;
        if let Some(f) = test.failure {
            return Err(PadicError::NoSquareRoot(f));
        }
        let (valuation, unit, precision) = match &self.kind {
            Kind::Unit { valuation, unit, precision } => (*valuation, unit, *precision),
            Kind::Zero { .. } => unreachable!("handled above"),
        };
        let p = self.prime;
        let (s, width) = if p == 2 { lift_two(unit, precision) } else { lift_odd(unit, p, precision) };
        let other = with_power(p, width, |m| m - &s);
        let root = |u: BigUint| Padic { prime: p, kind: Kind::Unit { valuation: valuation / 2, unit: u, precision: width } };
        Ok(SqrtRoots { canonical: root(s), other: root(other) })
    }
}

/// Newton iteration `s <- s - (s^2 - u)/(2s)` mod `p^r`, canonical branch.
fn lift_odd(unit: &BigUint, p: u64, r: u32) -> (BigUint, u32) {
    let a0 = (unit % p).to_u64().expect("digit < p");
    let mut s = BigUint::from(sqrt_mod_prime(a0, p).expect("residue checked"));
    let mut known = 1u32;
    with_power(p, r, |m| {
        let u = unit % m;
        while known < r {
            let residual = (&s * &s + m - &u) % m;
            let inv = ((&s * 2u32) % m).modinv(m).expect("2s is a unit");
            s = (&s + m - (residual * inv) % m) % m;
            known = known.saturating_mul(2);
        }
        if (&s % p).to_u64().expect("digit < p") > (p - 1) / 2 {
            s = m - &s;
        }
    });
    (s, r)
}

/// Bitwise lift for p = 2. The root is determined mod `2^(r-1)`.
fn lift_two(unit: &BigUint, r: u32) -> (BigUint, u32) {
    let mut s = BigUint::one();
    for k in 3..r {
        let modulus = BigUint::one() << (k + 1);
        if (&s * &s) % &modulus != unit % &modulus {
            s += BigUint::one() << (k - 1);
        }
    }
    let width = r - 1;
    let m = BigUint::one() << width;
    s %= &m;
    if (&s % 4u32) != BigUint::one() {
        s = &m - &s;
    }
    debug_assert!(!s.is_zero());
    (s, width)
}
