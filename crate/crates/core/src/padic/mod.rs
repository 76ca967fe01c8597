//! Exact arithmetic in `Q_p` under a capped relative precision model.
//!
//! A nonzero value is stored as `p^v * u` where the unit `u` is known modulo
//! `p^r` (`r` is the relative precision). Values whose digits cancel to the
//! full known precision become a *zero at precision* carrying the absolute
//! bound `m`: the value is only known to be `0 mod p^m`. Norm queries on such
//! values fail instead of inventing a valuation.

mod number;
mod primes;
mod repr;
mod sqrt;

pub use number::{Closeness, Padic, PrecisionConfig, DEFAULT_PRECISION, MIN_PRECISION};
pub use primes::{is_prime, legendre, sqrt_mod_prime};
pub use sqrt::{SqrtFailure, SqrtRoots, SquareRootTest};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields: Q_{left} vs Q_{right}")]
    PrimeMismatch { left: u64, right: u64 },
    #[error("precision exhausted")]
    PrecisionExhausted,
    #[error("value is indistinguishable from zero at the working precision (known mod p^{bound:?})")]
    ZeroAtPrecision { bound: Option<i64> },
    #[error("no square root: {0}")]
    NoSquareRoot(SqrtFailure),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision cap {0} is below the minimum of {MIN_PRECISION}")]
    InvalidPrecision(u32),
    #[error("unit digits must not be divisible by p")]
    NotAUnit,
}
