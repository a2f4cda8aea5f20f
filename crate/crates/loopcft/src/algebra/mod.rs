//! Exact arithmetic: rationals, quadratic extensions of the rationals, and
//! multivariate polynomials in the loop weights.
//!
//! Channel Kac indices and polynomial structure constants must be exact, so
//! this module never touches floating point except in the explicit `eval_*`
//! methods that push exact data into `rug` values at a stated precision.

mod poly;
mod quad;
mod rationalize;

pub use poly::{MultiPoly, Var, VARS};
pub use quad::QuadExt;
pub use rationalize::{rationalize, rationalize_quad};

use num::{BigInt, BigRational};

/// Builds a rational `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Builds the integer rational `p`.
pub fn rint(p: i64) -> BigRational {
    BigRational::from(BigInt::from(p))
}

/// Parses a rational from `p/q` or integer text.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = t.parse().ok()?;
        Some(BigRational::from(n))
    }
}

/// Formats a rational as `p` or `p/q` in lowest terms.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Converts an exact rational to a `rug::Float` of the given precision.
pub fn rational_to_float(x: &BigRational, prec: u32) -> rug::Float {
    let n = rug::Integer::from_str_radix(&x.numer().to_string(), 10).expect("bigint text");
    let d = rug::Integer::from_str_radix(&x.denom().to_string(), 10).expect("bigint text");
    let nf = rug::Float::with_val(prec, n);
    let df = rug::Float::with_val(prec, d);
    nf / df
}

/// True when `x` is an integer.
pub fn is_integer(x: &BigRational) -> bool {
    x.is_integer()
}

/// Floor of a rational as a machine integer (panics on overflow).
pub fn floor_i64(x: &BigRational) -> i64 {
    use num::ToPrimitive;
    x.floor().to_integer().to_i64().expect("floor fits i64")
}
