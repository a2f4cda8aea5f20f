//! Elements `a + b*sqrt(d)` of a real quadratic extension of the rationals.
//!
//! The polynomial tables only ever need `d = 5` (golden-ratio coefficients)
//! or `d = 3`, never both inside the same polynomial, so a value stores at
//! most one radicand and arithmetic refuses to mix distinct ones.

use super::{format_rational, parse_rational, rational_to_float};
use crate::error::{Error, Result};
use num::{BigRational, One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Exact value `a + b*sqrt(d)` with rational `a`, `b` and squarefree `d`.
///
/// `d = 1` marks a plain rational (`b` is then zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
    d: u32,
}

impl QuadExt {
    /// Plain rational element.
    pub fn from_rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    /// Element `a + b*sqrt(d)`; `d` must be 1, 3 or 5.
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Result<Self> {
        match d {
            1 => {
                if !b.is_zero() {
                    return Err(Error::MixedExtension(1, 1));
                }
                Ok(Self::from_rational(a))
            }
            3 | 5 => {
                let mut v = Self { a, b, d };
                v.normalize();
                Ok(v)
            }
            other => Err(Error::MixedExtension(other, other)),
        }
    }

    /// The golden ratio `(1+sqrt5)/2`.
    pub fn phi() -> Self {
        Self {
            a: BigRational::new(1.into(), 2.into()),
            b: BigRational::new(1.into(), 2.into()),
            d: 5,
        }
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_d(d: u32) -> Result<Self> {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    fn normalize(&mut self) {
        if self.b.is_zero() {
            self.d = 1;
        }
    }

    /// Rational part.
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    /// Coefficient of `sqrt(d)`.
    pub fn radical_part(&self) -> &BigRational {
        &self.b
    }

    /// Radicand (1 when the value is rational).
    pub fn radicand(&self) -> u32 {
        self.d
    }

    /// True for the zero element.
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the value is a plain rational.
    pub fn is_rational(&self) -> bool {
        self.d == 1
    }

    /// Returns the rational value if this element is rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.d == 1 {
            Some(&self.a)
        } else {
            None
        }
    }

    fn join_radicand(&self, other: &Self) -> Result<u32> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(Error::MixedExtension(x, y)),
        }
    }

    /// Exact sum; errors when mixing sqrt3 with sqrt5.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let d = self.join_radicand(other)?;
        let mut v = Self {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d,
        };
        v.normalize();
        Ok(v)
    }

    /// Exact product; errors when mixing sqrt3 with sqrt5.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let d = self.join_radicand(other)?;
        let dd = BigRational::from(num::BigInt::from(d));
        let a = &self.a * &other.a + &dd * (&self.b * &other.b);
        let b = &self.a * &other.b + &self.b * &other.a;
        let mut v = Self { a, b, d };
        v.normalize();
        Ok(v)
    }

    /// Exact multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero quadratic element");
        let dd = BigRational::from(num::BigInt::from(self.d));
        let norm = &self.a * &self.a - &dd * (&self.b * &self.b);
        assert!(!norm.is_zero(), "non-invertible quadratic element");
        let mut v = Self {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        };
        v.normalize();
        v
    }

    /// Evaluates to a `rug::Float` at the given precision.
    pub fn eval_float(&self, prec: u32) -> rug::Float {
        let mut v = rational_to_float(&self.a, prec);
        if self.d != 1 {
            let root = rug::Float::with_val(prec, self.d).sqrt();
            v += rational_to_float(&self.b, prec) * root;
        }
        v
    }

    /// Canonical text form: `p/q`, `b*sqrtD`, or `a+b*sqrtD` (b sign folded in).
    pub fn to_text(&self) -> String {
        if self.d == 1 {
            return format_rational(&self.a);
        }
        let root = format!("sqrt{}", self.d);
        let b_txt = if self.b.abs().is_one() {
            root
        } else {
            format!("{}*{}", format_rational(&self.b.abs()), root)
        };
        let signed_b = if self.b.is_negative() {
            format!("-{b_txt}")
        } else {
            b_txt
        };
        if self.a.is_zero() {
            signed_b
        } else if self.b.is_negative() {
            format!("{}{}", format_rational(&self.a), signed_b)
        } else {
            format!("{}+{}", format_rational(&self.a), signed_b)
        }
    }

    /// Parses the canonical form plus the `phi` shorthand (`phi = (1+sqrt5)/2`).
    ///
    /// Accepted terms: rationals, `[coef*]sqrt3|sqrt5|phi`, joined by `+`/`-`.
    pub fn parse(s: &str) -> Option<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return None;
        }
        // Split into signed terms at top level.
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut sign = false;
        let mut first = true;
        for (i, c) in t.char_indices() {
            if (c == '+' || c == '-') && i > 0 && !first {
                let prev = t.as_bytes()[i - 1] as char;
                if prev != '+' && prev != '-' && prev != '*' && prev != '/' {
                    terms.push((sign, std::mem::take(&mut cur)));
                    sign = c == '-';
                    continue;
                }
            }
            if first {
                first = false;
                if c == '-' {
                    sign = true;
                    continue;
                }
                if c == '+' {
                    continue;
                }
            }
            cur.push(c);
        }
        terms.push((sign, cur));

        let mut acc = Self::from_rational(BigRational::zero());
        for (neg, term) in terms {
            let v = Self::parse_term(&term)?;
            let v = if neg { -v } else { v };
            acc = acc.try_add(&v).ok()?;
        }
        Some(acc)
    }

    fn parse_term(term: &str) -> Option<Self> {
        if term.is_empty() {
            return None;
        }
        let (coef_txt, radical) = if let Some(stripped) = term.strip_suffix("sqrt5") {
            (stripped, Some(5u32))
        } else if let Some(stripped) = term.strip_suffix("sqrt3") {
            (stripped, Some(3u32))
        } else if let Some(stripped) = term.strip_suffix("phi") {
            (stripped, Some(0u32))
        } else {
            (term, None)
        };
        let coef = match coef_txt {
            "" => BigRational::one(),
            c => parse_rational(c.strip_suffix('*').unwrap_or(c))?,
        };
        match radical {
            None => Some(Self::from_rational(coef)),
            Some(0) => Self::phi()
                .try_mul(&Self::from_rational(coef))
                .ok(),
            Some(d) => Self::new(BigRational::zero(), coef, d).ok(),
        }
    }
}

impl From<BigRational> for QuadExt {
    fn from(a: BigRational) -> Self {
        Self::from_rational(a)
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        self.try_add(&rhs).expect("mixed quadratic extensions")
    }
}

impl AddAssign<&QuadExt> for QuadExt {
    fn add_assign(&mut self, rhs: &QuadExt) {
        *self = self.try_add(rhs).expect("mixed quadratic extensions");
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        self + (-rhs)
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        self.try_mul(&rhs).expect("mixed quadratic extensions")
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
