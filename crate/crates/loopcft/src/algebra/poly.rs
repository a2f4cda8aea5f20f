//! Exact multivariate polynomials in the loop weights `n`, `w`, `w1`.
//!
//! Monomials are kept in a sorted map under graded-lexicographic order so
//! that emission is canonical. Coefficients are [`QuadExt`] values; mixing
//! sqrt3 and sqrt5 inside one polynomial is a logic error and panics.

use super::quad::QuadExt;
use num::{BigRational, One, Zero};
use rug::Complex;
use std::collections::BTreeMap;
use std::fmt;

/// Identifies one of the three loop-weight variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    /// Contractible-loop weight.
    N = 0,
    /// Non-contractible-loop weight (channel).
    W = 1,
    /// Weight of loops around the external puncture.
    W1 = 2,
}

/// All variables in canonical order.
pub const VARS: [Var; 3] = [Var::N, Var::W, Var::W1];

impl Var {
    /// Canonical variable name.
    pub fn name(&self) -> &'static str {
        match self {
            Var::N => "n",
            Var::W => "w",
            Var::W1 => "w1",
        }
    }

    /// Parses `n`, `w` or `w1`.
    pub fn parse(s: &str) -> Option<Var> {
        match s {
            "n" => Some(Var::N),
            "w" => Some(Var::W),
            "w1" => Some(Var::W1),
            _ => None,
        }
    }
}

/// Monomial exponents for (n, w, w1), ordered graded-lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mono(pub [u32; 3]);

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let ta: u32 = self.0.iter().sum();
        let tb: u32 = other.0.iter().sum();
        ta.cmp(&tb).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact polynomial in `n`, `w`, `w1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Mono, QuadExt>,
}

impl MultiPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Constant polynomial.
    pub fn constant(c: QuadExt) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Mono([0, 0, 0]), c);
        }
        p
    }

    /// Constant polynomial from a rational.
    pub fn constant_rat(c: BigRational) -> Self {
        Self::constant(QuadExt::from_rational(c))
    }

    /// The constant 1.
    pub fn one() -> Self {
        Self::constant_rat(BigRational::one())
    }

    /// The variable `v` as a polynomial.
    pub fn var(v: Var) -> Self {
        let mut exp = [0u32; 3];
        exp[v as usize] = 1;
        let mut p = Self::zero();
        p.terms
            .insert(Mono(exp), QuadExt::from_rational(BigRational::one()));
        p
    }

    /// Iterates monomials in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &QuadExt)> {
        self.terms.iter()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True for the zero polynomial.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inserts (adds) one monomial.
    pub fn add_term(&mut self, exp: [u32; 3], c: QuadExt) {
        if c.is_zero() {
            return;
        }
        let key = Mono(exp);
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(|| QuadExt::from_rational(BigRational::zero()));
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Exact sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.0, c.clone());
        }
        out
    }

    /// Exact difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact negation.
    pub fn neg(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.terms.insert(*m, -c.clone());
        }
        out
    }

    /// Exact product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let exp = [
                    ma.0[0] + mb.0[0],
                    ma.0[1] + mb.0[1],
                    ma.0[2] + mb.0[2],
                ];
                out.add_term(exp, ca.try_mul(cb).expect("mixed extensions in product"));
            }
        }
        out
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, c: &QuadExt) -> Self {
        let mut out = Self::zero();
        for (m, t) in &self.terms {
            let v = t.try_mul(c).expect("mixed extensions in scale");
            if !v.is_zero() {
                out.terms.insert(*m, v);
            }
        }
        out
    }

    /// Integer power.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Highest exponent of `v` (zero polynomial reports 0).
    pub fn degree(&self, v: Var) -> u32 {
        self.terms
            .keys()
            .map(|m| m.0[v as usize])
            .max()
            .unwrap_or(0)
    }

    /// Variables that actually occur.
    pub fn support(&self) -> Vec<Var> {
        VARS.iter()
            .copied()
            .filter(|v| self.terms.keys().any(|m| m.0[*v as usize] > 0))
            .collect()
    }

    /// Substitutes `v -> -v`.
    pub fn flip_var(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let c = if m.0[v as usize] % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            out.terms.insert(*m, c);
        }
        out
    }

    /// Substitutes an exact rational value for `v`.
    pub fn substitute_rat(&self, v: Var, value: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let k = m.0[v as usize];
            let mut exp = m.0;
            exp[v as usize] = 0;
            let mut pow = BigRational::one();
            for _ in 0..k {
                pow *= value;
            }
            out.add_term(
                exp,
                c.try_mul(&QuadExt::from_rational(pow))
                    .expect("mixed extensions"),
            );
        }
        out
    }

    /// Substitutes another polynomial for `v`.
    pub fn substitute_poly(&self, v: Var, value: &MultiPoly) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let k = m.0[v as usize];
            let mut exp = m.0;
            exp[v as usize] = 0;
            let mut base = Self::zero();
            base.terms.insert(Mono(exp), c.clone());
            out = out.add(&base.mul(&value.pow(k)));
        }
        out
    }

    /// Extracts the coefficient (a polynomial in the other variables) of `v^k`.
    pub fn coeff_of(&self, v: Var, k: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.0[v as usize] == k {
                let mut exp = m.0;
                exp[v as usize] = 0;
                out.terms.insert(Mono(exp), c.clone());
            }
        }
        out
    }

    /// Evaluates at complex values `(n, w, w1)` of precision `prec`.
    ///
    /// Exact coefficients are converted at the same precision, so the result
    /// is correctly rounded up to the final summation.
    pub fn eval_complex(&self, vals: &[Complex; 3], prec: u32) -> Complex {
        let mut acc = Complex::with_val(prec, 0);
        for (m, c) in &self.terms {
            let mut term = Complex::with_val(prec, c.eval_float(prec));
            for (i, e) in m.0.iter().enumerate() {
                for _ in 0..*e {
                    term *= &vals[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Evaluates at exact rational values, returning an exact element.
    pub fn eval_exact(&self, vals: &[QuadExt; 3]) -> QuadExt {
        let mut acc = QuadExt::from_rational(BigRational::zero());
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, e) in m.0.iter().enumerate() {
                for _ in 0..*e {
                    term = term.try_mul(&vals[i]).expect("mixed extensions in eval");
                }
            }
            acc += &term;
        }
        acc
    }

    /// Largest coefficient magnitude as a float (for scaling diagnostics).
    pub fn max_coeff_magnitude(&self, prec: u32) -> rug::Float {
        let mut best = rug::Float::with_val(prec, 0);
        for c in self.terms.values() {
            let v = c.eval_float(prec).abs();
            if v > best {
                best = v;
            }
        }
        best
    }

    /// The value of a constant polynomial; `None` when any variable appears.
    pub fn constant_value(&self) -> Option<QuadExt> {
        match self.terms.len() {
            0 => Some(QuadExt::from_rational(BigRational::from_integer(0.into()))),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.0 == [0, 0, 0]).then(|| c.clone())
            }
            _ => None,
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let mut coef = c.to_text();
            let needs_parens = coef.contains('+') || (coef.contains('-') && !coef.starts_with('-'));
            if !first {
                if !needs_parens && coef.starts_with('-') {
                    f.write_str(" - ")?;
                    coef.remove(0);
                } else {
                    f.write_str(" + ")?;
                }
            }
            first = false;
            if m.0 == [0, 0, 0] {
                write!(f, "{coef}")?;
            } else {
                if needs_parens {
                    write!(f, "({coef})")?;
                } else if coef != "1" {
                    write!(f, "{coef}*")?;
                }
                let mut firstv = true;
                for v in VARS {
                    let e = m.0[v as usize];
                    if e == 0 {
                        continue;
                    }
                    if !firstv || needs_parens {
                        f.write_str("*")?;
                    }
                    firstv = false;
                    if e == 1 {
                        write!(f, "{}", v.name())?;
                    } else {
                        write!(f, "{}^{}", v.name(), e)?;
                    }
                }
            }
        }
        Ok(())
    }
}
