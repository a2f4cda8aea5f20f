//! Recovery of exact rational (or quadratic-extension) coefficients from
//! high-precision floating values, by continued-fraction rounding.

use super::quad::QuadExt;
use super::rational_to_float;
use crate::error::{Error, Result};
use num::{BigInt, BigRational, One, Signed, Zero};
use rug::Float;

/// Finds the rational `p/q` closest to `x` along its continued fraction,
/// accepting the first convergent that reproduces `x` within `threshold`.
///
/// `max_denom` bounds the denominator; exceeding it means `x` is not a
/// plausible rational at this accuracy and an error is returned.
pub fn rationalize(x: &Float, threshold: &Float, max_denom: u64) -> Result<BigRational> {
    let prec = x.prec();
    let fail = || Error::Rationalize {
        value: x.to_string(),
        threshold: threshold.to_string(),
    };
    if !x.is_finite() {
        return Err(fail());
    }
    // Continued fraction with convergent recurrence p_k = a_k p_{k-1} + p_{k-2}.
    let mut p_prev = BigInt::zero();
    let mut p_cur = BigInt::one();
    let mut q_prev = BigInt::one();
    let mut q_cur = BigInt::zero();
    let mut rem = x.clone();
    let max_d = BigInt::from(max_denom);
    for _ in 0..128 {
        let a_f = rem.clone().floor();
        let a = match a_f.to_integer() {
            Some(i) => BigInt::parse_bytes(i.to_string().as_bytes(), 10).unwrap(),
            None => return Err(fail()),
        };
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
        if q_cur.magnitude() > max_d.magnitude() {
            return Err(fail());
        }
        let cand = BigRational::new(p_cur.clone(), q_cur.clone());
        let err = (x.clone() - rational_to_float(&cand, prec)).abs();
        if err <= *threshold {
            return Ok(cand);
        }
        let frac = rem.clone() - a_f;
        if frac.is_zero() {
            return Err(fail());
        }
        rem = frac.recip();
    }
    Err(fail())
}

/// Recovers `a + b*sqrt(d)` from `x`, trying plain rationals first.
///
/// For irrational values an integer relation `i + j*sqrt(d) - k*x = 0` is
/// sought by exact lattice reduction over the scaled values `(1, sqrt(d), x)`;
/// the relation yields `a = i/k`, `b = j/k`. Acceptance requires agreement
/// within `threshold` and denominators bounded by `max_denom`.
pub fn rationalize_quad(
    x: &Float,
    d: u32,
    threshold: &Float,
    max_denom: u64,
) -> Result<QuadExt> {
    if let Ok(r) = rationalize(x, threshold, max_denom) {
        return Ok(QuadExt::from_rational(r));
    }
    let fail = || Error::Rationalize {
        value: x.to_string(),
        threshold: threshold.to_string(),
    };
    let prec = x.prec();
    let root = Float::with_val(prec, d).sqrt();
    // Scale the triple (1, sqrt(d), x) to big integers; a short lattice
    // vector against them is an integer relation. Two thirds of the working
    // precision leaves the rounding error far below the relation gap.
    let shift = (2 * prec / 3) as i32;
    let scale_of = |v: &Float| -> Option<BigInt> {
        let scaled = Float::with_val(prec, v << shift).round();
        scaled
            .to_integer()
            .map(|i| BigInt::parse_bytes(i.to_string().as_bytes(), 10).unwrap())
    };
    let c = [
        scale_of(&Float::with_val(prec, 1)).ok_or_else(fail)?,
        scale_of(&root).ok_or_else(fail)?,
        scale_of(x).ok_or_else(fail)?,
    ];
    // Basis rows (e_i | c_i) in Z^4; LLL shrinks the appended column to
    // near zero exactly when a relation with small coefficients exists.
    let mut basis: Vec<[BigInt; 4]> = (0..3)
        .map(|i| {
            let mut row = [BigInt::zero(), BigInt::zero(), BigInt::zero(), c[i].clone()];
            row[i] = BigInt::one();
            row
        })
        .collect();
    lll_reduce(&mut basis);
    let max_d = BigInt::from(max_denom);
    for row in &basis {
        let (i, j, k) = (&row[0], &row[1], &row[2]);
        if k.is_zero() {
            continue;
        }
        let a = BigRational::new(-i.clone(), k.clone());
        let b = BigRational::new(-j.clone(), k.clone());
        if a.denom().magnitude() > max_d.magnitude()
            || b.denom().magnitude() > max_d.magnitude()
        {
            continue;
        }
        let cand = QuadExt::new(a, b, d)?;
        let err = (cand.eval_float(prec) - x.clone()).abs();
        if err <= *threshold {
            return Ok(cand);
        }
    }
    Err(fail())
}

/// In-place LLL reduction (delta = 3/4) of a small integer lattice basis.
///
/// Gram-Schmidt data is kept as exact rationals; fine at this dimension.
fn lll_reduce(basis: &mut Vec<[BigInt; 4]>) {
    let n = basis.len();
    // Rational Gram-Schmidt: returns squared norms B_i and coefficients mu.
    let gram = |basis: &Vec<[BigInt; 4]>| -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
        let mut mu = vec![vec![BigRational::zero(); n]; n];
        let mut b_star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
        let mut norms = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<BigRational> = basis[i]
                .iter()
                .map(|z| BigRational::from(z.clone()))
                .collect();
            for j in 0..i {
                let num: BigRational = (0..4)
                    .map(|t| BigRational::from(basis[i][t].clone()) * &b_star[j][t])
                    .sum();
                let m = if norms[j] == BigRational::zero() {
                    BigRational::zero()
                } else {
                    num / &norms[j]
                };
                for t in 0..4 {
                    let sub = &m * &b_star[j][t];
                    v[t] -= sub;
                }
                mu[i][j] = m;
            }
            let norm: BigRational = v.iter().map(|t| t * t).sum();
            b_star.push(v);
            norms.push(norm);
        }
        (mu, norms)
    };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let mut k = 1usize;
    let mut guard = 0u32;
    while k < n {
        guard += 1;
        if guard > 10_000 {
            break;
        }
        let (mu, norms) = gram(basis);
        // Size-reduce b_k against earlier vectors.
        let mut changed = false;
        for j in (0..k).rev() {
            if mu[k][j].clone().abs() > half {
                let q = (mu[k][j].clone() + &half).floor().to_integer();
                let (head, tail) = basis.split_at_mut(k);
                for t in 0..4 {
                    let sub = &q * &head[j][t];
                    tail[0][t] -= sub;
                }
                changed = true;
            }
        }
        if changed {
            continue;
        }
        // Lovász condition.
        let lhs = &norms[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &norms[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn recovers_simple_rationals() {
        let prec = 192;
        let x = rational_to_float(&rat(-22, 7), prec);
        let thr = Float::with_val(prec, 1e-40);
        assert_eq!(rationalize(&x, &thr, 1000).unwrap(), rat(-22, 7));
    }

    #[test]
    fn rejects_irrational() {
        let prec = 192;
        let x = Float::with_val(prec, 2).sqrt();
        let thr = Float::with_val(prec, 1e-40);
        assert!(rationalize(&x, &thr, 10_000).is_err());
    }

    #[test]
    fn recovers_noisy_rational_within_threshold() {
        let prec = 192;
        let mut x = rational_to_float(&rat(7, 12), prec);
        x += Float::with_val(prec, 1e-25);
        let thr = Float::with_val(prec, 1e-20);
        assert_eq!(rationalize(&x, &thr, 1000).unwrap(), rat(7, 12));
    }

    #[test]
    fn recovers_quadratic_values() {
        let prec = 192;
        let phi = QuadExt::phi();
        let x = phi.eval_float(prec);
        let thr = Float::with_val(prec, 1e-40);
        let got = rationalize_quad(&x, 5, &thr, 64).unwrap();
        assert_eq!(got, phi);

        let v = QuadExt::new(rat(-3, 2), rat(2, 3), 3).unwrap();
        let got3 = rationalize_quad(&v.eval_float(prec), 3, &thr, 64).unwrap();
        assert_eq!(got3, v);
    }
}
