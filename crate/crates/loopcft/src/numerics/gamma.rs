//! Ordinary Gamma and digamma functions for complex arguments.
//!
//! Real arguments go straight to MPFR. Complex arguments use the classical
//! Stirling expansion
//! `ln Gamma(w) = (w - 1/2) ln w - w + ln(2 pi)/2 + sum B_{2n} / (2n(2n-1) w^{2n-1})`
//! after shifting the argument far enough right that the asymptotic series
//! reaches the working tolerance, together with the reflection formula
//! `Gamma(z) Gamma(1-z) = pi / sin(pi z)` for arguments left of the critical
//! line. Bernoulli numbers are produced from `zeta(2n)` and cached per
//! precision.

use crate::error::{Error, Result};
use crate::numerics::pi;
use once_cell::sync::Lazy;
use rug::ops::Pow;
use rug::{Complex, Float};
use std::collections::HashMap;
use std::sync::Mutex;

/// Guard bits added internally so results are correct at the caller's
/// precision despite series truncation and shift accumulation.
const GUARD: u32 = 64;

static BERNOULLI_CACHE: Lazy<Mutex<HashMap<(u32, u32), Float>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Bernoulli number B_{2n} as a float (B_0 = 1, B_2 = 1/6, B_4 = -1/30, ...).
///
/// Computed from the even zeta values, `B_{2n} = (-1)^{n+1} 2 (2n)! zeta(2n)
/// / (2 pi)^{2n}`, and cached per `(n, precision)`.
pub fn bernoulli_2n(n: u32, prec: u32) -> Float {
    if n == 0 {
        return Float::with_val(prec, 1);
    }
    let key = (n, prec);
    if let Some(v) = BERNOULLI_CACHE.lock().unwrap().get(&key) {
        return v.clone();
    }
    let fact = Float::with_val(prec, Float::factorial(2 * n));
    let zeta = Float::with_val(prec, Float::zeta_u(2 * n));
    let two_pi_pow = (pi(prec) * 2u32).pow(2 * n);
    let mut b = fact * zeta * 2u32 / two_pi_pow;
    if n % 2 == 0 {
        b = -b;
    }
    BERNOULLI_CACHE.lock().unwrap().insert(key, b.clone());
    b
}

/// Real-part threshold beyond which the Stirling series reaches 2^(-prec):
/// the smallest term of the expansion at |w| = sigma is roughly
/// exp(-2 pi sigma), padded for the argument-dependent growth factor.
fn sigma_target(prec: u32) -> f64 {
    0.18 * f64::from(prec + GUARD) + 10.0
}

/// Stirling expansion of ln Gamma at `w`; valid branch for exponentiation
/// (the value is exact modulo 2 pi i). Requires Re(w) large; fails with a
/// non-convergence error when the asymptotic tail stalls above tolerance.
fn stirling_ln(w: &Complex) -> Result<Complex> {
    let prec = w.prec().0;
    let lnw = w.clone().ln();
    let half = Float::with_val(prec, 1) >> 1;
    let ln_two_pi = (pi(prec) * 2u32).ln();
    let mut acc = (w.clone() - &half) * &lnw - w + (ln_two_pi >> 1);
    let winv = w.clone().recip();
    let winv2 = winv.clone().square();
    let mut pow = winv;
    let tol = Float::with_val(prec, 1) >> (prec.saturating_sub(12).max(32));
    let mut prev_mag = Float::with_val(prec, rug::float::Special::Infinity);
    for n in 1..=prec {
        let b = bernoulli_2n(n, prec);
        let denom = Float::with_val(prec, 2 * n) * Float::with_val(prec, 2 * n - 1);
        let term = Complex::with_val(prec, &pow * &b) / denom;
        let mag = term.clone().abs().real().clone();
        acc += &term;
        if mag < tol {
            return Ok(acc);
        }
        if mag > prev_mag {
            return Err(Error::NoConvergence {
                what: "Stirling series",
                last: mag.to_string_radix(10, Some(8)),
            });
        }
        prev_mag = mag;
        pow *= &winv2;
    }
    Err(Error::NoConvergence {
        what: "Stirling series length",
        last: prev_mag.to_string_radix(10, Some(8)),
    })
}

fn gamma_impl(z: &Complex) -> Result<Complex> {
    let wp = z.prec().0;
    if z.imag().is_zero() {
        let re = z.real();
        if *re <= 0u32 && re.is_integer() {
            return Err(Error::GammaPole(z.to_string()));
        }
        return Ok(Complex::with_val(wp, re.clone().gamma()));
    }
    let half = Float::with_val(wp, 1) >> 1;
    if *z.real() < half {
        let pi_ = pi(wp);
        let sin = Complex::with_val(wp, z * &pi_).sin();
        let refl = gamma_impl(&(Complex::with_val(wp, 1) - z))?;
        return Ok(Complex::with_val(wp, &pi_ / &(sin * refl)));
    }
    let mut sigma = sigma_target(wp);
    for _ in 0..6 {
        let need = sigma - z.real().to_f64();
        let k = if need > 0.0 { need.ceil() as u32 } else { 0 };
        let w = z.clone() + k;
        match stirling_ln(&w) {
            Ok(s) => {
                let mut g = s.exp();
                let mut zj = z.clone();
                for _ in 0..k {
                    g /= &zj;
                    zj += 1u32;
                }
                return Ok(g);
            }
            Err(_) => sigma *= 1.5,
        }
    }
    Err(Error::NoConvergence {
        what: "gamma shift target",
        last: format!("sigma={sigma}"),
    })
}

/// Gamma function of a complex argument.
///
/// Errors with a pole report at non-positive integers.
pub fn gamma_c(z: &Complex) -> Result<Complex> {
    let prec = z.prec().0;
    let zz = Complex::with_val(prec + GUARD, z);
    Ok(Complex::with_val(prec, gamma_impl(&zz)?))
}

/// Asymptotic digamma at large Re(w):
/// `psi(w) = ln w - 1/(2w) - sum B_{2n} / (2n w^{2n})`.
fn digamma_asymptotic(w: &Complex) -> Result<Complex> {
    let prec = w.prec().0;
    let winv = w.clone().recip();
    let winv2 = winv.clone().square();
    let mut acc = w.clone().ln() - (winv.clone() >> 1);
    let mut pow = winv2.clone();
    let tol = Float::with_val(prec, 1) >> (prec.saturating_sub(12).max(32));
    let mut prev_mag = Float::with_val(prec, rug::float::Special::Infinity);
    for n in 1..=prec {
        let b = bernoulli_2n(n, prec);
        let term = Complex::with_val(prec, &pow * &b) / Float::with_val(prec, 2 * n);
        let mag = term.clone().abs().real().clone();
        acc -= &term;
        if mag < tol {
            return Ok(acc);
        }
        if mag > prev_mag {
            return Err(Error::NoConvergence {
                what: "digamma series",
                last: mag.to_string_radix(10, Some(8)),
            });
        }
        prev_mag = mag;
        pow *= &winv2;
    }
    Err(Error::NoConvergence {
        what: "digamma series length",
        last: prev_mag.to_string_radix(10, Some(8)),
    })
}

fn digamma_impl(z: &Complex) -> Result<Complex> {
    let wp = z.prec().0;
    if z.imag().is_zero() {
        let re = z.real();
        if *re <= 0u32 && re.is_integer() {
            // Finite value at the pole: psi(-r) := psi(r + 1).
            let r = (-re.clone()).to_f64() as u32;
            let shifted = Float::with_val(wp, r + 1);
            return Ok(Complex::with_val(wp, shifted.digamma()));
        }
        return Ok(Complex::with_val(wp, re.clone().digamma()));
    }
    let half = Float::with_val(wp, 1) >> 1;
    if *z.real() < half {
        // psi(z) = psi(1-z) - pi cot(pi z).
        let pi_ = pi(wp);
        let piz = Complex::with_val(wp, z * &pi_);
        let cot = piz.clone().cos() / piz.sin();
        let refl = digamma_impl(&(Complex::with_val(wp, 1) - z))?;
        return Ok(refl - Complex::with_val(wp, cot * &pi_));
    }
    let mut sigma = sigma_target(wp);
    for _ in 0..6 {
        let need = sigma - z.real().to_f64();
        let k = if need > 0.0 { need.ceil() as u32 } else { 0 };
        let w = z.clone() + k;
        match digamma_asymptotic(&w) {
            Ok(mut acc) => {
                // psi(z) = psi(z+k) - sum_{j=0}^{k-1} 1/(z+j).
                let mut zj = z.clone();
                for _ in 0..k {
                    acc -= zj.clone().recip();
                    zj += 1u32;
                }
                return Ok(acc);
            }
            Err(_) => sigma *= 1.5,
        }
    }
    Err(Error::NoConvergence {
        what: "digamma shift target",
        last: format!("sigma={sigma}"),
    })
}

/// Digamma function of a complex argument.
///
/// At the poles z = -r (r a non-negative integer) the finite value
/// psi(r + 1) is returned instead of an error.
pub fn digamma_c(z: &Complex) -> Result<Complex> {
    let prec = z.prec().0;
    let zz = Complex::with_val(prec + GUARD, z);
    Ok(Complex::with_val(prec, digamma_impl(&zz)?))
}
