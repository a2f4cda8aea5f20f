//! Barnes double Gamma function in the normalization `Gamma_beta(q0) = 1`,
//! `q0 = (beta + 1/beta)/2`, together with its residues at lattice poles.
//!
//! The function is characterized by the two shift equations
//! `Gamma_b(z + b) = sqrt(2 pi) b^{b z - 1/2} Gamma(b z)^{-1} Gamma_b(z)`
//! for `b in {beta, 1/beta}`, symmetry under `beta <-> 1/beta`, and the
//! normalization. Evaluation goes through the double zeta function:
//! `ln Gamma_beta(z) = zeta2'(0, z) - zeta2'(0, q0)` where
//! `zeta2(s, w) = sum_{m,n>=0} (w + m a1 + n a2)^{-s}`, `a1 = beta`,
//! `a2 = 1/beta`. The shift equations move `w` right, in value form so that
//! logarithm branches never matter, and the large-`w` regime is summed with
//! the asymptotic expansion
//! `zeta2'(0,w) ~ p0 w^2 (3/4 - ln(w)/2) + p1 w (ln w - 1) - p2 ln w
//!  + sum_{n>=3} p_n (n-3)! w^{2-n}`,
//! where `sum_n p_n t^n = t^2 / ((1-e^{-a1 t})(1-e^{-a2 t}))`.

use crate::error::{Error, Result};
use crate::numerics::gamma::bernoulli_2n;
use crate::numerics::{gamma_c, pi};
use once_cell::sync::Lazy;
use rug::ops::Pow;
use rug::{Complex, Float};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Guard bits for internal arithmetic.
const GUARD: u32 = 96;

/// Exact cache key for a complex parameter at a given precision.
fn cache_key(beta: &Complex, prec: u32) -> (String, u32) {
    (beta.to_string_radix(16, None), prec)
}

static P_CACHE: Lazy<Mutex<HashMap<(String, u32), Arc<Vec<Complex>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

static NORM_CACHE: Lazy<Mutex<HashMap<(String, u32), Complex>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Taylor coefficients p_n of `t^2 / ((1-e^{-a1 t})(1-e^{-a2 t}))`, i.e. the
/// convolution of the two Bernoulli generating series
/// `a t/(1-e^{-a t}) = sum_k (-1)^k B_k (a t)^k / k!`, divided by `a1 a2`.
fn p_coefficients(beta: &Complex, prec: u32, len: usize) -> Arc<Vec<Complex>> {
    let key = cache_key(beta, prec);
    if let Some(p) = P_CACHE.lock().unwrap().get(&key) {
        if p.len() >= len {
            return p.clone();
        }
    }
    let a1 = Complex::with_val(prec, beta);
    let a2 = a1.clone().recip();
    let series = |a: &Complex| -> Vec<Complex> {
        // u_k = (-1)^k B_k a^k / k!; odd k > 1 vanish, k = 1 gives +a/2.
        let mut u = vec![Complex::new(prec); len];
        u[0] = Complex::with_val(prec, 1);
        if len > 1 {
            u[1] = Complex::with_val(prec, a / 2u32);
        }
        let mut apow = a.clone().square();
        let mut fact = Float::with_val(prec, 2);
        for k in (2..len).step_by(2) {
            let b = bernoulli_2n(k as u32 / 2, prec);
            u[k] = Complex::with_val(prec, &apow * &b) / fact.clone();
            apow *= a.clone().square();
            fact *= Float::with_val(prec, ((k + 1) * (k + 2)) as u32);
        }
        u
    };
    let u = series(&a1);
    let v = series(&a2);
    let inv_a1a2 = Complex::with_val(prec, &a1 * &a2).recip();
    let mut p = vec![Complex::new(prec); len];
    for n in 0..len {
        let mut s = Complex::new(prec);
        for k in 0..=n {
            if (k > 1 && k % 2 == 1) || (n - k > 1 && (n - k) % 2 == 1) {
                continue;
            }
            s += Complex::with_val(prec, &u[k] * &v[n - k]);
        }
        p[n] = s * &inv_a1a2;
    }
    let arc = Arc::new(p);
    P_CACHE.lock().unwrap().insert(key, arc.clone());
    arc
}

/// Asymptotic value of zeta2'(0, w) for Re(w) large; errors when the
/// eventually-divergent tail stalls above tolerance (caller shifts further).
fn zeta2_asym(w: &Complex, beta: &Complex) -> Result<Complex> {
    let prec = w.prec().0;
    let len = prec as usize + 80;
    let p = p_coefficients(beta, prec, len);
    let lnw = w.clone().ln();
    let w2 = w.clone().square();
    // p0 w^2 (3/4 - ln(w)/2) + p1 w (ln w - 1) - p2 ln w.
    let lead0 = Complex::with_val(prec, 3) / 4u32 - Complex::with_val(prec, &lnw / &Float::with_val(prec, 2));
    let mut acc = Complex::with_val(prec, &p[0] * &(w2 * lead0));
    acc += Complex::with_val(prec, &p[1] * &(w.clone() * (lnw.clone() - 1u32)));
    acc -= Complex::with_val(prec, &p[2] * &lnw);
    let tol = Float::with_val(prec, 1) >> (prec.saturating_sub(10).max(32));
    let winv = w.clone().recip();
    // term_n = p_n (n-3)! w^{2-n}, built incrementally from n = 3.
    let mut pw = winv.clone(); // w^{2-n} at n = 3
    let mut fact = Float::with_val(prec, 1);
    let mut prev_mag = Float::with_val(prec, rug::float::Special::Infinity);
    for n in 3..len {
        let term = Complex::with_val(prec, &p[n] * &pw) * &fact;
        let mag = term.clone().abs().real().clone();
        acc += &term;
        if mag < tol {
            return Ok(acc);
        }
        if mag > prev_mag {
            return Err(Error::NoConvergence {
                what: "double zeta asymptotic series",
                last: mag.to_string_radix(10, Some(8)),
            });
        }
        prev_mag = mag;
        pw *= &winv;
        fact *= Float::with_val(prec, (n - 2) as u32);
    }
    Err(Error::NoConvergence {
        what: "double zeta asymptotic series length",
        last: prev_mag.to_string_radix(10, Some(8)),
    })
}

/// exp(zeta2'(0, z)) by shifting z right in value form and exponentiating
/// the asymptotic expansion. One shift step by `a` multiplies by
/// `Gamma(z/b) b^{z/b - 1/2} / sqrt(2 pi)` where `b` is the other parameter.
fn exp_zeta2_prime(z: &Complex, beta: &Complex) -> Result<Complex> {
    let prec = z.prec().0;
    let a1 = Complex::with_val(prec, beta);
    let a2 = a1.clone().recip();
    // Step with the larger parameter (fewer steps); corrections then use
    // the smaller one as `b`.
    let (a, b) = if *a1.clone().abs().real() >= *a2.clone().abs().real() {
        (a1.clone(), a2.clone())
    } else {
        (a2.clone(), a1.clone())
    };
    let binv = b.clone().recip();
    let lnb = b.clone().ln();
    let sqrt_2pi = (pi(prec) * 2u32).sqrt();
    let half = Float::with_val(prec, 1) >> 1;
    let amax = a.clone().abs().real().to_f64();
    let mut target = 0.125 * f64::from(prec + 48) * amax + 6.0;
    let mut w = z.clone();
    let mut f = Complex::with_val(prec, 1);
    for _ in 0..8 {
        while w.real().to_f64() < target {
            let arg = Complex::with_val(prec, &w * &binv);
            let g = gamma_c(&arg).map_err(|e| match e {
                Error::GammaPole(_) => pole_error(z, beta),
                other => other,
            })?;
            let power = Complex::with_val(prec, (arg - &half) * &lnb).exp();
            f *= Complex::with_val(prec, &g * &power) / &sqrt_2pi;
            w += &a;
        }
        match zeta2_asym(&w, beta) {
            Ok(s) => return Ok(f * s.exp()),
            Err(_) => target *= 1.4,
        }
    }
    Err(Error::NoConvergence {
        what: "double Gamma shift target",
        last: format!("target={target}"),
    })
}

/// Maps an interior ordinary-Gamma pole to a double-Gamma lattice report.
fn pole_error(z: &Complex, beta: &Complex) -> Error {
    if let Some((m, n)) = identify_pole(z, beta, z.prec().0) {
        return Error::DoubleGammaPole(z.to_string(), m, n);
    }
    Error::DoubleGammaPole(z.to_string(), u64::MAX, u64::MAX)
}

/// Searches the pole lattice `z = -m beta - n / beta` within a relative
/// half-precision tolerance; points that close are treated as poles.
fn identify_pole(z: &Complex, beta: &Complex, tol_prec: u32) -> Option<(u64, u64)> {
    let prec = z.prec().0;
    let scale = z.clone().abs().real().clone().max(&Float::with_val(prec, 1));
    let tol = Float::with_val(prec, scale) >> (tol_prec / 2);
    if beta.imag().is_zero() {
        // Real lattice: -m b - n / b with b > 0.
        if z.imag().clone().abs() > tol {
            return None;
        }
        let b = beta.real().clone();
        let binv = b.clone().recip();
        let x = z.real();
        if *x > tol {
            return None;
        }
        let m_max = ((-x.clone()) / &b).to_f64().floor() as i64 + 1;
        for m in 0..=m_max.clamp(0, 1_000_000) {
            let rem = -Float::with_val(prec, x) - Float::with_val(prec, &b * &Float::with_val(prec, m));
            let n = (rem.clone() * &b).round().to_f64();
            if n < -0.5 {
                continue;
            }
            let n = n.max(0.0) as u64;
            let diff = (rem - Float::with_val(prec, &binv * &Float::with_val(prec, n))).abs();
            if diff < tol {
                return Some((m as u64, n));
            }
        }
        return None;
    }
    // Complex lattice: solve the 2x2 real system for (m, n) and round.
    let binv = beta.clone().recip();
    let det = Float::with_val(prec, beta.real() * binv.imag())
        - Float::with_val(prec, beta.imag() * binv.real());
    if det.clone().abs() < (Float::with_val(prec, 1) >> (prec / 2)) {
        return None;
    }
    let rx = -z.real().clone();
    let ry = -z.imag().clone();
    let m = ((rx.clone() * binv.imag() - Float::with_val(prec, &ry * binv.real())) / &det).to_f64();
    let n = ((Float::with_val(prec, beta.real() * &ry) - Float::with_val(prec, beta.imag() * &rx))
        / &det)
        .to_f64();
    if !(m.is_finite() && n.is_finite()) || m < -0.5 || n < -0.5 || m > 1e9 || n > 1e9 {
        return None;
    }
    let (m, n) = (m.round().max(0.0) as u64, n.round().max(0.0) as u64);
    let lattice = Complex::with_val(
        prec,
        -(beta.clone() * Float::with_val(prec, m)) - binv * Float::with_val(prec, n),
    );
    if *Complex::with_val(prec, &lattice - z).abs().real() < tol {
        Some((m, n))
    } else {
        None
    }
}

fn check_beta(beta: &Complex) -> Result<()> {
    if !(*beta.real() > 0u32) {
        return Err(Error::Domain {
            what: "double Gamma parameter",
            detail: format!("Re(beta) = {} <= 0", beta.real().to_f64()),
        });
    }
    Ok(())
}

/// Barnes double Gamma `Gamma_beta(z)`, normalized to `Gamma_beta(q0) = 1`.
///
/// Inputs within relative distance `2^(-prec/2)` of a lattice pole
/// `-m beta - n / beta` are reported as poles with their lattice indices;
/// a rounded representation of a pole never evaluates to a large finite
/// number by accident.
pub fn barnes_double_gamma(beta: &Complex, z: &Complex) -> Result<Complex> {
    check_beta(beta)?;
    let prec = z.prec().0;
    let wp = prec + GUARD;
    let bb = Complex::with_val(wp, beta);
    let zz = Complex::with_val(wp, z);
    if let Some((m, n)) = identify_pole(&zz, &bb, prec) {
        return Err(Error::DoubleGammaPole(z.to_string(), m, n));
    }
    let numer = exp_zeta2_prime(&zz, &bb)?;
    let denom = normalization(&bb, wp)?;
    Ok(Complex::with_val(prec, numer / denom))
}

/// exp(zeta2'(0, q0)), cached per (beta, precision).
fn normalization(beta: &Complex, wp: u32) -> Result<Complex> {
    let key = cache_key(beta, wp);
    if let Some(v) = NORM_CACHE.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let q0 = Complex::with_val(wp, beta + &beta.clone().recip()) / 2u32;
    let v = exp_zeta2_prime(&q0, beta)?;
    NORM_CACHE.lock().unwrap().insert(key, v.clone());
    Ok(v)
}

/// Residue of `Gamma_beta` at the lattice pole `z0 = -m beta - n / beta`.
///
/// Iterating the beta-shift equation `m+1` times isolates the singular
/// ordinary-Gamma factor `Gamma(-n + beta eps) ~ (-1)^n / (n! beta eps)`;
/// the remaining factors are regular and evaluated directly:
/// `Res = Gamma_beta(beta - n/beta) * prod_{j != m} Gamma((j-m) beta^2 - n)
///  * beta^{(m+1)(1/2 + n + m beta^2 / 2)} * (2 pi)^{-(m+1)/2}
///  * (-1)^n / (n! beta)`.
pub fn barnes_residue(beta: &Complex, m: u64, n: u64, prec: u32) -> Result<Complex> {
    check_beta(beta)?;
    let wp = prec + GUARD;
    let b = Complex::with_val(wp, beta);
    let binv = b.clone().recip();
    let b2 = b.clone().square();
    // Regular double-Gamma factor at the shifted point.
    let top = Complex::with_val(wp, &b - &(binv.clone() * Float::with_val(wp, n)));
    let gb = barnes_double_gamma(&Complex::with_val(wp, beta), &top)?;
    let mut acc = Complex::with_val(wp, gb);
    // Ordinary Gamma factors for j = 0..m, j != m.
    for j in 0..m {
        let arg = Complex::with_val(wp, &b2 * &Float::with_val(wp, j as i64 - m as i64))
            - Float::with_val(wp, n);
        acc *= gamma_c(&arg)?;
    }
    // beta^E with E = (m+1)(1/2 + n + m beta^2 / 2).
    let exponent = (Complex::with_val(wp, &b2 * &Float::with_val(wp, m)) / 2u32
        + Float::with_val(wp, n)
        + (Float::with_val(wp, 1) >> 1))
        * Float::with_val(wp, m + 1);
    acc *= Complex::with_val(wp, exponent * b.clone().ln()).exp();
    // (2 pi)^{-(m+1)/2}.
    let two_pi = pi(wp) * 2u32;
    acc /= Complex::with_val(wp, two_pi.pow(Float::with_val(wp, m + 1) / 2u32));
    // (-1)^n / (n! beta).
    let fact = Float::with_val(wp, Float::factorial(n as u32));
    acc /= Complex::with_val(wp, &b * &fact);
    if n % 2 == 1 {
        acc = -acc;
    }
    Ok(Complex::with_val(prec, acc))
}
