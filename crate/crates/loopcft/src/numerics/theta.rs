//! Jacobi theta constants and the Dedekind eta function.
//!
//! Series conventions (nome q, |q| < 1):
//! `theta2(q) = 2 sum_{n>=0} q^{(n+1/2)^2}`,
//! `theta3(q) = sum_{n in Z} q^{n^2}`,
//! `theta4(q) = sum_{n in Z} (-1)^n q^{n^2}`,
//! `eta(tau) = q^{1/24} prod_{n>=1} (1 - q^n)` with `q = exp(2 pi i tau)`.
//!
//! The fractional power in theta2 uses the principal branch of `q^{1/4}`;
//! eta takes tau itself so its 24th root is branch-exact. Truncation stops
//! once three consecutive terms and the raw power `|q|^n` are below
//! 2^(-bits).

use crate::error::{Error, Result};
use crate::numerics::pi;
use rug::ops::Pow;
use rug::{Complex, Float};

/// Guard bits for internal arithmetic.
const GUARD: u32 = 32;

fn check_nome(q: &Complex) -> Result<Float> {
    let mag = q.clone().abs().real().clone();
    if mag >= 1 {
        return Err(Error::Domain {
            what: "theta nome",
            detail: format!("|q| = {} >= 1", mag.to_string_radix(10, Some(6))),
        });
    }
    Ok(mag)
}

/// Jacobi theta constant of index `k` in {2, 3, 4} at nome `q`.
pub fn theta(k: u8, q: &Complex) -> Result<Complex> {
    let prec = q.prec().0;
    let wp = prec + GUARD;
    let qq = Complex::with_val(wp, q);
    let qmag = check_nome(&qq)?;
    let tol = Float::with_val(wp, 1) >> (prec + GUARD / 2);
    let val = match k {
        3 | 4 => {
            // 1 + 2 sum_{n>=1} (+-1)^n q^{n^2}; incremental powers via
            // q^{n^2} = q^{(n-1)^2} * q^{2n-1}.
            let mut acc = Complex::with_val(wp, 1);
            let mut sq = qq.clone(); // q^{n^2}
            let mut odd = qq.clone(); // q^{2n-1}
            let q2 = qq.clone().square();
            let mut below = 0u8;
            let mut n = 1u64;
            loop {
                let mut term = Complex::with_val(wp, &sq * &Float::with_val(wp, 2));
                if k == 4 && n % 2 == 1 {
                    term = -term;
                }
                acc += &term;
                let small = *term.clone().abs().real() < tol
                    && qmag.clone().pow(n as u32) < tol;
                below = if small { below + 1 } else { 0 };
                if below >= 3 {
                    break acc;
                }
                odd *= &q2;
                sq *= &odd;
                n += 1;
                if n > 10_000_000 {
                    return Err(Error::NoConvergence {
                        what: "theta series",
                        last: term.abs().real().to_string_radix(10, Some(6)),
                    });
                }
            }
        }
        2 => {
            // 2 q^{1/4} sum_{n>=0} q^{n(n+1)}.
            let quarter = qq.clone().pow(&Complex::with_val(wp, Float::with_val(wp, 0.25)));
            let mut acc = Complex::with_val(wp, 1);
            let mut pw = Complex::with_val(wp, 1); // q^{n(n+1)}
            let q2 = qq.clone().square();
            let mut even = q2.clone(); // q^{2n} step: n(n+1) - (n-1)n = 2n
            let mut below = 0u8;
            let mut n = 1u64;
            loop {
                pw *= &even;
                let term = pw.clone();
                acc += &term;
                let small = *term.clone().abs().real() < tol
                    && qmag.clone().pow(n as u32) < tol;
                below = if small { below + 1 } else { 0 };
                if below >= 3 {
                    break Complex::with_val(wp, acc * quarter * 2u32);
                }
                even *= &q2;
                n += 1;
                if n > 10_000_000 {
                    return Err(Error::NoConvergence {
                        what: "theta series",
                        last: term.abs().real().to_string_radix(10, Some(6)),
                    });
                }
            }
        }
        other => {
            return Err(Error::Domain {
                what: "theta index",
                detail: format!("k = {other} not in {{2,3,4}}"),
            })
        }
    };
    Ok(Complex::with_val(prec, val))
}

/// Dedekind eta at modulus tau (upper half plane).
///
/// Both the 24th root and the product are built directly from tau, so no
/// branch choice is ever made on an intermediate nome.
pub fn dedekind_eta(tau: &Complex) -> Result<Complex> {
    let prec = tau.prec().0;
    let wp = prec + GUARD;
    let tt = Complex::with_val(wp, tau);
    if !(*tt.imag() > 0u32) {
        return Err(Error::Domain {
            what: "eta modulus",
            detail: format!("Im(tau) = {} <= 0", tt.imag().to_f64()),
        });
    }
    let two_pi_i = Complex::with_val(wp, (0, pi(wp))) * 2u32;
    let q = Complex::with_val(wp, &two_pi_i * &tt).exp();
    let qmag = q.clone().abs().real().clone();
    let tol = Float::with_val(wp, 1) >> (prec + GUARD / 2);
    // q^{1/24} = exp(2 pi i tau / 24).
    let root = (Complex::with_val(wp, &two_pi_i * &tt) / Float::with_val(wp, 24)).exp();
    let mut acc = Complex::with_val(wp, 1);
    let mut pw = Complex::with_val(wp, 1);
    let mut below = 0u8;
    let mut n = 1u64;
    loop {
        pw *= &q;
        let factor = Complex::with_val(wp, 1) - &pw;
        acc *= factor;
        let small = *pw.clone().abs().real() < tol && qmag.clone().pow(n as u32) < tol;
        below = if small { below + 1 } else { 0 };
        if below >= 3 {
            break;
        }
        n += 1;
        if n > 10_000_000 {
            return Err(Error::NoConvergence {
                what: "eta product",
                last: pw.abs().real().to_string_radix(10, Some(6)),
            });
        }
    }
    Ok(Complex::with_val(prec, acc * root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cplx, gamma_c, rel_err};

    fn tol(prec: u32, slack: u32) -> Float {
        Float::with_val(prec, 1) >> (prec - slack)
    }

    #[test]
    fn theta3_at_zero_is_one() {
        let prec = 128;
        let v = theta(3, &cplx(prec, 0.0, 0.0)).unwrap();
        assert_eq!(v, Complex::with_val(prec, 1));
    }

    #[test]
    fn jacobi_identity_at_real_nome() {
        let prec = 256;
        let q = cplx(prec, 0.1, 0.0);
        let t2 = theta(2, &q).unwrap().pow(4u32);
        let t3 = theta(3, &q).unwrap().pow(4u32);
        let t4 = theta(4, &q).unwrap().pow(4u32);
        let lhs = Complex::with_val(prec, &t2 + &t4);
        assert!(rel_err(&lhs, &t3) < tol(prec, 24));
    }

    #[test]
    fn jacobi_identity_random_complex_nomes() {
        let prec = 256;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let r: f64 = rng.random_range(0.0..0.5);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let q = cplx(prec, r * th.cos(), r * th.sin());
            let t2 = theta(2, &q).unwrap().pow(4u32);
            let t3 = theta(3, &q).unwrap().pow(4u32);
            let t4 = theta(4, &q).unwrap().pow(4u32);
            let lhs = Complex::with_val(prec, &t2 + &t4);
            assert!(rel_err(&lhs, &t3) < tol(prec, 32), "q = {q}");
        }
    }

    #[test]
    fn nome_domain_is_enforced() {
        let prec = 96;
        assert!(theta(3, &cplx(prec, 1.0, 0.0)).is_err());
        assert!(dedekind_eta(&cplx(prec, 0.3, -0.2)).is_err());
    }

    #[test]
    fn eta_at_i_matches_gamma_closed_form() {
        // eta(i) = Gamma(1/4) / (2 pi^{3/4}).
        let prec = 256;
        let tau = cplx(prec, 0.0, 1.0);
        let eta = dedekind_eta(&tau).unwrap();
        let g = gamma_c(&cplx(prec, 0.25, 0.0)).unwrap();
        let denom = pi(prec).pow(Float::with_val(prec, 0.75)) * 2u32;
        let expect = Complex::with_val(prec, g / denom);
        assert!(rel_err(&eta, &expect) < tol(prec, 24));
    }

    #[test]
    fn eta_modular_properties() {
        let prec = 256;
        for (x, y) in [(0.31, 0.87), (-0.22, 1.4), (0.05, 0.6)] {
            let tau = cplx(prec, x, y);
            // eta(tau + 1) = exp(i pi / 12) eta(tau).
            let left = dedekind_eta(&(tau.clone() + 1u32)).unwrap();
            let phase = Complex::with_val(prec, (0, pi(prec) / 12u32)).exp();
            let right = Complex::with_val(prec, phase * dedekind_eta(&tau).unwrap());
            assert!(rel_err(&left, &right) < tol(prec, 24), "shift at {tau}");
            // eta(-1/tau) = sqrt(-i tau) eta(tau), principal square root.
            let inv = -tau.clone().recip();
            let left2 = dedekind_eta(&inv).unwrap();
            let minus_i = Complex::with_val(prec, (0, -1));
            let factor = Complex::with_val(prec, &minus_i * &tau).sqrt();
            let right2 = Complex::with_val(prec, factor * dedekind_eta(&tau).unwrap());
            assert!(rel_err(&left2, &right2) < tol(prec, 24), "inversion at {tau}");
        }
    }
}
