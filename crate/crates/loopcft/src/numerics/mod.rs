//! Arbitrary-precision real and complex arithmetic plus the special
//! functions the rest of the crate consumes: ordinary and double Gamma
//! functions, Jacobi theta and Dedekind eta series, Chebyshev polynomials.
//!
//! Values are MPFR/MPC floats; every value carries its own precision, and
//! all operations are correctly rounded at that precision. There is no
//! global precision state.

pub mod barnes;
pub mod cheb;
pub mod gamma;
pub mod theta;

pub use barnes::{barnes_double_gamma, barnes_residue};
pub use cheb::{chebyshev_u_complex, chebyshev_u_poly};
pub use gamma::{digamma_c, gamma_c};
pub use theta::{dedekind_eta, theta};

use rug::{Complex, Float};

/// Real arbitrary-precision scalar.
pub type BigReal = Float;
/// Complex arbitrary-precision scalar.
pub type BigComplex = Complex;

/// pi at the given precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Pi)
}

/// Euler-Mascheroni constant at the given precision.
pub fn euler_gamma(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Euler)
}

/// Complex value from two f64 components.
pub fn cplx(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

/// Complex i at the given precision.
pub fn imag_unit(prec: u32) -> Complex {
    Complex::with_val(prec, (0, 1))
}

/// exp(2*pi*i * tau * mult), built from tau directly so that no logarithm
/// of an intermediate nome is ever taken (branch-exact for all tau).
pub fn exp_2pi_i(tau: &Complex, mult: &Complex) -> Complex {
    let prec = tau.prec().0;
    let two_pi_i = Complex::with_val(prec, (0, pi(prec))) * 2u32;
    (two_pi_i * tau * mult).exp()
}

/// Relative distance |a-b| / max(|a|, |b|, tiny); plain |a-b| if both tiny.
pub fn rel_err(a: &Complex, b: &Complex) -> Float {
    let prec = a.prec().0;
    let diff = Complex::with_val(prec, a - b).abs().real().clone();
    let na = a.clone().abs().real().clone();
    let nb = b.clone().abs().real().clone();
    let scale = if na > nb { na } else { nb };
    if scale == 0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_2pi_i_matches_nome() {
        let prec = 128;
        let tau = cplx(prec, 0.3, 1.1);
        let one = Complex::with_val(prec, 1);
        let q = exp_2pi_i(&tau, &one);
        // |q| = exp(-2 pi Im tau), arg q = 2 pi Re tau mod 2 pi.
        let expect_abs = (-2.0 * std::f64::consts::PI * 1.1f64).exp();
        let got: f64 = q.clone().abs().real().to_f64();
        assert!((got - expect_abs).abs() < 1e-12);
    }

    #[test]
    fn rel_err_is_scale_free() {
        let prec = 96;
        let a = cplx(prec, 1e20, 0.0);
        let b = cplx(prec, 1.0000001e20, 0.0);
        let e = rel_err(&a, &b).to_f64();
        assert!(e > 5e-8 && e < 2e-7, "{e}");
    }
}
