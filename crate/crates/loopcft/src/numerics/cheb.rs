//! Chebyshev-like polynomials U_d with the normalization
//! U_d(q + q^{-1}) = q^d + q^{-d}, i.e. U_d(2 cos t) = 2 cos(d t).
//!
//! Recurrence: U_0 = 2, U_1 = x, U_{d+1} = x U_d - U_{d-1}. These are twice
//! the classical Chebyshev polynomials of the first kind in x/2; keeping the
//! "2 cos" normalization makes loop-weight identities integer-coefficient.

use crate::algebra::{MultiPoly, Var};
use rug::Complex;

/// U_d evaluated at a complex point.
pub fn chebyshev_u_complex(d: u32, x: &Complex) -> Complex {
    let prec = x.prec().0;
    let mut prev = Complex::with_val(prec, 2);
    if d == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..d {
        let next = Complex::with_val(prec, x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// U_d as an exact polynomial in the chosen variable.
pub fn chebyshev_u_poly(d: u32, var: Var) -> MultiPoly {
    let mut prev = MultiPoly::constant_rat(crate::algebra::rat(2, 1));
    if d == 0 {
        return prev;
    }
    let x = MultiPoly::var(var);
    let mut cur = x.clone();
    for _ in 1..d {
        let next = x.mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}
