//! Structure constants for torus 1-point and sphere 4-point functions.
//!
//! Everything is assembled from the 3-point constant
//! `Chat_{1,2,3} = prod_{eps_i = pm} Gamma_beta^{-1}(q0 + (beta/2)|sum_i eps_i r_i|
//!  + (1/(2 beta)) sum_i eps_i s_i)`,
//! with sign factors `omega` fixed by shift equations. The torus reference
//! constant `Dhat_{(r,s)}` and its diagonal variant `Dhat_P` are explicit
//! double-Gamma products; residues of diagonal-sector poles involve the
//! factors `c^{r,s}`, `b^{r,s}`, `Theta_1^{r,s}`, `rho^{r,s}` and the
//! denominators `kappa_{r,s}`, which are polynomial in the loop weight `n`.
//! The full structure constant ansatz is
//! `D_{(r,s)} = (Dhat/kappa) (d/r + [r,s integer] Theta_1 / (w - w_{(r,s)}))`.

use crate::algebra::{rat, rational_to_float, rint, MultiPoly, QuadExt, Var};
use crate::error::{Error, Result};
use crate::kinematics::{CentralCharge, Field, KacIndices};
use crate::numerics::{barnes_double_gamma, barnes_residue, gamma_c, pi};
use num::{BigRational, Signed, ToPrimitive, Zero};
use rug::{Complex, Float};

/// Barnes double Gamma at this central charge.
pub fn gamma_beta(cc: &CentralCharge, z: &Complex) -> Result<Complex> {
    barnes_double_gamma(cc.beta(), z)
}

/// Complex Kac data `(r, s)` of a field. Labelled fields (non-diagonal and
/// degenerate) contribute their Kac labels; diagonal fields are read off
/// their momenta as `r = (P - Pbar)/beta = 0`, `s = -beta (P + Pbar) = -2 beta P`.
///
/// The distinction matters for degenerate fields `V^d_<1,s>`: their momenta
/// are `(P_{(1,s)}, P_{(1,s)})`, but the 3-point sign and Gamma structure is
/// that of the label `(1, s)`, not of the diagonal representation.
pub fn kac_complex(cc: &CentralCharge, f: &Field) -> (Complex, Complex) {
    let prec = cc.prec();
    if let Some(idx) = &f.indices {
        return (
            Complex::with_val(prec, rational_to_float(&idx.r, prec)),
            Complex::with_val(prec, rational_to_float(&idx.s, prec)),
        );
    }
    let r = Complex::with_val(prec, &f.p - &f.p_bar) / cc.beta();
    let s = -(Complex::with_val(prec, &f.p + &f.p_bar) * cc.beta());
    (r, s)
}

/// `z` reflected into `Re z >= 0` (the `|x|` of the 3-point formula,
/// continued off the real axis).
fn abs_re(z: Complex) -> Complex {
    if *z.real() < 0u32 {
        -z
    } else {
        z
    }
}

/// 3-point constant `Chat_{1,2,3}` (8 inverse double-Gamma factors).
///
/// A pole of any `Gamma_beta` makes the corresponding inverse factor, hence
/// the whole product, an exact zero.
pub fn c_check(cc: &CentralCharge, fields: [&Field; 3]) -> Result<Complex> {
    let prec = cc.prec();
    let q0 = cc.q0();
    let half_beta = Complex::with_val(prec, cc.beta()) / 2u32;
    let half_binv = cc.beta_inv() / 2u32;
    let kac: Vec<(Complex, Complex)> = fields.iter().map(|f| kac_complex(cc, f)).collect();
    let mut acc = Complex::with_val(prec, 1);
    for mask in 0..8u32 {
        let mut rsum = Complex::new(prec);
        let mut ssum = Complex::new(prec);
        for (i, (r, s)) in kac.iter().enumerate() {
            if mask >> i & 1 == 0 {
                rsum += r;
                ssum += s;
            } else {
                rsum -= r;
                ssum -= s;
            }
        }
        let arg = Complex::with_val(
            prec,
            &q0 + &(Complex::with_val(prec, &half_beta * &abs_re(rsum))
                + Complex::with_val(prec, &half_binv * &ssum)),
        );
        match gamma_beta(cc, &arg) {
            Ok(g) => acc /= g,
            Err(Error::DoubleGammaPole(..)) => return Ok(Complex::new(prec)),
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

// ---- Sign factors ------------------------------------------------------

fn require_integer(x: &BigRational, what: &'static str) -> Result<i64> {
    if !x.is_integer() {
        return Err(Error::Domain {
            what,
            detail: format!("exponent {x} not an integer"),
        });
    }
    x.to_integer().to_i64().ok_or(Error::Domain {
        what,
        detail: "exponent overflow".into(),
    })
}

fn parity_sign(e: i64) -> i32 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Sign ratio `omega|_{s1 -> s1+2} / omega` for a triple with first indices
/// `(r1, r2, r3)`: `(-)^{2 r3} (-)^{max(2r1, 2r2, 2r3, r1+r2+r3)}`.
pub fn omega_shift_s1_plus2(r: &[BigRational; 3]) -> Result<i32> {
    let two = rint(2);
    let mut m = &r[0] * &two;
    for cand in [&r[1] * &two, &r[2] * &two, &r[0] + &r[1] + &r[2]] {
        if cand > m {
            m = cand;
        }
    }
    let e = require_integer(&(&r[2] * &two + m), "omega shift s1+2")?;
    Ok(parity_sign(e))
}

/// Sign ratio `omega|_{s1 -> s1+1, s3 -> s3+1} / omega` for positive integer
/// first indices: `(-)^{max(r3, r2 - r1)}`.
pub fn omega_shift_s1s3_plus1(r: &[BigRational; 3]) -> Result<i32> {
    for x in r {
        if !x.is_integer() || !x.is_positive() {
            return Err(Error::Domain {
                what: "omega shift s1,s3+1",
                detail: format!("first index {x} not a positive integer"),
            });
        }
    }
    let m = std::cmp::max(r[2].clone(), &r[1] - &r[0]);
    Ok(parity_sign(require_integer(&m, "omega shift s1,s3+1")?))
}

/// Closed sign `omega_{1,k,k}/omega_{I,k,k} = (-)^{r1 floor(s) [2r < r1]}`
/// appearing in the reference structure constant.
pub fn omega_for_dhat(r1: i64, s: &BigRational, r: &BigRational) -> i32 {
    if &(r * rint(2)) < &rint(r1) {
        parity_sign(r1 * s.floor().to_integer().to_i64().expect("floor fits"))
    } else {
        1
    }
}

// ---- Reference structure constants -------------------------------------

/// Wraps a double-Gamma evaluation with pole bookkeeping: `Ok(None)` flags a
/// pole (an infinite factor), other errors propagate.
fn gamma_or_pole(cc: &CentralCharge, z: &Complex) -> Result<Option<Complex>> {
    match gamma_beta(cc, z) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DoubleGammaPole(..)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Multiplies Gamma_beta values of `args` into `acc`; a pole makes the
/// product infinite, reported through `formula`.
fn gamma_product(cc: &CentralCharge, args: &[Complex], formula: &'static str) -> Result<Option<Complex>> {
    let prec = cc.prec();
    let mut acc = Complex::with_val(prec, 1);
    for z in args {
        match gamma_or_pole(cc, z)? {
            Some(v) => acc *= v,
            None => {
                if formula.is_empty() {
                    return Ok(None);
                }
                return Err(Error::PoleCollision {
                    formula,
                    arg: z.to_string(),
                });
            }
        }
    }
    Ok(Some(acc))
}

/// External-field data entering `Dhat`: momenta `q0 + P_{(r1, +-s1)}`. The
/// second index may be complex, so diagonal externals (with the read-off
/// `s1 = -2 beta P1`) are covered.
fn external_denominator_args(cc: &CentralCharge, r1: &BigRational, s1: &Complex) -> Vec<Complex> {
    let prec = cc.prec();
    let q0 = cc.q0();
    let r1c = Complex::with_val(prec, rational_to_float(r1, prec));
    let mut args = Vec::new();
    for sgn in [1i32, -1] {
        let s = Complex::with_val(prec, s1 * &Complex::with_val(prec, sgn));
        let p1 = cc.momentum_c(&r1c, &s);
        let a = Complex::with_val(prec, &q0 + &p1);
        args.push(a.clone());
        args.push(a); // squared factor
    }
    args
}

/// Sign of `Dhat` for external `(r1, s1)` and channel `(r, s)`: trivial
/// unless `2r < r1`, which requires an integer `r1`.
fn dhat_sign(r1: &BigRational, s: &BigRational, r: &BigRational) -> Result<i32> {
    if &(r * rint(2)) >= r1 {
        return Ok(1);
    }
    let r1_int = require_integer(r1, "dhat sign")?;
    Ok(omega_for_dhat(r1_int, s, r))
}

/// Arguments of `1/C_{I,k,k}`, the inverse normalization of the channel
/// field by the identity: `Gamma_beta^2(beta^{+-1})` and
/// `Gamma_beta(beta^{+-1} + z)` for `z` in `channel_shifts` (the four
/// `2 P_{(r,+-s)}` or `+-2P`).
fn identity_normalizer_args(cc: &CentralCharge, channel_shifts: &[Complex; 2]) -> Vec<Complex> {
    let prec = cc.prec();
    let mut args = Vec::new();
    for binv in [false, true] {
        let base = if binv {
            cc.beta_inv()
        } else {
            cc.beta().clone()
        };
        args.push(base.clone());
        args.push(base.clone()); // squared factor
        for z in channel_shifts {
            args.push(Complex::with_val(prec, &base + z));
        }
    }
    args
}

/// `1/C_{I,k,k}` for a non-diagonal channel `V_{(r,s)}`:
/// `prod_{+-} Gamma_beta^2(beta^{+-1}) prod_{+-,+-} Gamma_beta(beta^{+-1} + 2P_{(r,+-s)})`.
fn identity_normalizer(cc: &CentralCharge, rs: &KacIndices) -> Result<Complex> {
    let prec = cc.prec();
    let shifts = [
        Complex::with_val(prec, cc.momentum(&rs.r, &rs.s) * 2u32),
        Complex::with_val(prec, cc.momentum(&rs.r, &(-&rs.s)) * 2u32),
    ];
    let args = identity_normalizer_args(cc, &shifts);
    Ok(gamma_product(cc, &args, "dhat numerator")?.expect("numerator poles error out"))
}

/// Torus reference structure constant for a non-diagonal channel field:
/// `Dhat_{(r,s)} = sign * prod Gamma_beta(beta^{+-1})^2
///   prod_{+-,+-} Gamma_beta(beta^{+-1} + 2 P_{(r,+-s)})
///   / [prod_{+-} Gamma_beta^2(q0 + P_{(r1,+-s1)})
///      prod_{eps,+-} Gamma_beta(q0 + P_{(|r1+2 eps r|, +-(s1+2 eps s))})]`.
pub fn dhat_nondiagonal(
    cc: &CentralCharge,
    r1s1: &KacIndices,
    rs: &KacIndices,
) -> Result<Complex> {
    let s1 = Complex::with_val(cc.prec(), rational_to_float(&r1s1.s, cc.prec()));
    dhat_nondiagonal_with(cc, &r1s1.r, &s1, rs)
}

/// `Dhat_{(r,s)}` for an external field given as `&Field` (diagonal
/// externals read off `(0, -2 beta P1)`).
pub fn dhat_nondiagonal_field(
    cc: &CentralCharge,
    external: &Field,
    rs: &KacIndices,
) -> Result<Complex> {
    let (r1, s1) = external.kac_labels(cc);
    dhat_nondiagonal_with(cc, &r1, &s1, rs)
}

fn dhat_nondiagonal_with(
    cc: &CentralCharge,
    r1: &BigRational,
    s1: &Complex,
    rs: &KacIndices,
) -> Result<Complex> {
    let prec = cc.prec();
    let q0 = cc.q0();
    let sign = dhat_sign(r1, &rs.s, &rs.r)?;

    let numer = identity_normalizer(cc, rs)?;

    let mut denom_args = external_denominator_args(cc, r1, s1);
    for eps in [1i64, -1] {
        let rr = (r1 + &(&rs.r * rint(2 * eps))).abs();
        let rrc = Complex::with_val(prec, rational_to_float(&rr, prec));
        let shift = rational_to_float(&(&rs.s * rint(2 * eps)), prec);
        let srow = Complex::with_val(prec, s1 + &Complex::with_val(prec, shift));
        for ssgn in [1i32, -1] {
            let ss = Complex::with_val(prec, &srow * &Complex::with_val(prec, ssgn));
            let p = cc.momentum_c(&rrc, &ss);
            denom_args.push(Complex::with_val(prec, &q0 + &p));
        }
    }
    let denom = match gamma_product(cc, &denom_args, "")? {
        Some(v) => v,
        // Pole in a denominator Gamma_beta: Dhat vanishes exactly.
        None => return Ok(Complex::new(prec)),
    };
    let mut out = numer / denom;
    if sign < 0 {
        out = -out;
    }
    Ok(out)
}

/// `1/C_{I,k,k}` for a diagonal channel field of momentum `P`:
/// the identity-normalization Gamma product with shifts `+-2P`.
pub fn identity_normalizer_p(cc: &CentralCharge, p: &Complex) -> Result<Complex> {
    let prec = cc.prec();
    let two_p = Complex::with_val(prec, p * &Complex::with_val(prec, 2));
    let shifts = [two_p.clone(), Complex::with_val(prec, -two_p)];
    let args = identity_normalizer_args(cc, &shifts);
    Ok(gamma_product(cc, &args, "dhat numerator")?.expect("numerator poles error out"))
}

/// Diagonal variant: `Dhat_P` with `+-2P` in place of the Kac combinations
/// (no sign factor; `s` may be complex).
pub fn dhat_diagonal(cc: &CentralCharge, r1s1: &KacIndices, p: &Complex) -> Result<Complex> {
    let s1 = Complex::with_val(cc.prec(), rational_to_float(&r1s1.s, cc.prec()));
    dhat_diagonal_with(cc, &r1s1.r, &s1, p)
}

/// `Dhat_P` for an external field given as `&Field`.
pub fn dhat_diagonal_field(cc: &CentralCharge, external: &Field, p: &Complex) -> Result<Complex> {
    let (r1, s1) = external.kac_labels(cc);
    dhat_diagonal_with(cc, &r1, &s1, p)
}

fn dhat_diagonal_with(
    cc: &CentralCharge,
    r1: &BigRational,
    s1: &Complex,
    p: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    let q0 = cc.q0();
    let two_p = Complex::with_val(prec, p * &Complex::with_val(prec, 2));
    let r1c = Complex::with_val(prec, rational_to_float(r1, prec));

    let numer = identity_normalizer_p(cc, p)?;

    let mut denom_args = external_denominator_args(cc, r1, s1);
    for ssgn in [1i32, -1] {
        let s = Complex::with_val(prec, s1 * &Complex::with_val(prec, ssgn));
        let p1 = cc.momentum_c(&r1c, &s);
        let base = Complex::with_val(prec, &q0 + &p1);
        denom_args.push(Complex::with_val(prec, &base + &two_p));
        denom_args.push(Complex::with_val(prec, &base - &two_p));
    }
    let denom = match gamma_product(cc, &denom_args, "")? {
        Some(v) => v,
        None => return Ok(Complex::new(prec)),
    };
    Ok(numer / denom)
}

/// Sphere reference structure constant for the 4-point family
/// `<V0 V1 V0 V0>` with channel `V_{(R,s)}`:
/// `Dhat^sphere = sign * Chat_{0,1,k} Chat_{0,0,k} / C_{I,k,k}`,
/// where `1/C_{I,k,k}` is the identity normalization (the same double-Gamma
/// numerator as in the torus reference constant) and the sign matches the
/// torus solution with `R = 2r`.
pub fn dhat_sphere_family(cc: &CentralCharge, v1: &Field, rs: &KacIndices) -> Result<Complex> {
    let v0 = Field::diagonal_s(cc, &Complex::with_val(cc.prec(), rational_to_float(&rat(1, 2), cc.prec())));
    let vk = Field::non_diagonal(cc, rs.clone())?;
    let c01 = c_check(cc, [&v0, v1, &vk])?;
    let c00 = c_check(cc, [&v0, &v0, &vk])?;
    let norm = identity_normalizer(cc, rs)?;
    let r1 = match &v1.indices {
        Some(idx) => require_integer(&idx.r, "sphere dhat sign")?,
        None => 0,
    };
    let sign = omega_for_dhat(r1, &rs.s, &(&rs.r / rint(2)));
    let mut out = Complex::with_val(cc.prec(), c01 * c00) * norm;
    if sign < 0 {
        out = -out;
    }
    Ok(out)
}

/// The `<V0 V1 V0 V0>` sphere reference constant as an analytic family of
/// the diagonal channel momentum: `Dhat^sphere_P = Chat_{0,1,P} Chat_{0,0,P}
/// / C_{I,P,P}` (no sign factor).
pub fn dhat_sphere_diagonal(cc: &CentralCharge, v1: &Field, p: &Complex) -> Result<Complex> {
    let prec = cc.prec();
    let half = Complex::with_val(prec, rational_to_float(&rat(1, 2), prec));
    let v0 = Field::diagonal_s(cc, &half);
    let vp = Field::diagonal_p(p.clone());
    let c01 = c_check(cc, [&v0, v1, &vp])?;
    let c00 = c_check(cc, [&v0, &v0, &vp])?;
    let norm = identity_normalizer_p(cc, p)?;
    Ok(Complex::with_val(prec, c01 * c00) * norm)
}

/// Logarithmic-coupling coefficient from its defining limit,
/// `ell_{(r,s)} = -D'(P_{(r,s)})/D(P_{(r,s)})
///   + lim_{P -> P_{(r,-s)}} [2/(P - P_{(r,-s)}) + D'(P)/D(P)]`,
/// for a diagonal structure-constant family `D(P)` given as a closure.
/// Derivatives by central differences; the pole is approached symmetrically
/// from both sides so the odd error cancels. The closure should evaluate at
/// the precision of `cc`, which sets the step sizes.
pub fn ell_from_family<F>(cc: &CentralCharge, family: F, r: u32, s: u32) -> Result<Complex>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let prec = cc.prec();
    let h = Complex::with_val(prec, Float::with_val(prec, 1) >> (prec / 3));
    let eps = Float::with_val(prec, 1) >> (prec / 8);

    let log_deriv = |x: &Complex| -> Result<Complex> {
        let up = family(&Complex::with_val(prec, x + &h))?;
        let dn = family(&Complex::with_val(prec, x - &h))?;
        let mid = family(x)?;
        if mid.is_zero() {
            return Err(Error::Domain {
                what: "ell family",
                detail: "family vanishes at an evaluation point".into(),
            });
        }
        let num = Complex::with_val(prec, up - dn);
        Ok(num / (Complex::with_val(prec, &h * &mid) * 2u32))
    };

    let p0 = cc.momentum(&rint(r as i64), &rint(s as i64));
    let term1 = -log_deriv(&p0)?;

    let p1 = cc.momentum(&rint(r as i64), &rint(-(s as i64)));
    let mut term2 = Complex::new(prec);
    for sgn in [1i32, -1] {
        let off = Complex::with_val(prec, &eps * &Float::with_val(prec, sgn));
        let x = Complex::with_val(prec, &p1 + &off);
        let two_over = Complex::with_val(prec, 2) / &off;
        term2 += two_over + log_deriv(&x)?;
    }
    term2 /= 2u32;
    Ok(term1 + term2)
}

/// Sphere logarithmic coupling for the `<V0 V1 V0 V0>` family at integer
/// channel indices, evaluated from the defining limit at elevated internal
/// precision. Channel-independent for this family, because every channel
/// pairing produces the same product of reference 3-point constants.
pub fn ell_sphere_family(cc: &CentralCharge, v1: &Field, r: u32, s: u32) -> Result<Complex> {
    let prec_hi = cc.prec() + 192;
    let cc_hi = CentralCharge::new(Complex::with_val(prec_hi, cc.beta()))?;
    let v1_hi = lift_field(&cc_hi, v1, prec_hi)?;
    let ell = ell_from_family(
        &cc_hi,
        |p| dhat_sphere_diagonal(&cc_hi, &v1_hi, p),
        r,
        s,
    )?;
    Ok(Complex::with_val(cc.prec(), ell))
}

/// Re-expresses a field at a different precision, keeping its exact data.
fn lift_field(cc: &CentralCharge, f: &Field, prec: u32) -> Result<Field> {
    Ok(match (&f.kind, &f.indices) {
        (crate::kinematics::FieldKind::NonDiagonal, Some(idx)) => {
            Field::non_diagonal(cc, idx.clone())?
        }
        (crate::kinematics::FieldKind::Degenerate, Some(idx)) => {
            let s = require_integer(&idx.s, "degenerate lift")?;
            Field::degenerate(cc, s as u32)
        }
        _ => Field::diagonal_p(Complex::with_val(prec, &f.p)),
    })
}

// ---- Shift ratios of reference structure constants ----------------------

fn gamma_ratio_product(
    num_args: &[Complex],
    den_args: &[Complex],
    prec: u32,
) -> Result<Complex> {
    let mut acc = Complex::with_val(prec, 1);
    for a in num_args {
        acc *= gamma_c(a)?;
    }
    for a in den_args {
        acc /= gamma_c(a)?;
    }
    Ok(acc)
}

/// `Dhat_{(r,s+1)} / Dhat_{(r,s-1)}` as a product of ordinary Gamma
/// functions; valid for any `r >= 0` (rational) and complex `s`. The
/// external field enters through `r1` (rational first index) and `s1`
/// (complex second index, so diagonal externals with their momentum
/// read-off are covered).
pub fn dhat_shift2(
    cc: &CentralCharge,
    r1: &BigRational,
    s1: &Complex,
    r: &BigRational,
    s: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    let b2i = cc.beta_inv().square();
    let one = Complex::with_val(prec, 1);
    let b2i_s = Complex::with_val(prec, &b2i * s);
    let rf = Complex::with_val(prec, rational_to_float(r, prec));
    let mut num = Vec::new();
    let mut den = Vec::new();
    for a in [
        Complex::new(prec),
        one.clone(),
        b2i.clone(),
        Complex::with_val(prec, &one - &b2i),
    ] {
        num.push(Complex::with_val(prec, &a + &rf) - &b2i_s);
        den.push(Complex::with_val(prec, &a + &rf) + &b2i_s);
    }
    let half_r1 = r1 / rint(2);
    let half_s1 = Complex::with_val(prec, s1 / &Complex::with_val(prec, 2));
    for a_sign in [1i64, -1] {
        // a in {(1 - beta^{-2})/2, (1 + beta^{-2})/2}.
        let a = (Complex::with_val(prec, &one + &(b2i.clone() * a_sign)))
            / 2u32;
        for pm in [1i64, -1] {
            let rabs = (r + &(&half_r1 * rint(pm))).abs();
            let rf = Complex::with_val(prec, rational_to_float(&rabs, prec));
            let sc = Complex::with_val(prec, s + &(half_s1.clone() * pm));
            let shift = Complex::with_val(prec, &b2i * &sc);
            let base = Complex::with_val(prec, &a + &rf);
            num.push(Complex::with_val(prec, &base + &shift));
            den.push(Complex::with_val(prec, &base - &shift));
        }
    }
    gamma_ratio_product(&num, &den, prec)
}

/// `Dhat_{(r,s+1)} / Dhat_{(r,s)}` for integer `r >= 0`, including the sign
/// `(-)^{r1 [2r < r1]}`.
pub fn dhat_shift1(
    cc: &CentralCharge,
    r1: &BigRational,
    s1: &Complex,
    r: &BigRational,
    s: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    if !r.is_integer() || r.is_negative() {
        return Err(Error::Domain {
            what: "dhat single shift",
            detail: format!("r = {r} not in N"),
        });
    }
    let b2i = cc.beta_inv().square();
    let one = Complex::with_val(prec, 1);
    let b2i_s = Complex::with_val(prec, &b2i * s);
    let rf = Complex::with_val(prec, rational_to_float(r, prec));
    let mut num = Vec::new();
    let mut den = Vec::new();
    for a in [Complex::new(prec), Complex::with_val(prec, &one - &b2i)] {
        num.push(Complex::with_val(prec, &a + &rf) - &b2i_s);
    }
    for a in [one.clone(), b2i.clone()] {
        den.push(Complex::with_val(prec, &a + &rf) + &b2i_s);
    }
    let half_r1 = r1 / rint(2);
    let half_s1 = Complex::with_val(prec, s1 / &Complex::with_val(prec, 2));
    let a_plus = (Complex::with_val(prec, &one + &b2i)) / 2u32;
    let a_minus = (Complex::with_val(prec, &one - &b2i)) / 2u32;
    for pm in [1i64, -1] {
        let rabs = (r + &(&half_r1 * rint(pm))).abs();
        let rf = Complex::with_val(prec, rational_to_float(&rabs, prec));
        let sc = Complex::with_val(prec, s + &(half_s1.clone() * pm));
        let shift = Complex::with_val(prec, &b2i * &sc);
        num.push(Complex::with_val(prec, &a_plus + &rf) + &shift);
        den.push(Complex::with_val(prec, &a_minus + &rf) - &shift);
    }
    let r1_int = require_integer(r1, "dhat single shift sign")?;
    let mut out = gamma_ratio_product(&num, &den, prec)?;
    if &(r * rint(2)) < &rint(r1_int) && r1_int % 2 != 0 {
        out = -out;
    }
    Ok(out)
}

// ---- Block residue factors ---------------------------------------------

/// `c^{r,s}(P) = prod_{+-} Gamma_beta(q0 + P +- P_{(r,s)})
///             / prod_{+-} Gamma_beta(q0 + P +- P_{(r,-s)})`.
///
/// All four arguments depend on `P` with unit derivative, so when numerator
/// and denominator hit lattice poles simultaneously the singular factors
/// cancel in pairs and each poled Gamma is replaced by its residue.  A
/// surplus of denominator poles makes the value an exact zero; a surplus of
/// numerator poles is an uncancelled divergence and errors.
pub fn c_factor(
    cc: &CentralCharge,
    r: &BigRational,
    s: &BigRational,
    p: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    let q0 = cc.q0();
    let p_rs = cc.momentum(r, s);
    let p_rms = cc.momentum(r, &(-s));
    let base = Complex::with_val(prec, &q0 + p);
    let num_args = [
        Complex::with_val(prec, &base + &p_rs),
        Complex::with_val(prec, &base - &p_rs),
    ];
    let den_args = [
        Complex::with_val(prec, &base + &p_rms),
        Complex::with_val(prec, &base - &p_rms),
    ];
    let mut num_poles = 0u32;
    let mut den_poles = 0u32;
    let mut acc = Complex::with_val(prec, 1);
    for z in &num_args {
        match gamma_beta(cc, z) {
            Ok(v) => acc *= v,
            Err(Error::DoubleGammaPole(_, m, n)) => {
                num_poles += 1;
                acc *= barnes_residue(cc.beta(), m, n, prec)?;
            }
            Err(e) => return Err(e),
        }
    }
    for z in &den_args {
        match gamma_beta(cc, z) {
            Ok(v) => acc /= v,
            Err(Error::DoubleGammaPole(_, m, n)) => {
                den_poles += 1;
                acc /= barnes_residue(cc.beta(), m, n, prec)?;
            }
            Err(e) => return Err(e),
        }
    }
    match num_poles.cmp(&den_poles) {
        std::cmp::Ordering::Less => Ok(Complex::new(prec)),
        std::cmp::Ordering::Equal => Ok(acc),
        std::cmp::Ordering::Greater => Err(Error::PoleCollision {
            formula: "c factor numerator",
            arg: p.to_string(),
        }),
    }
}

/// `b^{r,s} = -prod_{+-} Gamma_beta(beta +- 2P_{(r,s)})
///  / [P_{(r,s)} Gamma_beta(beta + 2P_{(r,-s)}) Res_{beta - 2P_{(r,-s)}} Gamma_beta]`
/// for integer `r, s >= 1`.
pub fn b_factor(cc: &CentralCharge, r: u32, s: u32) -> Result<Complex> {
    let prec = cc.prec();
    let rr = rint(r as i64);
    let ss = rint(s as i64);
    let p_rs = cc.momentum(&rr, &ss);
    let p_rms = cc.momentum(&rr, &(-&ss));
    let two_p = Complex::with_val(prec, &p_rs * &Complex::with_val(prec, 2));
    let num = gamma_product(
        cc,
        &[
            Complex::with_val(prec, cc.beta() + &two_p),
            Complex::with_val(prec, cc.beta() - &two_p),
        ],
        "b factor numerator",
    )?
    .expect("numerator poles error out");
    let reg = gamma_beta(
        cc,
        &Complex::with_val(prec, cc.beta() + &(p_rms.clone() * 2u32)),
    )?;
    // beta - 2 P_{(r,-s)} = -(r-1) beta - s / beta.
    let res = barnes_residue(cc.beta(), (r - 1) as u64, s as u64, prec)?;
    Ok(-num / (Complex::with_val(prec, &p_rs * &reg) * res))
}

/// Torus block residue `R^torus_{r,s} = c^{2r,2s}(P1) / b^{r,s}`, with `P1`
/// the relevant (left or right) external momentum.
pub fn residue_torus(cc: &CentralCharge, p1: &Complex, r: u32, s: u32) -> Result<Complex> {
    let c = c_factor(cc, &rint(2 * r as i64), &rint(2 * s as i64), p1)?;
    if c.is_zero() {
        return Ok(c);
    }
    Ok(c / b_factor(cc, r, s)?)
}

/// Sphere s-channel block residue
/// `R^(s)_{r,s} = prod_{+-} c^{r,s}(P1 +- P2) c^{r,s}(P3 +- P4) / b^{r,s}`.
pub fn residue_sphere_s(
    cc: &CentralCharge,
    p: &[Complex; 4],
    r: u32,
    s: u32,
) -> Result<Complex> {
    let prec = cc.prec();
    let rr = rint(r as i64);
    let ss = rint(s as i64);
    let mut acc = Complex::with_val(prec, 1);
    for (a, b) in [(0usize, 1usize), (2, 3)] {
        for sgn in [1i64, -1] {
            let arg = Complex::with_val(prec, &p[a] + &(Complex::with_val(prec, &p[b] * &Complex::with_val(prec, sgn))));
            let c = c_factor(cc, &rr, &ss, &arg)?;
            if c.is_zero() {
                return Ok(Complex::new(prec));
            }
            acc *= c;
        }
    }
    Ok(acc / b_factor(cc, r, s)?)
}

// ---- Theta, rho, kappa --------------------------------------------------

/// `Theta_1^{r,s} = (-)^{r1 s + s + 1}
///  prod_{j = (r1+1)/2 - r}^{r - (r1+1)/2} 2 cos(pi (j beta^2 - s1/2))`,
/// a product of `2r - r1` factors in unit steps of `j` (empty when
/// `2r <= r1`).
pub fn theta1(cc: &CentralCharge, r1: i64, s1: &BigRational, r: i64, s: i64) -> Complex {
    let half_s1 = Complex::with_val(
        cc.prec(),
        rational_to_float(&(s1 / rint(2)), cc.prec()),
    );
    theta1_with(cc, r1, &half_s1, r, s)
}

/// `Theta_1` for an external given as `&Field`; diagonal externals enter
/// through the complex read-off `s1 = -2 beta P1` (and `r1 = 0`).
pub fn theta1_field(cc: &CentralCharge, external: &Field, r: i64, s: i64) -> Result<Complex> {
    let (r1, s1) = external.kac_labels(cc);
    let r1 = require_integer(&r1, "Theta_1 external index")?;
    let half_s1 = Complex::with_val(cc.prec(), &s1 / &Complex::with_val(cc.prec(), 2));
    Ok(theta1_with(cc, r1, &half_s1, r, s))
}

fn theta1_with(cc: &CentralCharge, r1: i64, half_s1: &Complex, r: i64, s: i64) -> Complex {
    let prec = cc.prec();
    let b2 = cc.beta().clone().square();
    let mut acc = Complex::with_val(prec, 1);
    let count = 2 * r - r1;
    for k in 0..count.max(0) {
        // j = (r1+1)/2 - r + k.
        let j = rat(r1 + 1, 2) - rint(r) + rint(k);
        let jf = Complex::with_val(prec, rational_to_float(&j, prec));
        let th = Complex::with_val(prec, (Complex::with_val(prec, &jf * &b2) - half_s1) * pi(prec));
        acc *= th.cos() * 2u32;
    }
    if (r1 * s + s + 1).rem_euclid(2) != 0 {
        acc = -acc;
    }
    acc
}

/// `rho^{r,s}_{1,2}` of two external fields with Kac data
/// `(r1, s1), (r2, s2)` (second indices may be complex):
/// sign `(-)^{s min(r,|r1-r2|) [r1<r2]}` times
/// `prod_{+-} prod_{j} 2 cos(pi (j beta^2 + (s - s1 -+ s2)/2))` with `j`
/// running symmetrically in unit steps with `r - |r1 +- r2|` factors.
pub fn rho(
    cc: &CentralCharge,
    r: i64,
    s: i64,
    r1: &BigRational,
    s1: &Complex,
    r2: &BigRational,
    s2: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    let b2 = cc.beta().clone().square();
    let mut acc = Complex::with_val(prec, 1);
    for pm in [1i64, -1] {
        let a = (r1 + &(r2 * rint(pm))).abs();
        // (s - s1 -+ s2)/2 pairs the upper sign of |r1 +- r2| with -s2.
        let half_shift = (Complex::with_val(prec, s - s1)
            - Complex::with_val(prec, s2 * &Complex::with_val(prec, pm)))
            / 2u32;
        let count = rint(r) - &a;
        if count <= rint(0) {
            continue;
        }
        let lo = -(rint(r) - rint(1) - &a) / rint(2);
        let count = require_integer(&count, "rho factor count")?;
        for k in 0..count {
            let j = &lo + rint(k);
            let jf = Complex::with_val(prec, rational_to_float(&j, prec));
            let th = Complex::with_val(
                prec,
                (Complex::with_val(prec, &jf * &b2) + &half_shift) * pi(prec),
            );
            acc *= th.cos() * 2u32;
        }
    }
    if r1 < r2 {
        let m = std::cmp::min(rint(r), (r1 - r2).abs());
        let e = require_integer(&(m * rint(s)), "rho sign")?;
        if parity_sign(e) < 0 {
            acc = -acc;
        }
    }
    Ok(acc)
}

/// Numeric `kappa_{r,s}`:
/// `kappa_{(0,s)} = 1/(2 sin^2 pi s)`, `kappa_{(1/2,s)} = 2`, and for
/// `r >= 1` the sine product
/// `2^{2 floor(r+1/2) - 1} / sin(pi(r - floor(r) + s))
///  prod_{j=1-r}^{r-1} sin(pi(beta^2 j + s))`.
pub fn kappa_numeric(cc: &CentralCharge, r: &BigRational, s: &BigRational) -> Result<Complex> {
    let prec = cc.prec();
    if !(r * rint(2)).is_integer() || r.is_negative() {
        return Err(Error::Domain {
            what: "kappa first index",
            detail: format!("r = {r} not in (1/2) N"),
        });
    }
    let sf = rational_to_float(s, prec);
    if r.is_zero() {
        if s.is_integer() {
            return Err(Error::Domain {
                what: "kappa denominator",
                detail: format!("sin(pi s) = 0 at s = {s}"),
            });
        }
        let sp = Float::with_val(prec, &sf * &pi(prec)).sin();
        return Ok(Complex::with_val(prec, sp.square() * 2u32).recip());
    }
    if r == &rat(1, 2) {
        return Ok(Complex::with_val(prec, 2));
    }
    let b2 = cc.beta().clone().square();
    let frac = r - r.floor();
    // When r - floor(r) + s is an integer the 1/sin prefactor diverges. For
    // integer (r, s) the j = 0 sine in the product vanishes identically the
    // same way, so the pair cancels exactly; otherwise kappa has a pole.
    let denom_zero = (&frac + s).is_integer();
    if denom_zero && !(r.is_integer() && s.is_integer()) {
        return Err(Error::Domain {
            what: "kappa denominator",
            detail: format!("sin(pi(r - floor(r) + s)) = 0 at (r, s) = ({r}, {s})"),
        });
    }
    let e = require_integer(&((r + rat(1, 2)).floor() * rint(2) - rint(1)), "kappa power")?;
    let mut acc = Complex::with_val(prec, Float::with_val(prec, 1) << e as u32);
    if !denom_zero {
        acc /= Float::with_val(prec, rational_to_float(&(&frac + s), prec) * pi(prec)).sin();
    }
    // j = 1 - r, 2 - r, ..., r - 1.
    let count = require_integer(&(r * rint(2) - rint(1)), "kappa factor count")?;
    for k in 0..count {
        let j = rint(1) - r + rint(k);
        if denom_zero && j.is_zero() {
            continue; // cancelled against the 1/sin prefactor
        }
        let jf = Complex::with_val(prec, rational_to_float(&j, prec));
        let th = Complex::with_val(
            prec,
            (Complex::with_val(prec, &jf * &b2) + &Complex::with_val(prec, &sf)) * pi(prec),
        );
        acc *= th.sin();
    }
    Ok(acc)
}

/// Exact `2 cos(2 pi s)` for rational `s`, as a quadratic-extension element.
/// Supported denominators: 1, 2, 3, 4, 6 (rational), 5, 10 (sqrt5),
/// 12 (sqrt3).
pub fn cos2pi_quad(s: &BigRational) -> Result<QuadExt> {
    let t = s - s.floor();
    let q = t.denom().to_u32().ok_or(Error::Domain {
        what: "exact cosine",
        detail: "denominator overflow".into(),
    })?;
    let p = t.numer().to_u32().unwrap_or(0);
    let ratq = |v: i64, den: i64| Ok(QuadExt::from_rational(rat(v, den)));
    match q {
        1 => ratq(2, 1),
        2 => ratq(-2, 1),
        3 => ratq(-1, 1),
        4 => ratq(0, 1),
        6 => ratq(1, 1),
        5 => {
            // 2 cos(2 pi/5) = (-1+sqrt5)/2, 2 cos(4 pi/5) = -(1+sqrt5)/2.
            if p % 5 == 1 || p % 5 == 4 {
                QuadExt::new(rat(-1, 2), rat(1, 2), 5)
            } else {
                QuadExt::new(rat(-1, 2), rat(-1, 2), 5)
            }
        }
        10 => {
            // 2 cos(pi/5) = (1+sqrt5)/2, 2 cos(3 pi/5) = (1-sqrt5)/2.
            if p % 10 == 1 || p % 10 == 9 {
                QuadExt::new(rat(1, 2), rat(1, 2), 5)
            } else {
                QuadExt::new(rat(1, 2), rat(-1, 2), 5)
            }
        }
        12 => {
            // 2 cos(pi/6) = sqrt3, 2 cos(5 pi/6) = -sqrt3.
            if p % 12 == 1 || p % 12 == 11 {
                QuadExt::sqrt_d(3)
            } else {
                QuadExt::new(rat(0, 1), rat(-1, 1), 3)
            }
        }
        other => Err(Error::Domain {
            what: "exact cosine",
            detail: format!("2 cos(2 pi p/{other}) outside supported extensions"),
        }),
    }
}

/// Chebyshev `U_j` in the `2 cos` normalization (`U_j(2 cos t) = 2 cos(j t)`)
/// evaluated at a polynomial argument.
fn cheb_u_at(j: u32, x: &MultiPoly) -> MultiPoly {
    let mut prev = MultiPoly::constant_rat(rint(2));
    if j == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..j {
        let next = x.mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Exact polynomial form of `kappa_{r,s}` in the loop weight `n`:
/// `r in N*`: `2 prod_{j=1}^{r-1} (U_j(n^2-2) - 2 cos 2 pi s)`;
/// `r in N + 3/2`: `(2 (-)^{r-1/2} / cos pi s)
///   prod_{odd j=1}^{2r-2} (U_j(n) + 2 cos 2 pi s)`;
/// `kappa_{(1/2,s)} = 2`. The `r = 0` case is not polynomial.
pub fn kappa_poly(r: &BigRational, s: &BigRational) -> Result<MultiPoly> {
    if r == &rat(1, 2) {
        return Ok(MultiPoly::constant_rat(rint(2)));
    }
    let c2 = MultiPoly::constant(cos2pi_quad(s)?);
    let n = MultiPoly::var(Var::N);
    if r.is_integer() && r.is_positive() {
        let ri = require_integer(r, "kappa poly")?;
        let x = n.mul(&n).sub(&MultiPoly::constant_rat(rint(2)));
        let mut acc = MultiPoly::constant_rat(rint(2));
        for j in 1..ri {
            acc = acc.mul(&cheb_u_at(j as u32, &x).sub(&c2));
        }
        return Ok(acc);
    }
    if (r - rat(3, 2)).is_integer() && r >= &rat(3, 2) {
        // cos(pi s) = (2 cos(2 pi (s/2)))/2 must stay in the extension.
        let half_cos = cos2pi_quad(&(s / rint(2)))?;
        if half_cos.is_zero() {
            return Err(Error::Domain {
                what: "kappa poly",
                detail: format!("cos(pi s) = 0 at s = {s}"),
            });
        }
        let pref = QuadExt::from_rational(rint(4))
            .try_mul(&half_cos.inv())
            .expect("same extension");
        let top = require_integer(&(r * rint(2) - rint(2)), "kappa poly range")?;
        let mut acc = MultiPoly::constant(pref);
        if !(r - rat(1, 2)).is_integer() {
            unreachable!();
        }
        if require_integer(&(r - rat(1, 2)), "kappa poly sign")? % 2 != 0 {
            acc = acc.neg();
        }
        let mut j = 1i64;
        while j <= top {
            acc = acc.mul(&cheb_u_at(j as u32, &n).add(&c2));
            j += 2;
        }
        return Ok(acc);
    }
    Err(Error::Domain {
        what: "kappa poly",
        detail: format!("r = {r} not in {{1/2}} + (1/2) N"),
    })
}

/// Sphere-torus ratio of residue denominators,
/// `kappa'_{2r,s} / kappa_{r,s} = (sin pi(r - floor r + s) / sin pi s)
///  4^{ceil(r - 1/2)} prod_{j=1/2-r}^{r-1/2} sin(pi(beta^2 j + s))`,
/// expressed in torus variables.
pub fn kappa_ratio_sphere(
    cc: &CentralCharge,
    r: &BigRational,
    s: &BigRational,
) -> Result<Complex> {
    let prec = cc.prec();
    let b2 = cc.beta().clone().square();
    let sf = rational_to_float(s, prec);
    let frac = r - r.floor();
    // Exact cancellation bookkeeping: sin(pi s) in the denominator vanishes
    // for integer s. It cancels against sin(pi(frac + s)) when r is an
    // integer, or against the j = 0 product sine when r is half-odd.
    let den_zero = s.is_integer();
    let num1_zero = (&frac + s).is_integer();
    let half_odd_r = (r - rat(1, 2)).is_integer();
    let prod_zero = half_odd_r && den_zero;
    if (num1_zero as i32 + prod_zero as i32) > den_zero as i32 {
        return Ok(Complex::new(prec));
    }
    if (num1_zero as i32 + prod_zero as i32) < den_zero as i32 {
        return Err(Error::Domain {
            what: "kappa ratio",
            detail: format!("sin(pi s) = 0 at s = {s}"),
        });
    }
    let e = require_integer(&(r - rat(1, 2)).ceil(), "kappa ratio power")?;
    let mut acc = Complex::with_val(prec, Float::with_val(prec, 1) << (2 * e) as u32);
    if !den_zero {
        acc /= Float::with_val(prec, &sf * &pi(prec)).sin();
    }
    if !num1_zero {
        acc *= Float::with_val(prec, rational_to_float(&(&frac + s), prec) * pi(prec)).sin();
    }
    let count = require_integer(&(r * rint(2)), "kappa ratio count")?;
    for k in 0..count {
        let j = rat(1, 2) - r + rint(k);
        if prod_zero && j.is_zero() {
            continue; // cancelled against 1/sin(pi s)
        }
        let jf = Complex::with_val(prec, rational_to_float(&j, prec));
        let th = Complex::with_val(
            prec,
            (Complex::with_val(prec, &jf * &b2) + &Complex::with_val(prec, &sf)) * pi(prec),
        );
        acc *= th.sin();
    }
    Ok(acc)
}

// ---- Ansatz assembly ----------------------------------------------------

/// Assembles the torus structure constant
/// `D_{(r,s)} = (Dhat_{(r,s)} / kappa_{r,s})
///   (d/r + [r in N*, s in Z, w given] Theta_1^{r,s}/(w - w_{(r,s)}))`.
///
/// `w` is the channel loop weight of the diagonal tower; pass `None` for
/// solutions without diagonal fields (no pole term).
pub fn assemble_torus_d(
    cc: &CentralCharge,
    r1s1: &KacIndices,
    rs: &KacIndices,
    d_value: &Complex,
    w: Option<&Complex>,
) -> Result<Complex> {
    let prec = cc.prec();
    if !rs.r.is_positive() {
        return Err(Error::Domain {
            what: "torus ansatz",
            detail: "diagonal channel fields use the reference constant directly".into(),
        });
    }
    let dhat = dhat_nondiagonal(cc, r1s1, rs)?;
    let kap = kappa_numeric(cc, &rs.r, &rs.s)?;
    let rf = Complex::with_val(prec, rational_to_float(&rs.r, prec));
    let mut inner = Complex::with_val(prec, d_value / &rf);
    if rs.r.is_integer() && rs.s.is_integer() {
        if let Some(w) = w {
            let r_i = require_integer(&rs.r, "ansatz pole")?;
            let s_i = require_integer(&rs.s, "ansatz pole")?;
            let r1_i = require_integer(&r1s1.r, "ansatz pole")?;
            let th = theta1(cc, r1_i, &r1s1.s, r_i, s_i);
            let w_pole = crate::kinematics::loop_weight_w_rs(cc, r_i, s_i);
            let dw = Complex::with_val(prec, w - &w_pole);
            if dw.is_zero() {
                return Err(Error::WPole(w_pole.to_string()));
            }
            inner += th / dw;
        }
    }
    Ok(Complex::with_val(prec, dhat / kap) * inner)
}

/// Assembles the sphere structure constant for a combinatorial map of
/// signature `sigma`:
/// `D^M_{(r,s)} = (Dhat^sphere/kappa_{r,s})
///   (d - [sigma = 0, s in Z] (-)^{(r+1)s} rho_{1,2} rho_{4,3}/(w - w_{(r,s)}))`
/// for the `<V0 V1 V0 V0>` family.
pub fn assemble_sphere_d(
    cc: &CentralCharge,
    v1: &Field,
    rs: &KacIndices,
    d_value: &Complex,
    w: Option<&Complex>,
) -> Result<Complex> {
    let prec = cc.prec();
    let dhat = dhat_sphere_family(cc, v1, rs)?;
    let kap = kappa_numeric(cc, &rs.r, &rs.s)?;
    let mut inner = d_value.clone();
    if rs.s.is_integer() {
        if let Some(w) = w {
            let r_i = require_integer(&rs.r, "sphere ansatz pole")?;
            let s_i = require_integer(&rs.s, "sphere ansatz pole")?;
            let half = Complex::with_val(prec, rational_to_float(&rat(1, 2), prec));
            let (r1c, s1c) = match &v1.indices {
                Some(idx) => (
                    idx.r.clone(),
                    Complex::with_val(prec, rational_to_float(&idx.s, prec)),
                ),
                None => {
                    let f = Field::diagonal_p(v1.p.clone());
                    (rint(0), f.diagonal_s_value(cc))
                }
            };
            let rho12 = rho(cc, r_i, s_i, &rint(0), &half, &r1c, &s1c)?;
            let rho43 = rho(cc, r_i, s_i, &rint(0), &half, &rint(0), &half)?;
            let w_pole = crate::kinematics::loop_weight_w_rs(cc, r_i, s_i);
            let dw = Complex::with_val(prec, w - &w_pole);
            if dw.is_zero() {
                return Err(Error::WPole(w_pole.to_string()));
            }
            let mut pole = Complex::with_val(prec, rho12 * rho43) / dw;
            if ((r_i + 1) * s_i).rem_euclid(2) != 0 {
                pole = -pole;
            }
            inner -= pole;
        }
    }
    Ok(Complex::with_val(prec, dhat / kap) * inner)
}
