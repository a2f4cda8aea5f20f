//! Central-charge parametrization, Kac momenta, field types, loop weights,
//! and spectrum builders.
//!
//! Conventions: `c = 13 - 6 beta^2 - 6 beta^{-2}`, `q0 = (beta + 1/beta)/2`,
//! `P_{(r,s)} = (beta r - s/beta)/2`, `Delta = (c-1)/24 + P^2`. Non-diagonal
//! fields carry `(P, Pbar) = (P_{(r,s)}, P_{(-r,s)})` and spin `r s`; the
//! contractible loop weight is `n = -2 cos(pi beta^2)` and a diagonal field
//! of momentum `P` gives non-contractible loops the weight
//! `w(P) = 2 cos(2 pi beta P)`.

use crate::algebra::{floor_i64, rat, rational_to_float, rint};
use crate::error::{Error, Result};
use crate::numerics::pi;
use num::{BigRational, Signed, Zero};
use rug::Complex;

/// Central charge data, stored through the parameter `beta` (`Re beta > 0`).
#[derive(Clone, Debug)]
pub struct CentralCharge {
    beta: Complex,
}

impl CentralCharge {
    /// Wraps a parameter with `Re beta > 0` (the double-Gamma domain).
    pub fn new(beta: Complex) -> Result<Self> {
        if !(*beta.real() > 0u32) {
            return Err(Error::Domain {
                what: "central charge parameter",
                detail: format!("Re(beta) = {} <= 0", beta.real().to_f64()),
            });
        }
        Ok(Self { beta })
    }

    /// Working precision inherited from `beta`.
    pub fn prec(&self) -> u32 {
        self.beta.prec().0
    }

    pub fn beta(&self) -> &Complex {
        &self.beta
    }

    pub fn beta_inv(&self) -> Complex {
        self.beta.clone().recip()
    }

    /// `c = 13 - 6 beta^2 - 6 beta^{-2}`.
    pub fn c(&self) -> Complex {
        let prec = self.prec();
        let b2 = self.beta.clone().square();
        let b2i = b2.clone().recip();
        Complex::with_val(prec, 13) - (b2 + b2i) * 6u32
    }

    /// `q0 = (beta + 1/beta)/2`.
    pub fn q0(&self) -> Complex {
        let prec = self.prec();
        Complex::with_val(prec, &self.beta + &self.beta_inv()) / 2u32
    }

    /// Kac momentum `P_{(r,s)} = (beta r - s/beta)/2` for exact indices.
    pub fn momentum(&self, r: &BigRational, s: &BigRational) -> Complex {
        let prec = self.prec();
        let rf = rational_to_float(r, prec);
        let sf = rational_to_float(s, prec);
        (Complex::with_val(prec, &self.beta * &rf) - self.beta_inv() * sf) / 2u32
    }

    /// Kac momentum for complex indices (diagonal towers use complex `s`).
    pub fn momentum_c(&self, r: &Complex, s: &Complex) -> Complex {
        let prec = self.prec();
        (Complex::with_val(prec, &self.beta * r) - self.beta_inv() * s) / 2u32
    }

    /// Conformal weight `Delta = (c-1)/24 + P^2`.
    pub fn delta_of_p(&self, p: &Complex) -> Complex {
        let prec = self.prec();
        (self.c() - 1u32) / 24u32 + Complex::with_val(prec, p * p)
    }

    /// `Delta_{(r,s)}` for exact Kac indices.
    pub fn delta_rs(&self, r: &BigRational, s: &BigRational) -> Complex {
        self.delta_of_p(&self.momentum(r, s))
    }
}

/// Exact Kac indices `(r, s)`; the spin of a non-diagonal field is `r s`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct KacIndices {
    pub r: BigRational,
    pub s: BigRational,
}

impl KacIndices {
    pub fn new(r: BigRational, s: BigRational) -> Self {
        Self { r, s }
    }

    pub fn from_i64(r: i64, s: i64) -> Self {
        Self::new(rint(r), rint(s))
    }

    /// Spin `r s`.
    pub fn spin(&self) -> BigRational {
        &self.r * &self.s
    }

    /// Non-diagonal admissibility: `r` a positive half-integer, `r s` an
    /// integer (i.e. `s` in `(1/r) Z`).
    pub fn is_valid_nondiagonal(&self) -> bool {
        self.r.is_positive() && (&self.r * rint(2)).is_integer() && self.spin().is_integer()
    }
}

/// What kind of representation a field transforms in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// `V^d_{<1,s>}`: degenerate, diagonal, with vanishing singular vector.
    Degenerate,
    /// `V_P`: diagonal, `Pbar = P`.
    Diagonal,
    /// `V_{(r,s)}`: `(P, Pbar) = (P_{(r,s)}, P_{(-r,s)})`, spin `r s`.
    NonDiagonal,
}

/// A primary field, described by its left and right momenta.
#[derive(Clone, Debug)]
pub struct Field {
    pub kind: FieldKind,
    pub p: Complex,
    pub p_bar: Complex,
    pub indices: Option<KacIndices>,
}

impl Field {
    /// Diagonal field of given momentum.
    pub fn diagonal_p(p: Complex) -> Self {
        Self {
            kind: FieldKind::Diagonal,
            p_bar: p.clone(),
            p,
            indices: None,
        }
    }

    /// Diagonal field `V_{(0,s)} = V_{P_{(0,s)}}` for complex `s`.
    pub fn diagonal_s(cc: &CentralCharge, s: &Complex) -> Self {
        let zero = Complex::new(cc.prec());
        Self::diagonal_p(cc.momentum_c(&zero, s))
    }

    /// Non-diagonal field `V_{(r,s)}`.
    pub fn non_diagonal(cc: &CentralCharge, indices: KacIndices) -> Result<Self> {
        if !indices.is_valid_nondiagonal() {
            return Err(Error::Domain {
                what: "non-diagonal Kac indices",
                detail: format!("(r, s) = ({}, {})", indices.r, indices.s),
            });
        }
        let p = cc.momentum(&indices.r, &indices.s);
        let p_bar = cc.momentum(&(-&indices.r), &indices.s);
        Ok(Self {
            kind: FieldKind::NonDiagonal,
            p,
            p_bar,
            indices: Some(indices),
        })
    }

    /// Degenerate field `V^d_{<1,s>}` (diagonal, momentum `P_{(1,s)}`).
    pub fn degenerate(cc: &CentralCharge, s: u32) -> Self {
        let idx = KacIndices::from_i64(1, s as i64);
        let p = cc.momentum(&idx.r, &idx.s);
        Self {
            kind: FieldKind::Degenerate,
            p_bar: p.clone(),
            p,
            indices: Some(idx),
        }
    }

    pub fn delta(&self, cc: &CentralCharge) -> Complex {
        cc.delta_of_p(&self.p)
    }

    pub fn delta_bar(&self, cc: &CentralCharge) -> Complex {
        cc.delta_of_p(&self.p_bar)
    }

    /// Spin `r s` (so that `Delta_bar - Delta = r s` with the momentum
    /// assignment `(P_{(r,s)}, P_{(-r,s)})`); zero for diagonal fields.
    pub fn spin(&self) -> BigRational {
        match self.kind {
            FieldKind::NonDiagonal => self.indices.as_ref().expect("indices").spin(),
            _ => rint(0),
        }
    }

    /// The `s`-value of a diagonal field read back from its momentum,
    /// via `P_{(0,s)} = -s/(2 beta)`.
    pub fn diagonal_s_value(&self, cc: &CentralCharge) -> Complex {
        let prec = cc.prec();
        -(Complex::with_val(prec, &self.p * cc.beta()) * 2u32)
    }

    /// Kac labels `(r, s)` with an exact rational first index and a possibly
    /// complex second index: indexed fields report their indices, diagonal
    /// fields report `(0, -2 beta P)`.
    pub fn kac_labels(&self, cc: &CentralCharge) -> (BigRational, Complex) {
        match &self.indices {
            Some(idx) => (
                idx.r.clone(),
                Complex::with_val(cc.prec(), rational_to_float(&idx.s, cc.prec())),
            ),
            None => (rint(0), self.diagonal_s_value(cc)),
        }
    }
}

/// A truncated channel spectrum.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub entries: Vec<Field>,
    pub r_max: BigRational,
    pub s_max: BigRational,
    /// Offset of the diagonal tower `s in s0 + 2Z` when present.
    pub s0: Option<Complex>,
}

/// The diagonal tower `{V_{P_{(0,s)}} : s in s0 + 2Z, |s| <= s_max}`,
/// ordered by the tower integer.
fn diagonal_tower(cc: &CentralCharge, s0: &Complex, s_max: &BigRational) -> Vec<Field> {
    let prec = cc.prec();
    let s_max_f = rational_to_float(s_max, prec);
    let bound = ((s_max_f.clone() + s0.clone().abs().real()) / 2u32).to_f64();
    let k_lim = bound.floor() as i64 + 1;
    let mut out = Vec::new();
    for k in -k_lim..=k_lim {
        let s = Complex::with_val(prec, s0 + &Complex::with_val(prec, 2 * k));
        if *s.clone().abs().real() <= s_max_f {
            out.push(Field::diagonal_s(cc, &s));
        }
    }
    out
}

fn check_truncation(sigma: &BigRational, r_max: &BigRational) -> Result<()> {
    if sigma.is_negative() {
        return Err(Error::Domain {
            what: "spectrum signature",
            detail: format!("sigma = {sigma} < 0"),
        });
    }
    if r_max < sigma {
        return Err(Error::Truncation {
            r_max: r_max.clone(),
            sigma: sigma.clone(),
        });
    }
    Ok(())
}

/// Non-diagonal fields at fixed `r > 0`: `s = j/r`, `|s| <= s_max`.
fn row_at_r(cc: &CentralCharge, r: &BigRational, s_max: &BigRational) -> Result<Vec<Field>> {
    let j_max = floor_i64(&(r * s_max));
    let mut out = Vec::new();
    for j in -j_max..=j_max {
        let s = rint(j) / r;
        out.push(Field::non_diagonal(cc, KacIndices::new(r.clone(), s))?);
    }
    Ok(out)
}

/// Torus channel spectrum `S_sigma`: `r in sigma + (1/2) N`, `s in (1/r) Z`,
/// truncated to `r <= r_max`, `|s| <= s_max`. At `sigma = 0` the `r = 0`
/// term is the diagonal tower `s in s0 + 2Z` (skipped when `s0` is `None`).
pub fn build_torus_spectrum(
    cc: &CentralCharge,
    sigma: &BigRational,
    r_max: &BigRational,
    s_max: &BigRational,
    s0: Option<&Complex>,
) -> Result<Spectrum> {
    check_truncation(sigma, r_max)?;
    if !(sigma * rint(2)).is_integer() {
        return Err(Error::Domain {
            what: "torus signature",
            detail: format!("sigma = {sigma} not a half-integer"),
        });
    }
    let mut entries = Vec::new();
    let mut r = sigma.clone();
    let half = rat(1, 2);
    while &r <= r_max {
        if r.is_zero() {
            if let Some(s0) = s0 {
                entries.extend(diagonal_tower(cc, s0, s_max));
            }
        } else {
            entries.extend(row_at_r(cc, &r, s_max)?);
        }
        r += &half;
    }
    Ok(Spectrum {
        entries,
        r_max: r_max.clone(),
        s_max: s_max.clone(),
        s0: s0.cloned(),
    })
}

/// Sphere channel spectrum `S*_sigma`: integer first index `r in sigma + N`,
/// otherwise as on the torus. With `even_spin_only` set, keeps `r s in 2Z`
/// (the spectrum written `S'_sigma`).
pub fn build_sphere_spectrum(
    cc: &CentralCharge,
    sigma: &BigRational,
    r_max: &BigRational,
    s_max: &BigRational,
    s0: Option<&Complex>,
    even_spin_only: bool,
) -> Result<Spectrum> {
    check_truncation(sigma, r_max)?;
    if !sigma.is_integer() {
        return Err(Error::Domain {
            what: "sphere signature",
            detail: format!("sigma = {sigma} not an integer"),
        });
    }
    let mut entries = Vec::new();
    let mut r = sigma.clone();
    let one = rint(1);
    while &r <= r_max {
        if r.is_zero() {
            if let Some(s0) = s0 {
                entries.extend(diagonal_tower(cc, s0, s_max));
            }
        } else {
            let row = row_at_r(cc, &r, s_max)?;
            entries.extend(row.into_iter().filter(|f| {
                !even_spin_only || (f.spin() / rint(2)).is_integer()
            }));
        }
        r += &one;
    }
    Ok(Spectrum {
        entries,
        r_max: r_max.clone(),
        s_max: s_max.clone(),
        s0: s0.cloned(),
    })
}

/// Contractible loop weight `n = -2 cos(pi beta^2)`.
pub fn loop_weight_n(cc: &CentralCharge) -> Complex {
    let prec = cc.prec();
    let th = Complex::with_val(prec, cc.beta().clone().square() * pi(prec));
    -(th.cos() * 2u32)
}

/// Non-contractible loop weight `w(P) = 2 cos(2 pi beta P)` of a diagonal
/// field of momentum `P`.
pub fn loop_weight_w(cc: &CentralCharge, p: &Complex) -> Complex {
    let prec = cc.prec();
    let th = Complex::with_val(prec, cc.beta() * p) * pi(prec) * 2u32;
    th.cos() * 2u32
}

/// Loop weight of `V_{(r,s)}` with integer indices:
/// `w_{(r,s)} = (-1)^s 2 cos(pi beta^2 r)`.
pub fn loop_weight_w_rs(cc: &CentralCharge, r: i64, s: i64) -> Complex {
    let prec = cc.prec();
    let th = Complex::with_val(prec, cc.beta().clone().square() * pi(prec)) * r;
    let v = th.cos() * 2u32;
    if s.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// Momentum with `w(P) = w`: `P = (arccos(w/2) + 2 pi k)/(2 pi beta)` with
/// principal `arccos` and branch index `k`. Any branch round-trips through
/// `loop_weight_w`.
pub fn p_from_weight(cc: &CentralCharge, w: &Complex, branch: i64) -> Complex {
    let prec = cc.prec();
    let a = (Complex::with_val(prec, w) / 2u32).acos();
    let shifted = a + Complex::with_val(prec, pi(prec)) * 2u32 * branch;
    shifted / (Complex::with_val(prec, cc.beta() * &pi(prec)) * 2u32)
}

/// Diagonal-tower offset with `2 cos(pi s) = w`: `s = arccos(w/2)/pi + 2 k`.
/// This is the `s`-value of `P_{(0,s)} = p_from_weight(w, .)` since
/// `w(P_{(0,s)}) = 2 cos(pi s)`.
pub fn s_from_weight(w: &Complex, prec: u32, branch: i64) -> Complex {
    let a = (Complex::with_val(prec, w) / 2u32).acos();
    a / pi(prec) + Complex::with_val(prec, 2 * branch)
}
