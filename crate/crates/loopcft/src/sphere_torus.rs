//! The dictionary between torus 1-point functions and sphere 4-point
//! functions of the form `<V'_0 V'_1 V'_0 V'_0>`.
//!
//! Parameter map (primes = sphere side): `beta' = beta/sqrt2`, nome
//! `q -> sqrt(q)` at fixed modulus `tau`, external `P_1 -> P_1/sqrt2` with
//! Kac indices `(r1, s1) -> (r1, s1/2)`, channel `P -> sqrt2 P` with indices
//! `(r, s) -> (2r, s)`; loop weights `n -> -sqrt(2-n)`,
//! `w_1 -> sqrt(w_1+2)`, `w -> w`; spins are halved for the external field
//! and doubled for the channel field.
//!
//! Block dictionary: `F^(x)_P(beta, P_1 | q^2) = k_x 16^{-2P^2} a(beta,P_1|q)
//! F^(x),sphere_{sqrt2 P}(beta/sqrt2, P_1/sqrt2 | q)` with the
//! channel-independent prefactor
//! `a = 1/(eta(q^2) A^sphere'(q))
//!    = z^{-1/(4 beta^2)} (1-z)^{1/2 - beta^2/8 - 1/(4 beta^2)}
//!      theta_2(q)^{2 Delta_1 + 1} / eta(q^2)`,
//! where `Delta_1` is the torus external dimension.  With principal branches
//! throughout, the eta identity `eta(-1/tau) = sqrt(-i tau) eta(tau)`
//! contributes `tau^{1/2}` on the torus side but `(-i tau)^{1/2}` on the
//! sphere side, leaving the constant `k_t = e^{i pi/4}`; the u-channel
//! additionally carries the sphere phase `(-)^{P_2^2+P_3^2}` with no torus
//! counterpart, so `k_u = e^{i pi/4} e^{-i pi (P_2^2+P_3^2)}`.  Both
//! constants are independent of `tau` and of the channel momentum, hence
//! harmless in crossing equations where channel constants absorb them.
//!
//! Solutions transfer through the reduced-constant sum
//! `d^M_{(r,s)} = (-)^{r1 floor(s) [2r < r1]} r (kappa_{r,s}/kappa'_{2r,s})
//!  mean_{M' in phi(M)} d'_{(2r,s)}^{M'}`.

use num::BigRational;
use rug::{Complex, Float};

use crate::algebra::{floor_i64, rat, rational_to_float, rint};
use crate::blocks::{sphere_a, BlockContext, Channel};
use crate::error::{Error, Result};
use crate::kinematics::{
    loop_weight_n, loop_weight_w, CentralCharge, Field, FieldKind, KacIndices,
};
use crate::numerics::{dedekind_eta, exp_2pi_i, pi, theta};
use crate::structure::kappa_ratio_sphere;

/// Which way a dictionary transform runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    TorusToSphere,
    SphereToTorus,
}

/// One side of the dictionary: geometry, external field, channel field, and
/// the derived loop weights and spins.
#[derive(Clone, Debug)]
pub struct SideParams {
    pub beta: Complex,
    pub modulus: Complex,
    pub nome: Complex,
    pub external_momentum: Complex,
    pub external_indices: (BigRational, BigRational),
    pub channel_momentum: Complex,
    pub channel_indices: (BigRational, BigRational),
    pub loop_weight: Complex,
    pub external_weight: Complex,
    pub channel_weight: Complex,
    pub external_spin: BigRational,
    pub channel_spin: BigRational,
}

/// Both sides of the dictionary for one parameter point.
#[derive(Clone, Debug)]
pub struct DictionaryEntry {
    pub torus: SideParams,
    pub sphere: SideParams,
}

/// Central charge with `beta' = beta / sqrt2`.
pub fn sphere_cc(cc: &CentralCharge) -> Result<CentralCharge> {
    let prec = cc.prec();
    let sqrt2 = Float::with_val(prec, 2).sqrt();
    CentralCharge::new(Complex::with_val(prec, cc.beta() / &sqrt2))
}

fn side_from_data(
    cc: &CentralCharge,
    surface_nome_half: bool,
    tau: &Complex,
    external_momentum: Complex,
    external_indices: (BigRational, BigRational),
    channel_momentum: Complex,
    channel_indices: (BigRational, BigRational),
) -> SideParams {
    let prec = cc.prec();
    let mult = if surface_nome_half {
        Complex::with_val(prec, 0.5)
    } else {
        Complex::with_val(prec, 1)
    };
    let nome = exp_2pi_i(tau, &mult);
    let external_weight = loop_weight_w(cc, &external_momentum);
    let channel_weight = loop_weight_w(cc, &channel_momentum);
    let external_spin = &external_indices.0 * &external_indices.1;
    let channel_spin = &channel_indices.0 * &channel_indices.1;
    SideParams {
        beta: cc.beta().clone(),
        modulus: tau.clone(),
        nome,
        external_momentum,
        external_indices,
        channel_momentum,
        channel_indices,
        loop_weight: loop_weight_n(cc),
        external_weight,
        channel_weight,
        external_spin,
        channel_spin,
    }
}

/// Build both sides of the dictionary from torus data.
pub fn entry_from_torus(
    cc: &CentralCharge,
    tau: &Complex,
    external: &KacIndices,
    channel: &KacIndices,
) -> Result<DictionaryEntry> {
    let p1 = cc.momentum(&external.r, &external.s);
    let p = cc.momentum(&channel.r, &channel.s);
    let torus = side_from_data(
        cc,
        false,
        tau,
        p1,
        (external.r.clone(), external.s.clone()),
        p,
        (channel.r.clone(), channel.s.clone()),
    );
    let sphere = transform(Direction::TorusToSphere, &torus)?;
    Ok(DictionaryEntry { torus, sphere })
}

/// Apply the dictionary to one side, producing the other.
pub fn transform(direction: Direction, side: &SideParams) -> Result<SideParams> {
    let prec = side.beta.prec().0;
    let sqrt2 = Float::with_val(prec, 2).sqrt();
    let (beta, p1, ei, p, ci) = match direction {
        Direction::TorusToSphere => (
            Complex::with_val(prec, &side.beta / &sqrt2),
            Complex::with_val(prec, &side.external_momentum / &sqrt2),
            (
                side.external_indices.0.clone(),
                &side.external_indices.1 / rint(2),
            ),
            Complex::with_val(prec, &side.channel_momentum * &sqrt2),
            (
                &side.channel_indices.0 * rint(2),
                side.channel_indices.1.clone(),
            ),
        ),
        Direction::SphereToTorus => (
            Complex::with_val(prec, &side.beta * &sqrt2),
            Complex::with_val(prec, &side.external_momentum * &sqrt2),
            (
                side.external_indices.0.clone(),
                &side.external_indices.1 * rint(2),
            ),
            Complex::with_val(prec, &side.channel_momentum / &sqrt2),
            (
                &side.channel_indices.0 / rint(2),
                side.channel_indices.1.clone(),
            ),
        ),
    };
    let cc = CentralCharge::new(beta)?;
    let half = direction == Direction::TorusToSphere;
    Ok(side_from_data(&cc, half, &side.modulus, p1, ei, p, ci))
}

/// The sphere correlator associated to a torus 1-point function: central
/// charge `beta/sqrt2` and externals `(V'_0, V'_1, V'_0, V'_0)` with
/// `V_0 = V_{(0,1/2)}`.
#[derive(Clone, Debug)]
pub struct SphereSetup {
    pub cc: CentralCharge,
    pub external_momenta: [Complex; 4],
    pub external_fields: [Field; 4],
}

/// Build the sphere-side correlator data for a torus external field.
pub fn sphere_setup(cc: &CentralCharge, external: &Field) -> Result<SphereSetup> {
    let prec = cc.prec();
    let ccs = sphere_cc(cc)?;
    let sqrt2 = Float::with_val(prec, 2).sqrt();
    let p0 = ccs.momentum(&rint(0), &rat(1, 2));
    let v0 = Field::diagonal_p(p0.clone());
    let v1 = match external.kind {
        FieldKind::NonDiagonal => {
            let idx = external.indices.as_ref().expect("indexed field");
            Field::non_diagonal(&ccs, KacIndices::new(idx.r.clone(), &idx.s / rint(2)))?
        }
        // Diagonal and degenerate externals have Pbar = P; the transformed
        // field is the diagonal one at the halved momentum.
        FieldKind::Diagonal | FieldKind::Degenerate => {
            Field::diagonal_p(Complex::with_val(prec, &external.p / &sqrt2))
        }
    };
    let momenta = [p0.clone(), v1.p.clone(), p0.clone(), p0];
    let fields = [v0.clone(), v1, v0.clone(), v0];
    Ok(SphereSetup {
        cc: ccs,
        external_momenta: momenta,
        external_fields: fields,
    })
}

/// Channel-independent prefactor of the block dictionary,
/// `a = 1 / (eta(tau) A^sphere'(e^{i pi tau}))`.
pub fn prefactor_a(cc: &CentralCharge, p1: &Complex, tau: &Complex) -> Result<Complex> {
    let prec = cc.prec();
    let ext = Field::diagonal_p(p1.clone());
    let setup = sphere_setup(cc, &ext)?;
    let half = Complex::with_val(prec, 0.5);
    let q = exp_2pi_i(tau, &half);
    let a = sphere_a(&setup.cc, &setup.external_momenta, &q)?;
    let eta = dedekind_eta(tau)?;
    Ok(Complex::with_val(prec, &a * &eta).recip())
}

/// The same prefactor from its theta-function closed form,
/// `z^{-1/(4 beta^2)} (1-z)^{1/2 - beta^2/8 - 1/(4 beta^2)}
///  theta_2(q)^{2 Delta_1 + 1} / eta(tau)` with `z = theta_2^4/theta_3^4`.
pub fn prefactor_a_closed(cc: &CentralCharge, p1: &Complex, tau: &Complex) -> Result<Complex> {
    let prec = cc.prec();
    let half = Complex::with_val(prec, 0.5);
    let q = exp_2pi_i(tau, &half);
    let t2 = theta(2, &q)?;
    let t3 = theta(3, &q)?;
    let t4 = theta(4, &q)?;
    let fourth = |t: &Complex| -> Complex {
        let sq = Complex::with_val(prec, t * t);
        Complex::with_val(prec, &sq * &sq)
    };
    let t3_4 = fourth(&t3);
    let z = Complex::with_val(prec, fourth(&t2) / &t3_4);
    let omz = Complex::with_val(prec, fourth(&t4) / &t3_4);
    let b2 = Complex::with_val(prec, cc.beta() * cc.beta());
    let b2i = Complex::with_val(prec, &cc.beta_inv() * &cc.beta_inv());
    let e_z = -Complex::with_val(prec, &b2i / 4u32);
    let mut e_omz = Complex::with_val(prec, 0.5);
    e_omz -= Complex::with_val(prec, &b2 / 8u32);
    e_omz -= Complex::with_val(prec, &b2i / 4u32);
    let d1 = cc.delta_of_p(p1);
    let mut e_t2 = Complex::with_val(prec, &d1 * 2u32);
    e_t2 += 1u32;
    let mut out = cpow(&z, &e_z)?;
    out *= cpow(&omz, &e_omz)?;
    out *= cpow(&t2, &e_t2)?;
    out /= dedekind_eta(tau)?;
    Ok(out)
}

fn cpow(base: &Complex, expo: &Complex) -> Result<Complex> {
    use rug::ops::Pow;
    if base.is_zero() {
        return Err(Error::Domain {
            what: "complex power",
            detail: "zero base".into(),
        });
    }
    let prec = base.prec().0;
    Ok(Complex::with_val(prec, base.pow(expo)))
}

/// Constant branch factor `k_x` of the block dictionary in channel `x`, for
/// the left-moving (`mirrored = false`) or right-moving sector.
pub fn channel_bookkeeping(
    cc: &CentralCharge,
    p1: &Complex,
    channel: Channel,
    mirrored: bool,
) -> Result<Complex> {
    let prec = cc.prec();
    if channel == Channel::S {
        return Ok(Complex::with_val(prec, 1));
    }
    let quarter = Complex::with_val(prec, (0, pi(prec))) / 4u32;
    let mut phase = quarter;
    if channel == Channel::U {
        // Sphere externals: P_2 = P_1/sqrt2, P_3 = P'_{(0,1/2)}.
        let setup = sphere_setup(cc, &Field::diagonal_p(p1.clone()))?;
        let p2 = &setup.external_momenta[1];
        let p3 = &setup.external_momenta[2];
        let mut x = Complex::with_val(prec, p2 * p2);
        x += Complex::with_val(prec, p3 * p3);
        x *= Complex::with_val(prec, (0, pi(prec)));
        phase -= x;
    }
    if mirrored {
        phase = -phase;
    }
    Ok(phase.exp())
}

/// Outcome of a block-dictionary check: series coefficients compared level
/// by level, and full blocks compared channel by channel.
#[derive(Clone, Debug)]
pub struct BlockRelationReport {
    /// max_k |h^sphere_{2k} - h^torus_k| (relative).
    pub coefficient_error: Float,
    /// max over odd j of |h^sphere_j| (absolute; must vanish).
    pub odd_coefficient_error: Float,
    /// Relative residual of `F^(x),torus = k_x 16^{-2P^2} a F^(x),sphere`
    /// for x = s, t, u.
    pub channel_residuals: [Float; 3],
}

impl BlockRelationReport {
    pub fn max_error(&self) -> Float {
        let mut out = self.coefficient_error.clone();
        if self.odd_coefficient_error > out {
            out = self.odd_coefficient_error.clone();
        }
        for r in &self.channel_residuals {
            if *r > out {
                out = r.clone();
            }
        }
        out
    }
}

/// Verify the block dictionary at one parameter point: the torus series of
/// order `N` in `q^2` against the sphere series of order `2N` in `q`, and
/// the full blocks in all three channels at modulus `tau`.
pub fn check_block_relation(
    cc: &CentralCharge,
    p1: &Complex,
    p: &Complex,
    tau: &Complex,
    order: usize,
) -> Result<BlockRelationReport> {
    let prec = cc.prec();
    let setup = sphere_setup(cc, &Field::diagonal_p(p1.clone()))?;
    let torus_ctx = BlockContext::torus(cc, p1, order)?;
    let sphere_ctx = BlockContext::sphere(&setup.cc, &setup.external_momenta, 2 * order)?;
    let sqrt2 = Float::with_val(prec, 2).sqrt();
    let p_sphere = Complex::with_val(prec, p * &sqrt2);

    let ht = torus_ctx.h_series(Channel::S, &cc.delta_of_p(p))?;
    let hs = sphere_ctx.h_series(Channel::S, &setup.cc.delta_of_p(&p_sphere))?;
    let mut coeff_err = Float::new(prec);
    let mut odd_err = Float::new(prec);
    for k in 0..=order {
        let e = crate::numerics::rel_err(&hs.coefficients[2 * k], &ht.coefficients[k]);
        if e > coeff_err {
            coeff_err = e;
        }
    }
    for j in (1..=2 * order).step_by(2) {
        let e = hs.coefficients[j].clone().abs().real().clone();
        if e > odd_err {
            odd_err = e;
        }
    }

    let a = prefactor_a(cc, p1, tau)?;
    let ln16 = Float::with_val(prec, 16).ln();
    let mut expo = Complex::with_val(prec, p * p);
    expo *= -2i32;
    expo *= &ln16;
    let factor = Complex::with_val(prec, expo.exp() * &a);
    let mut residuals: Vec<Float> = Vec::with_capacity(3);
    for channel in Channel::ALL {
        let torus_val = torus_ctx.full_block(channel, p, tau)?;
        let sphere_val = sphere_ctx.full_block(channel, &p_sphere, tau)?;
        let k = channel_bookkeeping(cc, p1, channel, false)?;
        let mut expect = Complex::with_val(prec, &factor * &sphere_val);
        expect *= k;
        residuals.push(crate::numerics::rel_err(&torus_val, &expect));
    }
    Ok(BlockRelationReport {
        coefficient_error: coeff_err,
        odd_coefficient_error: odd_err,
        channel_residuals: [
            residuals[0].clone(),
            residuals[1].clone(),
            residuals[2].clone(),
        ],
    })
}

/// Non-chiral dictionary factor for channel indices `(r, s)`:
/// `16^{-2P^2} a(beta, P_1 | tau)` times its right-moving counterpart
/// `16^{-2Pbar^2} a(beta, Pbar_1 | -conj tau)`, with `P = P_{(r,s)}` and
/// `Pbar = P_{(r,-s)}`.
pub fn gag_factor(
    cc: &CentralCharge,
    external: &Field,
    r: &BigRational,
    s: &BigRational,
    tau: &Complex,
) -> Result<Complex> {
    let prec = cc.prec();
    let ln16 = Float::with_val(prec, 16).ln();
    let mirror = Complex::with_val(prec, (-tau.real().clone(), tau.imag().clone()));
    let p = cc.momentum(r, s);
    let pbar = cc.momentum(r, &-s.clone());
    let one = |p1: &Complex, pc: &Complex, m: &Complex| -> Result<Complex> {
        let a = prefactor_a(cc, p1, m)?;
        let mut expo = Complex::with_val(prec, pc * pc);
        expo *= -2i32;
        expo *= &ln16;
        Ok(Complex::with_val(prec, expo.exp() * &a))
    };
    let left = one(&external.p, &p, tau)?;
    let right = one(&external.p_bar, &pbar, &mirror)?;
    Ok(Complex::with_val(prec, left * right))
}

/// Torus reduced structure constant from sphere ones:
/// `d^M_{(r,s)} = (-)^{r1 floor(s) [2r < r1]} r (kappa_{r,s}/kappa'_{2r,s})
///  mean(sphere_values)` over the sphere maps associated to `M`.
pub fn torus_d_from_sphere_d(
    cc: &CentralCharge,
    r1: i64,
    r: &BigRational,
    s: &BigRational,
    sphere_values: &[Complex],
) -> Result<Complex> {
    let prec = cc.prec();
    if sphere_values.is_empty() {
        return Err(Error::Solver(
            "no sphere values supplied for the dictionary sum".into(),
        ));
    }
    let ratio = kappa_ratio_sphere(cc, r, s)?;
    if ratio.is_zero() {
        return Err(Error::Domain {
            what: "dictionary kappa ratio",
            detail: format!("kappa'_{{2r,s}}/kappa_{{r,s}} vanishes at (r,s)=({r},{s})"),
        });
    }
    let mut mean = Complex::new(prec);
    for v in sphere_values {
        mean += v;
    }
    mean /= sphere_values.len() as u32;
    let mut out = Complex::with_val(prec, mean / ratio);
    out *= Complex::with_val(prec, rational_to_float(r, prec));
    let two_r_below = (r * rint(2)) < rint(r1);
    if two_r_below && (r1 * floor_i64(s)) % 2 != 0 {
        out = -out;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::NonChiralBlocks;
    use crate::numerics::{cplx, rel_err};

    fn cc(prec: u32, beta: f64) -> CentralCharge {
        CentralCharge::new(Complex::with_val(prec, beta)).unwrap()
    }

    fn tol(prec: u32, slack: u32) -> Float {
        Float::with_val(prec, 1) >> (prec - slack)
    }

    #[test]
    fn eta_satisfies_its_modular_identities() {
        let prec = 256;
        for (re, im) in [(0.13, 1.21), (-0.27, 0.86)] {
            let tau = cplx(prec, re, im);
            let eta = dedekind_eta(&tau).unwrap();
            // eta(-1/tau) = sqrt(-i tau) eta(tau).
            let minv = -tau.clone().recip();
            let lhs = dedekind_eta(&minv).unwrap();
            let mit = Complex::with_val(prec, &tau * &Complex::with_val(prec, (0, -1)));
            let rhs = Complex::with_val(prec, mit.sqrt() * &eta);
            assert!(rel_err(&lhs, &rhs) < tol(prec, 24), "S transform at {re}+{im}i");
            // eta(tau + 1) = e^{i pi/12} eta(tau).
            let tp1 = Complex::with_val(prec, &tau + 1u32);
            let lhs = dedekind_eta(&tp1).unwrap();
            let phase = (Complex::with_val(prec, (0, pi(prec))) / 12u32).exp();
            let rhs = Complex::with_val(prec, &phase * &eta);
            assert!(rel_err(&lhs, &rhs) < tol(prec, 24), "T transform at {re}+{im}i");
            // eta((tau-2)/(tau-1)) = sqrt(-i(tau-1)) eta(tau).
            let num = Complex::with_val(prec, &tau - 2u32);
            let den = Complex::with_val(prec, &tau - 1u32);
            let utau = Complex::with_val(prec, num / &den);
            let lhs = dedekind_eta(&utau).unwrap();
            let mitm1 = Complex::with_val(prec, &den * &Complex::with_val(prec, (0, -1)));
            let rhs = Complex::with_val(prec, mitm1.sqrt() * &eta);
            assert!(rel_err(&lhs, &rhs) < tol(prec, 24), "U transform at {re}+{im}i");
        }
    }

    #[test]
    fn dictionary_round_trips_and_matches_printed_examples() {
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let tau = cplx(prec, 0.11, 1.07);
        let ext = KacIndices::from_i64(2, 1);
        let chan = KacIndices::new(rat(3, 2), rat(1, 3));
        let entry = entry_from_torus(&ccv, &tau, &ext, &chan).unwrap();
        // Round trip back to the torus side.
        let back = transform(Direction::SphereToTorus, &entry.sphere).unwrap();
        assert!(rel_err(&back.beta, &entry.torus.beta) < tol(prec, 16));
        assert!(
            rel_err(&back.external_momentum, &entry.torus.external_momentum) < tol(prec, 16)
        );
        assert!(
            rel_err(&back.channel_momentum, &entry.torus.channel_momentum) < tol(prec, 16)
        );
        assert_eq!(back.external_indices, entry.torus.external_indices);
        assert_eq!(back.channel_indices, entry.torus.channel_indices);
        // Momentum identities: P'_{(2r,s)}(beta') = sqrt2 P_{(r,s)}(beta) and
        // P'_{(r1,s1/2)}(beta') = P_{(r1,s1)}(beta)/sqrt2.
        let ccs = sphere_cc(&ccv).unwrap();
        let direct = ccs.momentum(&rint(3), &rat(1, 3));
        assert!(rel_err(&direct, &entry.sphere.channel_momentum) < tol(prec, 16));
        let direct = ccs.momentum(&rint(2), &rat(1, 2));
        assert!(rel_err(&direct, &entry.sphere.external_momentum) < tol(prec, 16));
        // Spins halve (external) and double (channel).
        assert_eq!(entry.torus.external_spin, rint(2));
        assert_eq!(entry.sphere.external_spin, rint(1));
        assert_eq!(entry.torus.channel_spin, rat(1, 2));
        assert_eq!(entry.sphere.channel_spin, rint(1));
        // Nome row: sphere nome squared is the torus nome.
        let sq = Complex::with_val(prec, &entry.sphere.nome * &entry.sphere.nome);
        assert!(rel_err(&sq, &entry.torus.nome) < tol(prec, 16));
        // beta = 1 sends n = 2 to n' = 0.
        let cc1 = cc(prec, 1.0);
        let n = loop_weight_n(&cc1);
        assert!(rel_err(&n, &cplx(prec, 2.0, 0.0)) < tol(prec, 16));
        let np = loop_weight_n(&sphere_cc(&cc1).unwrap());
        assert!(np.clone().abs().real() < &tol(prec, 16), "n' should vanish: {np}");
    }

    #[test]
    fn weight_rows_follow_the_half_angle_identities() {
        let prec = 224;
        // n' = -sqrt(2 - n) with the principal branch (beta^2 < 1).
        let ccv = cc(prec, 0.83);
        let n = loop_weight_n(&ccv);
        let np = loop_weight_n(&sphere_cc(&ccv).unwrap());
        let expect = -Complex::with_val(prec, 2u32 - &n).sqrt();
        assert!(rel_err(&np, &expect) < tol(prec, 16), "n' branch");
        // w_1' = sqrt(w_1 + 2) for an external where the cosine is positive.
        let ccw = cc(prec, 0.6);
        let p1 = ccw.momentum(&rint(2), &rint(0));
        let w1 = loop_weight_w(&ccw, &p1);
        let sqrt2 = Float::with_val(prec, 2).sqrt();
        let w1p = loop_weight_w(
            &sphere_cc(&ccw).unwrap(),
            &Complex::with_val(prec, &p1 / &sqrt2),
        );
        let expect = Complex::with_val(prec, &w1 + 2u32).sqrt();
        assert!(rel_err(&w1p, &expect) < tol(prec, 16), "w1' branch");
        // Squared identities hold for any beta: w'^2 = w + 2 (external), and
        // the channel weight is unchanged.
        let ccg = cc(prec, 0.83);
        let p1 = ccg.momentum(&rint(2), &rint(1));
        let w1 = loop_weight_w(&ccg, &p1);
        let w1p = loop_weight_w(
            &sphere_cc(&ccg).unwrap(),
            &Complex::with_val(prec, &p1 / &sqrt2),
        );
        let lhs = Complex::with_val(prec, &w1p * &w1p);
        let rhs = Complex::with_val(prec, &w1 + 2u32);
        assert!(rel_err(&lhs, &rhs) < tol(prec, 16), "w1' squared");
        let p = ccg.momentum(&rat(3, 2), &rat(1, 3));
        let w = loop_weight_w(&ccg, &p);
        let wp = loop_weight_w(
            &sphere_cc(&ccg).unwrap(),
            &Complex::with_val(prec, &p * &sqrt2),
        );
        assert!(rel_err(&wp, &w) < tol(prec, 16), "channel weight fixed");
    }

    #[test]
    fn prefactor_routes_agree() {
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let tau = cplx(prec, 0.11, 1.07);
        for p1 in [cplx(prec, 0.41, 0.0), cplx(prec, 0.23, 0.17)] {
            let direct = prefactor_a(&ccv, &p1, &tau).unwrap();
            let closed = prefactor_a_closed(&ccv, &p1, &tau).unwrap();
            let err = rel_err(&direct, &closed);
            assert!(err < tol(prec, 40), "prefactor routes: {err}");
        }
    }

    #[test]
    fn prefactor_leading_exponent_matches_the_cross_ratio_power() {
        // As q -> 0: z ~ 16q, theta_2 ~ 2q^{1/4}, eta(q^2) ~ q^{1/12}, so
        // ln a / ln q -> -1/(4 beta^2) + (2 Delta_1 + 1)/4 - 1/12.
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let tau1 = cplx(prec, 0.0, 10.0);
        let tau2 = cplx(prec, 0.0, 12.0);
        let a1 = prefactor_a(&ccv, &p1, &tau1).unwrap().ln();
        let a2 = prefactor_a(&ccv, &p1, &tau2).unwrap().ln();
        // ln q = i pi tau, so the log-nome difference is -2 pi.
        let mut slope = Complex::with_val(prec, a2 - a1);
        slope /= -Complex::with_val(prec, 2u32 * pi(prec));
        let b2i = Complex::with_val(prec, &ccv.beta_inv() * &ccv.beta_inv());
        let d1 = ccv.delta_of_p(&p1);
        let mut expect = -Complex::with_val(prec, &b2i / 4u32);
        let mut mid = Complex::with_val(prec, &d1 * 2u32);
        mid += 1u32;
        mid /= 4u32;
        expect += mid;
        expect -= Complex::with_val(prec, rational_to_float(&rat(1, 12), prec));
        let err = rel_err(&slope, &expect);
        assert!(err.to_f64() < 1e-12, "leading exponent: {err}");
    }

    #[test]
    fn block_dictionary_holds_in_every_channel() {
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let p = cplx(prec, 0.29, 0.0);
        for (re, im) in [(0.09, 1.04), (-0.17, 1.22)] {
            let tau = cplx(prec, re, im);
            let report = check_block_relation(&ccv, &p1, &p, &tau, 4).unwrap();
            assert!(
                report.coefficient_error.clone().to_f64() < 1e-60,
                "coefficients: {}",
                report.coefficient_error
            );
            assert!(
                report.odd_coefficient_error.clone().to_f64() < 1e-60,
                "odd coefficients: {}",
                report.odd_coefficient_error
            );
            for (i, r) in report.channel_residuals.iter().enumerate() {
                assert!(
                    r.clone().to_f64() < 1e-50,
                    "channel {i} residual at tau={re}+{im}i: {r}"
                );
            }
        }
    }

    #[test]
    fn non_chiral_dictionary_holds_for_generic_channels() {
        // G^(s)_{(r,s)}(beta | q^2) = |16^{-2P^2} a|^2
        // G^(s),sphere_{(2r,s)}(beta/sqrt2 | q) with the right-moving factor
        // at the mirrored modulus.
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let ext = Field::non_diagonal(&ccv, KacIndices::from_i64(2, 0)).unwrap();
        let torus_blocks = NonChiralBlocks::torus(&ccv, &ext, 3).unwrap();
        let setup = sphere_setup(&ccv, &ext).unwrap();
        let sphere_blocks =
            NonChiralBlocks::sphere(&setup.cc, &setup.external_fields, 6).unwrap();
        let tau = cplx(prec, 0.07, 1.12);
        let r = rat(3, 2);
        let s = rat(1, 3);
        let torus_g = torus_blocks
            .g_block(Channel::S, &r, &s, &tau, None)
            .unwrap();
        let sphere_g = sphere_blocks
            .g_block(Channel::S, &rint(3), &s, &tau, None)
            .unwrap();
        let factor = gag_factor(&ccv, &ext, &r, &s, &tau).unwrap();
        let expect = Complex::with_val(prec, &factor * &sphere_g);
        let err = rel_err(&torus_g, &expect);
        assert!(err.to_f64() < 1e-50, "non-chiral dictionary: {err}");
    }

    #[test]
    fn dictionary_sum_prefactor_is_consistent() {
        // With a single sphere value of 1, the sum reduces to the prefactor
        // r kappa/kappa'; check the sign flip controlled by r1 floor(s) when
        // 2r < r1.
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let one = [Complex::with_val(prec, 1)];
        let r = rat(1, 2);
        let s = rat(1, 3);
        let plain = torus_d_from_sphere_d(&ccv, 2, &r, &s, &one).unwrap();
        let ratio = kappa_ratio_sphere(&ccv, &r, &s).unwrap();
        let mut expect = Complex::with_val(prec, rational_to_float(&r, prec));
        expect /= &ratio;
        assert!(rel_err(&plain, &expect) < tol(prec, 16));
        // r1 = 3, s with floor(s) = 1: sign flips for 2r < r1.
        let s = rat(4, 3);
        let flipped = torus_d_from_sphere_d(&ccv, 3, &r, &s, &one).unwrap();
        let ratio = kappa_ratio_sphere(&ccv, &r, &s).unwrap();
        let mut expect = Complex::with_val(prec, rational_to_float(&r, prec));
        expect /= &ratio;
        expect = -expect;
        assert!(rel_err(&flipped, &expect) < tol(prec, 16));
    }
}
