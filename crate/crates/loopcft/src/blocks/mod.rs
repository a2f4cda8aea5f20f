//! Virasoro conformal blocks: torus 1-point and sphere 4-point.
//!
//! Torus blocks take the form `F_P(q) = q^{P^2} H_P(q) / eta(tau)` with nome
//! `q = exp(2 pi i tau)`; sphere blocks `F_P(q) = (16q)^{P^2} A(q) H_P(q)`
//! with `q = exp(i pi tau)` and the theta-function prefactor
//! `A(q) = prod_{k=2,3,4} (theta_k^{-4}(q))^{P_k^2 + (-)^k Delta_1}`.
//! The series `H` is determined by the residue recursion
//! `Res_{Delta = Delta_{(r,s)}} H = R_{r,s} (nome)^{rs} H_{Delta_{(r,-s)}}`,
//! which in coefficients reads
//! `h_k(Delta) = sum_{rs <= k} f^{rs} R_{r,s} / (Delta - Delta_{(r,s)}) *
//! h_{k-rs}(Delta_{(r,-s)})` with `f = 16` on the sphere and `f = 1` on the
//! torus.  Since the shifted dimensions `Delta_{(r,-s)}` are fixed lattice
//! points, the inner coefficients are plain scalars and the whole dependence
//! on the channel dimension is through the explicit simple poles; value,
//! P-derivative, and Laurent data at a pole all follow analytically.
//!
//! Channel transforms: on the torus, `F^{(t)}(tau) = tau^{-Delta_1}
//! F(exp(2 pi i (-1/tau)))` and `F^{(u)}(tau) = (tau-1)^{-Delta_1}
//! F(exp(2 pi i (tau-2)/(tau-1)))`.  On the sphere the t-channel swaps the
//! second and fourth external momenta with prefactor `tau^{-2 delta}`, the
//! u-channel swaps the second and third with prefactor
//! `(tau-1)^{-2 delta} (-)^{P_2^2+P_3^2}`, where
//! `delta = sum_k P_k^2 - P_{(1,1)}^2`; the outer `A(q)` always stays at the
//! original nome and external ordering.
//!
//! Right-moving blocks are the same holomorphic functions evaluated at the
//! mirrored modulus `-conj(tau)` (still in the upper half-plane, with nome
//! `conj(q)`), with the channel power bases `conj(tau)`, `conj(tau) - 1`
//! substituted accordingly and the conjugate branch of the u-channel phase.
//!
//! Logarithmic blocks combine a block, its pole-subtracted value, and its
//! P-derivative for channel indices `r, s` both positive integers;
//! interchiral blocks resum towers `s -> s + 2` weighted by exact ratios of
//! reference structure constants.

use num::{BigRational, Signed};
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::algebra::{floor_i64, is_integer, rat, rational_to_float, rint};
use crate::error::{Error, Result};
use crate::kinematics::{CentralCharge, Field};
use crate::numerics::{dedekind_eta, digamma_c, exp_2pi_i, imag_unit, pi, theta};
use crate::structure::{dhat_shift1, dhat_shift2, residue_sphere_s, residue_torus};

/// Which surface the block lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Surface {
    Torus,
    Sphere,
}

/// Decomposition channel: identity, modular S-type, or the order-two map
/// fixing `1 + i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    S,
    T,
    U,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::S, Channel::T, Channel::U];

    pub fn name(self) -> &'static str {
        match self {
            Channel::S => "s",
            Channel::T => "t",
            Channel::U => "u",
        }
    }
}

/// Chirality of a block factor: left-movers evaluate at `q`, right-movers
/// at `conj(q)` via the mirrored modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mover {
    Left,
    Right,
}

/// Direction of a reference structure-constant shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `s -> s + 2`: ratio centered at `s` relating `s+1` and `s-1`... no:
    /// ratio `Dhat_(r,s+1) / Dhat_(r,s-1)` (two-step, any `r`).
    Plus2,
    /// `s -> s + 1`: ratio `Dhat_(r,s+1) / Dhat_(r,s)` (integer `r` only).
    Plus1,
}

/// Truncated series `H(q) = sum_k h_k q^k` with `h_0 = 1`.
#[derive(Clone, Debug)]
pub struct HSeries {
    pub coefficients: Vec<Complex>,
}

impl HSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// One pole of the truncated series: position, weight, and the coefficient
/// table of `H` at the shifted dimension `Delta_{(r,-s)}`.
#[derive(Clone, Debug)]
struct KernelTerm {
    r: u32,
    s: u32,
    /// `r s`, the nome power carried by the residue.
    level: usize,
    /// `Delta_{(r,s)}`, the pole location in the channel dimension.
    delta_pole: Complex,
    /// `Delta_{(r,-s)} = Delta_{(r,s)} + r s`, where the recursion re-enters.
    delta_shift: Complex,
    /// Unscaled residue `R_{r,s}`.
    residue: Complex,
    /// `16^{rs} R_{r,s}` on the sphere, `R_{r,s}` on the torus.
    weight: Complex,
    /// `h_j(Delta_{(r,-s)})` for `j = 0 ..= order - level`.
    shifted: Vec<Complex>,
}

/// The truncation-order-`N` pole data of `H` for one surface and one set of
/// (possibly channel-permuted) external momenta.  Immutable after
/// construction, so evaluation is safe to share across threads.
#[derive(Clone, Debug)]
struct BlockKernel {
    order: usize,
    prec: u32,
    terms: Vec<KernelTerm>,
}

impl BlockKernel {
    fn build(
        cc: &CentralCharge,
        surface: Surface,
        externals: &[Complex],
        order: usize,
    ) -> Result<Self> {
        let prec = cc.prec();
        let mut terms: Vec<KernelTerm> = Vec::new();
        for r in 1..=order {
            for s in 1..=order / r {
                let residue = match surface {
                    Surface::Torus => residue_torus(cc, &externals[0], r as u32, s as u32)?,
                    Surface::Sphere => {
                        let ext: [Complex; 4] = [
                            externals[0].clone(),
                            externals[1].clone(),
                            externals[2].clone(),
                            externals[3].clone(),
                        ];
                        residue_sphere_s(cc, &ext, r as u32, s as u32)?
                    }
                };
                if residue.is_zero() {
                    // A vanishing residue means no pole at all; dropping the
                    // term keeps nearby evaluations legal.
                    continue;
                }
                let level = r * s;
                let weight = match surface {
                    Surface::Torus => residue.clone(),
                    Surface::Sphere => {
                        let sixteen = Float::with_val(prec, 16);
                        let scale = Float::with_val(prec, (&sixteen).pow(level as u32));
                        Complex::with_val(prec, &residue * &scale)
                    }
                };
                let rr = rint(r as i64);
                let sr = rint(s as i64);
                let sneg = rint(-(s as i64));
                let delta_pole = cc.delta_rs(&rr, &sr);
                let delta_shift = cc.delta_rs(&rr, &sneg);
                terms.push(KernelTerm {
                    r: r as u32,
                    s: s as u32,
                    level,
                    delta_pole,
                    delta_shift,
                    residue,
                    weight,
                    shifted: Vec::new(),
                });
            }
        }

        // Distinct lattice points must stay numerically distinct: at rational
        // beta^2 different poles (or a shifted dimension and a pole) can
        // collide, and the recursion is then invalid.
        let thr = Float::with_val(prec, 1) >> (prec / 2);
        for i in 0..terms.len() {
            for j in 0..terms.len() {
                if i < j {
                    let d = Complex::with_val(prec, &terms[i].delta_pole - &terms[j].delta_pole)
                        .abs();
                    if d.real() < &thr {
                        return Err(Error::Domain {
                            what: "block series poles",
                            detail: format!(
                                "Delta_({},{}) collides with Delta_({},{}); beta^2 looks rational",
                                terms[i].r, terms[i].s, terms[j].r, terms[j].s
                            ),
                        });
                    }
                }
                let d = Complex::with_val(prec, &terms[i].delta_shift - &terms[j].delta_pole)
                    .abs();
                if d.real() < &thr {
                    return Err(Error::Domain {
                        what: "block series shifted dimensions",
                        detail: format!(
                            "Delta_({},-{}) hits the pole Delta_({},{}); beta^2 looks rational",
                            terms[i].r, terms[i].s, terms[j].r, terms[j].s
                        ),
                    });
                }
            }
        }

        // Coefficient tables at the shifted dimensions, built jointly by
        // increasing order: entry (i, k) only consumes entries (j, < k).
        let n = terms.len();
        let mut recip = Vec::with_capacity(n);
        for ti in &terms {
            let mut row = Vec::with_capacity(n);
            for tj in &terms {
                row.push(Complex::with_val(prec, &ti.delta_shift - &tj.delta_pole).recip());
            }
            recip.push(row);
        }
        let mut tables: Vec<Vec<Complex>> =
            terms.iter().map(|_| vec![Complex::with_val(prec, 1)]).collect();
        for k in 1..=order {
            for i in 0..n {
                if k > order - terms[i].level {
                    continue;
                }
                let mut acc = Complex::new(prec);
                for j in 0..n {
                    let lvl = terms[j].level;
                    if lvl > k {
                        continue;
                    }
                    let mut c = Complex::with_val(prec, &terms[j].weight * &recip[i][j]);
                    c *= &tables[j][k - lvl];
                    acc += c;
                }
                tables[i].push(acc);
            }
        }
        for (t, tab) in terms.iter_mut().zip(tables) {
            t.shifted = tab;
        }
        Ok(Self { order, prec, terms })
    }

    fn term(&self, r: u32, s: u32) -> Option<&KernelTerm> {
        self.terms.iter().find(|t| t.r == r && t.s == s)
    }

    /// Reject channel dimensions closer than `2^{-prec/2}` to a retained pole.
    fn check_proximity(&self, delta: &Complex) -> Result<()> {
        let thr = Float::with_val(self.prec, 1) >> (self.prec / 2);
        for t in &self.terms {
            let d = Complex::with_val(self.prec, delta - &t.delta_pole).abs();
            if d.real() < &thr {
                return Err(Error::Domain {
                    what: "channel dimension",
                    detail: format!(
                        "within 2^-{}/2 of the series pole at Delta_({},{})",
                        self.prec, t.r, t.s
                    ),
                });
            }
        }
        Ok(())
    }

    /// Coefficients `h_0 ..= h_N` at a generic channel dimension.
    fn h_at(&self, delta: &Complex) -> Result<Vec<Complex>> {
        self.check_proximity(delta)?;
        let prec = self.prec;
        let recips: Vec<Complex> = self
            .terms
            .iter()
            .map(|t| Complex::with_val(prec, delta - &t.delta_pole).recip())
            .collect();
        let mut h = Vec::with_capacity(self.order + 1);
        h.push(Complex::with_val(prec, 1));
        for k in 1..=self.order {
            let mut acc = Complex::new(prec);
            for (t, rec) in self.terms.iter().zip(&recips) {
                if t.level > k {
                    continue;
                }
                let mut c = Complex::with_val(prec, &t.weight * rec);
                c *= &t.shifted[k - t.level];
                acc += c;
            }
            h.push(acc);
        }
        Ok(h)
    }

    /// Coefficients and their P-derivatives at momentum `p`
    /// (`d/dP [1/(Delta(P) - Delta_t)] = -2P/(Delta - Delta_t)^2`).
    fn h_at_with_derivative(
        &self,
        delta: &Complex,
        p: &Complex,
    ) -> Result<(Vec<Complex>, Vec<Complex>)> {
        self.check_proximity(delta)?;
        let prec = self.prec;
        let recips: Vec<Complex> = self
            .terms
            .iter()
            .map(|t| Complex::with_val(prec, delta - &t.delta_pole).recip())
            .collect();
        let minus_two_p = -Complex::with_val(prec, p * 2u32);
        let mut h = Vec::with_capacity(self.order + 1);
        let mut dh = Vec::with_capacity(self.order + 1);
        h.push(Complex::with_val(prec, 1));
        dh.push(Complex::new(prec));
        for k in 1..=self.order {
            let mut acc = Complex::new(prec);
            let mut dacc = Complex::new(prec);
            for (t, rec) in self.terms.iter().zip(&recips) {
                if t.level > k {
                    continue;
                }
                let base = Complex::with_val(prec, &t.weight * &t.shifted[k - t.level]);
                acc += Complex::with_val(prec, &base * rec);
                let mut d = Complex::with_val(prec, rec * rec);
                d *= &base;
                d *= &minus_two_p;
                dacc += d;
            }
            h.push(acc);
            dh.push(dacc);
        }
        Ok((h, dh))
    }

    /// Laurent data of every `h_k` at the lattice momentum `P_0 = P_{(r0,s0)}`
    /// in `u = P - P_0`: returns (coefficients of `1/u`, constant terms).
    ///
    /// The colliding pole contributes `1/(Delta - Delta_0) = 1/(u(u + 2P_0))
    /// = 1/(2P_0) u^{-1} - 1/(4P_0^2) + O(u)`; a regular pole with
    /// `A = Delta_0 - Delta_t` contributes `1/A + O(u)`.  When the residue at
    /// `(r0, s0)` vanished the singular part is zero and the constant part is
    /// the plain evaluation.
    fn h_jets_at(
        &self,
        r0: u32,
        s0: u32,
        p0: &Complex,
        delta0: &Complex,
    ) -> Result<(Vec<Complex>, Vec<Complex>)> {
        let prec = self.prec;
        let two_p0 = Complex::with_val(prec, p0 * 2u32);
        let m1 = two_p0.clone().recip();
        let c0_pole = -Complex::with_val(prec, &m1 * &m1);
        let mut coeffs = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.r == r0 && t.s == s0 {
                coeffs.push((m1.clone(), c0_pole.clone()));
            } else {
                let a = Complex::with_val(prec, delta0 - &t.delta_pole);
                let thr = Float::with_val(prec, 1) >> (prec / 2);
                if a.clone().abs().real() < &thr {
                    return Err(Error::Domain {
                        what: "block expansion point",
                        detail: format!(
                            "Delta_({r0},{s0}) sits on the unrelated pole Delta_({},{})",
                            t.r, t.s
                        ),
                    });
                }
                coeffs.push((Complex::new(prec), a.recip()));
            }
        }
        let mut minus = Vec::with_capacity(self.order + 1);
        let mut zero = Vec::with_capacity(self.order + 1);
        minus.push(Complex::new(prec));
        zero.push(Complex::with_val(prec, 1));
        for k in 1..=self.order {
            let mut am = Complex::new(prec);
            let mut az = Complex::new(prec);
            for (t, (jm, jz)) in self.terms.iter().zip(&coeffs) {
                if t.level > k {
                    continue;
                }
                let base = Complex::with_val(prec, &t.weight * &t.shifted[k - t.level]);
                if !jm.is_zero() {
                    am += Complex::with_val(prec, &base * jm);
                }
                az += Complex::with_val(prec, &base * jz);
            }
            minus.push(am);
            zero.push(az);
        }
        Ok((minus, zero))
    }
}

/// Sum a coefficient list against powers of the nome (Horner).
pub(crate) fn horner(coeffs: &[Complex], q: &Complex) -> Complex {
    let prec = q.prec().0;
    let mut acc = Complex::new(prec);
    for c in coeffs.iter().rev() {
        acc = Complex::with_val(prec, &acc * q) + c;
    }
    acc
}

/// Principal-branch complex power with a zero-base guard.
fn cpow(base: &Complex, expo: &Complex) -> Result<Complex> {
    if base.is_zero() {
        return Err(Error::Domain {
            what: "complex power",
            detail: "zero base".into(),
        });
    }
    let prec = base.prec().0;
    Ok(Complex::with_val(prec, base.pow(expo)))
}

/// Theta-function prefactor of sphere blocks,
/// `A(q) = prod_{k=2,3,4} (theta_k^{-4}(q))^{P_k^2 + (-)^k Delta_1}`,
/// realized as `exp(-4 sum_k e_k Ln theta_k(q))` with principal logarithms.
pub fn sphere_a(cc: &CentralCharge, externals: &[Complex], q: &Complex) -> Result<Complex> {
    let prec = cc.prec();
    if externals.len() != 4 {
        return Err(Error::Domain {
            what: "sphere prefactor",
            detail: format!("needs 4 external momenta, got {}", externals.len()),
        });
    }
    let d1 = cc.delta_of_p(&externals[0]);
    let mut ln_a = Complex::new(prec);
    for (k, pk) in [(2u8, &externals[1]), (3, &externals[2]), (4, &externals[3])] {
        let lt = theta(k, q)?.ln();
        let mut e = Complex::with_val(prec, pk * pk);
        if k % 2 == 0 {
            e += &d1;
        } else {
            e -= &d1;
        }
        let mut c = Complex::with_val(prec, &e * &lt);
        c *= -4i32;
        ln_a += c;
    }
    Ok(ln_a.exp())
}

/// Everything needed to evaluate a block at a point: the channel prefactor
/// (including `1/eta` or `A(q)`), the log-nome `L` with
/// `(nome)^{P^2} = exp(P^2 L)`, and the nome itself.
struct Frame {
    scalar: Complex,
    ln_nome: Complex,
    nome: Complex,
}

/// Chiral block evaluator for one surface and one list of external momenta.
///
/// Holds one pole table per channel (the torus table is channel-independent;
/// sphere channels permute the externals entering the residues).  All state
/// is immutable after construction.
#[derive(Clone, Debug)]
pub struct BlockContext {
    cc: CentralCharge,
    surface: Surface,
    externals: Vec<Complex>,
    order: usize,
    delta1: Complex,
    /// Exponent of the channel power prefactor: `Delta_1` on the torus,
    /// `2 delta = 2 (sum_k P_k^2 - P_{(1,1)}^2)` on the sphere.
    power_exponent: Complex,
    kernels: Vec<BlockKernel>,
}

impl BlockContext {
    /// Torus context with one external momentum.
    pub fn torus(cc: &CentralCharge, p1: &Complex, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Domain {
                what: "block truncation order",
                detail: "order must be at least 1".into(),
            });
        }
        let externals = vec![p1.clone()];
        let kernel = BlockKernel::build(cc, Surface::Torus, &externals, order)?;
        let delta1 = cc.delta_of_p(p1);
        Ok(Self {
            cc: cc.clone(),
            surface: Surface::Torus,
            externals,
            order,
            power_exponent: delta1.clone(),
            delta1,
            kernels: vec![kernel],
        })
    }

    /// Sphere context with four external momenta (in s-channel order).
    pub fn sphere(cc: &CentralCharge, ps: &[Complex; 4], order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Domain {
                what: "block truncation order",
                detail: "order must be at least 1".into(),
            });
        }
        let prec = cc.prec();
        let externals: Vec<Complex> = ps.to_vec();
        let perm = |idx: [usize; 4]| -> Vec<Complex> {
            idx.iter().map(|&i| ps[i].clone()).collect()
        };
        let ks = BlockKernel::build(cc, Surface::Sphere, &externals, order)?;
        let kt = BlockKernel::build(cc, Surface::Sphere, &perm([0, 3, 2, 1]), order)?;
        let ku = BlockKernel::build(cc, Surface::Sphere, &perm([0, 2, 1, 3]), order)?;
        let delta1 = cc.delta_of_p(&ps[0]);
        let p11 = cc.momentum(&rint(1), &rint(1));
        let mut delta_exp = -Complex::with_val(prec, &p11 * &p11);
        for p in ps {
            delta_exp += Complex::with_val(prec, p * p);
        }
        delta_exp *= 2u32;
        Ok(Self {
            cc: cc.clone(),
            surface: Surface::Sphere,
            externals,
            order,
            delta1,
            power_exponent: delta_exp,
            kernels: vec![ks, kt, ku],
        })
    }

    pub fn cc(&self) -> &CentralCharge {
        &self.cc
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn externals(&self) -> &[Complex] {
        &self.externals
    }

    /// Dimension of the first external field.
    pub fn delta1(&self) -> &Complex {
        &self.delta1
    }

    fn kernel(&self, channel: Channel) -> &BlockKernel {
        match self.surface {
            Surface::Torus => &self.kernels[0],
            Surface::Sphere => match channel {
                Channel::S => &self.kernels[0],
                Channel::T => &self.kernels[1],
                Channel::U => &self.kernels[2],
            },
        }
    }

    /// S-channel residue `R_{r,s}` for these externals.
    pub fn residue(&self, r: u32, s: u32) -> Result<Complex> {
        match self.surface {
            Surface::Torus => residue_torus(&self.cc, &self.externals[0], r, s),
            Surface::Sphere => {
                let ext: [Complex; 4] = [
                    self.externals[0].clone(),
                    self.externals[1].clone(),
                    self.externals[2].clone(),
                    self.externals[3].clone(),
                ];
                residue_sphere_s(&self.cc, &ext, r, s)
            }
        }
    }

    /// Series coefficients at a generic channel dimension.
    pub fn h_series(&self, channel: Channel, delta: &Complex) -> Result<HSeries> {
        Ok(HSeries {
            coefficients: self.kernel(channel).h_at(delta)?,
        })
    }

    /// Geometry and prefactor for one channel and one chirality at modulus
    /// `tau` (always the left-moving modulus; right-movers mirror it).
    fn frame(&self, channel: Channel, mover: Mover, tau: &Complex) -> Result<Frame> {
        let prec = self.cc.prec();
        if tau.imag().cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Domain {
                what: "modulus",
                detail: format!("Im(tau) must be positive, got tau = {tau}"),
            });
        }
        let m = match mover {
            Mover::Left => tau.clone(),
            Mover::Right => {
                Complex::with_val(prec, (-tau.real().clone(), tau.imag().clone()))
            }
        };
        let tx = match channel {
            Channel::S => m.clone(),
            Channel::T => -m.clone().recip(),
            Channel::U => {
                let num = Complex::with_val(prec, &m - 2u32);
                let den = Complex::with_val(prec, &m - 1u32);
                Complex::with_val(prec, num / den)
            }
        };
        // Power base: the physical tau (t) or tau - 1 (u); for right-movers
        // these are conj(tau) = -m and conj(tau) - 1 = -(m + 1).
        let pow_base = match (channel, mover) {
            (Channel::S, _) => None,
            (Channel::T, Mover::Left) => Some(m.clone()),
            (Channel::T, Mover::Right) => Some(-m.clone()),
            (Channel::U, Mover::Left) => Some(Complex::with_val(prec, &m - 1u32)),
            (Channel::U, Mover::Right) => Some(-Complex::with_val(prec, &m + 1u32)),
        };
        let neg_exp = -self.power_exponent.clone();
        match self.surface {
            Surface::Torus => {
                let mut scalar = dedekind_eta(&tx)?.recip();
                if let Some(b) = pow_base {
                    scalar *= cpow(&b, &neg_exp)?;
                }
                let two_pi_i = Complex::with_val(prec, (0, pi(prec))) * 2u32;
                let ln_nome = Complex::with_val(prec, &two_pi_i * &tx);
                let one = Complex::with_val(prec, 1);
                let nome = exp_2pi_i(&tx, &one);
                Ok(Frame {
                    scalar,
                    ln_nome,
                    nome,
                })
            }
            Surface::Sphere => {
                let half = Complex::with_val(prec, 0.5);
                let q_base = exp_2pi_i(&m, &half);
                let mut scalar = sphere_a(&self.cc, &self.externals, &q_base)?;
                if let Some(b) = pow_base {
                    scalar *= cpow(&b, &neg_exp)?;
                }
                if channel == Channel::U {
                    // (-)^{P_2^2 + P_3^2} as exp(+/- i pi (...)): plus for
                    // left-movers, the conjugate branch for right-movers.
                    let p2 = &self.externals[1];
                    let p3 = &self.externals[2];
                    let mut x = Complex::with_val(prec, p2 * p2);
                    x += Complex::with_val(prec, p3 * p3);
                    let sign = match mover {
                        Mover::Left => 1i32,
                        Mover::Right => -1i32,
                    };
                    let mut phase = Complex::with_val(prec, (0, pi(prec)));
                    phase *= sign;
                    phase *= &x;
                    scalar *= phase.exp();
                }
                let i_pi = Complex::with_val(prec, (0, pi(prec)));
                let mut ln_nome = Complex::with_val(prec, &i_pi * &tx);
                ln_nome += Float::with_val(prec, 16).ln();
                let nome = exp_2pi_i(&tx, &half);
                Ok(Frame {
                    scalar,
                    ln_nome,
                    nome,
                })
            }
        }
    }

    /// One chiral block value at channel momentum `p` and modulus `tau`.
    pub fn chiral_block(
        &self,
        channel: Channel,
        mover: Mover,
        p: &Complex,
        tau: &Complex,
    ) -> Result<Complex> {
        let prec = self.cc.prec();
        let f = self.frame(channel, mover, tau)?;
        let delta = self.cc.delta_of_p(p);
        let h = self.kernel(channel).h_at(&delta)?;
        let series = horner(&h, &f.nome);
        let p2 = Complex::with_val(prec, p * p);
        let pref = Complex::with_val(prec, &p2 * &f.ln_nome).exp();
        let mut out = Complex::with_val(prec, &f.scalar * &pref);
        out *= series;
        Ok(out)
    }

    /// Channel prefactor, log-nome and nome at `tau`, for callers that
    /// evaluate many channel momenta in one frame:
    /// `block = scalar * exp(P^2 ln_nome) * H_Delta(nome)`.
    pub(crate) fn frame_parts(
        &self,
        channel: Channel,
        mover: Mover,
        tau: &Complex,
    ) -> Result<(Complex, Complex, Complex)> {
        let f = self.frame(channel, mover, tau)?;
        Ok((f.scalar, f.ln_nome, f.nome))
    }

    /// Left-moving block (the plain evaluation used by decompositions).
    pub fn full_block(&self, channel: Channel, p: &Complex, tau: &Complex) -> Result<Complex> {
        self.chiral_block(channel, Mover::Left, p, tau)
    }

    /// Pole-subtracted value at `P_{(r,s)}` and the P-derivative at
    /// `P_{(r,-s)}`: the two regular ingredients of logarithmic blocks.
    pub fn regularized_block_and_derivative(
        &self,
        channel: Channel,
        mover: Mover,
        r: u32,
        s: u32,
        tau: &Complex,
    ) -> Result<(Complex, Complex)> {
        let prec = self.cc.prec();
        let f = self.frame(channel, mover, tau)?;
        let kernel = self.kernel(channel);
        let p0 = self.cc.momentum(&rint(r as i64), &rint(s as i64));
        let delta0 = self.cc.delta_of_p(&p0);
        let (minus, zero) = kernel.h_jets_at(r, s, &p0, &delta0)?;
        let hm = horner(&minus, &f.nome);
        let hz = horner(&zero, &f.nome);
        let p0_sq = Complex::with_val(prec, &p0 * &p0);
        let b0 = Complex::with_val(prec, &p0_sq * &f.ln_nome).exp();
        let mut b1 = Complex::with_val(prec, &b0 * &p0);
        b1 *= &f.ln_nome;
        b1 *= 2u32;
        let mut reg = Complex::with_val(prec, &b0 * &hz);
        reg += Complex::with_val(prec, &b1 * &hm);
        reg *= &f.scalar;

        let pm = self.cc.momentum(&rint(r as i64), &rint(-(s as i64)));
        let deltam = self.cc.delta_of_p(&pm);
        let (h, dh) = kernel.h_at_with_derivative(&deltam, &pm)?;
        let hq = horner(&h, &f.nome);
        let dhq = horner(&dh, &f.nome);
        let pm_sq = Complex::with_val(prec, &pm * &pm);
        let em = Complex::with_val(prec, &pm_sq * &f.ln_nome).exp();
        let mut inner = Complex::with_val(prec, &pm * &f.ln_nome);
        inner *= 2u32;
        inner *= &hq;
        inner += &dhq;
        let mut deriv = Complex::with_val(prec, &f.scalar * &em);
        deriv *= inner;
        Ok((reg, deriv))
    }

    /// Coefficient of `1/(P - P_{(r,s)})` of the block near the lattice
    /// momentum; zero when the residue vanished.
    pub fn pole_coefficient(
        &self,
        channel: Channel,
        mover: Mover,
        r: u32,
        s: u32,
        tau: &Complex,
    ) -> Result<Complex> {
        let prec = self.cc.prec();
        let f = self.frame(channel, mover, tau)?;
        let kernel = self.kernel(channel);
        let p0 = self.cc.momentum(&rint(r as i64), &rint(s as i64));
        let delta0 = self.cc.delta_of_p(&p0);
        let (minus, _) = kernel.h_jets_at(r, s, &p0, &delta0)?;
        let hm = horner(&minus, &f.nome);
        let p0_sq = Complex::with_val(prec, &p0 * &p0);
        let b0 = Complex::with_val(prec, &p0_sq * &f.ln_nome).exp();
        let mut out = Complex::with_val(prec, &f.scalar * &b0);
        out *= hm;
        Ok(out)
    }
}

/// Non-chiral block evaluator: left-movers at `q`, right-movers at `conj(q)`,
/// with independent momenta `(P, Pbar)`; carries the external fields so that
/// logarithmic and interchiral data can reach the structure-constant layer.
#[derive(Clone, Debug)]
pub struct NonChiralBlocks {
    cc: CentralCharge,
    surface: Surface,
    order: usize,
    externals: Vec<Field>,
    left: BlockContext,
    right: BlockContext,
}

impl NonChiralBlocks {
    pub fn torus(cc: &CentralCharge, external: &Field, order: usize) -> Result<Self> {
        let left = BlockContext::torus(cc, &external.p, order)?;
        let right = BlockContext::torus(cc, &external.p_bar, order)?;
        Ok(Self {
            cc: cc.clone(),
            surface: Surface::Torus,
            order,
            externals: vec![external.clone()],
            left,
            right,
        })
    }

    pub fn sphere(cc: &CentralCharge, externals: &[Field; 4], order: usize) -> Result<Self> {
        let ps: [Complex; 4] = [
            externals[0].p.clone(),
            externals[1].p.clone(),
            externals[2].p.clone(),
            externals[3].p.clone(),
        ];
        let pbars: [Complex; 4] = [
            externals[0].p_bar.clone(),
            externals[1].p_bar.clone(),
            externals[2].p_bar.clone(),
            externals[3].p_bar.clone(),
        ];
        let left = BlockContext::sphere(cc, &ps, order)?;
        let right = BlockContext::sphere(cc, &pbars, order)?;
        Ok(Self {
            cc: cc.clone(),
            surface: Surface::Sphere,
            order,
            externals: externals.to_vec(),
            left,
            right,
        })
    }

    pub fn cc(&self) -> &CentralCharge {
        &self.cc
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn left(&self) -> &BlockContext {
        &self.left
    }

    pub fn right(&self) -> &BlockContext {
        &self.right
    }

    pub fn externals(&self) -> &[Field] {
        &self.externals
    }

    /// Kac labels `(r1, s1)` of the torus external: direct for indexed
    /// fields, `(0, -2 beta P)` for a diagonal one.
    fn external_labels(&self) -> Result<(BigRational, Complex)> {
        if self.surface != Surface::Torus {
            return Err(Error::Domain {
                what: "external labels",
                detail: "only the torus external carries shift-equation labels".into(),
            });
        }
        Ok(self.externals[0].kac_labels(&self.cc))
    }

    /// Plain non-chiral block `F_P(q) * Fbar_Pbar(qbar)` for a channel field.
    pub fn block(&self, channel: Channel, field: &Field, tau: &Complex) -> Result<Complex> {
        let prec = self.cc.prec();
        let l = self.left.chiral_block(channel, Mover::Left, &field.p, tau)?;
        let r = self.right.chiral_block(channel, Mover::Right, &field.p_bar, tau)?;
        Ok(Complex::with_val(prec, l * r))
    }

    /// Logarithmic block for channel indices `r, s` in `N*`:
    /// `G = (Freg - R/(2P) F')*Fbar + (R/Rbar) F (Fbarreg - Rbar/(2P) Fbar')
    ///      - R/(2P) ell |F|^2`,
    /// with all primed/regularized pieces at `P_{(r,s)}` / `P_{(r,-s)}`.
    pub fn log_block(
        &self,
        channel: Channel,
        r: u32,
        s: u32,
        tau: &Complex,
        ell: &Complex,
    ) -> Result<Complex> {
        let prec = self.cc.prec();
        let zero = Complex::new(prec);
        let res_l = self
            .left
            .kernel(channel)
            .term(r, s)
            .map(|t| t.residue.clone())
            .unwrap_or(zero);
        let res_r = match self.right.kernel(channel).term(r, s) {
            Some(t) => t.residue.clone(),
            None => {
                return Err(Error::LogBlockDegenerate(format!(
                    "right-moving residue Rbar_({r},{s}) vanishes; use the plain block"
                )))
            }
        };
        let p0 = self.cc.momentum(&rint(r as i64), &rint(s as i64));
        let pm = self.cc.momentum(&rint(r as i64), &rint(-(s as i64)));
        let (reg_l, dr_l) =
            self.left
                .regularized_block_and_derivative(channel, Mover::Left, r, s, tau)?;
        let (reg_r, dr_r) =
            self.right
                .regularized_block_and_derivative(channel, Mover::Right, r, s, tau)?;
        let f_l = self.left.chiral_block(channel, Mover::Left, &pm, tau)?;
        let f_r = self.right.chiral_block(channel, Mover::Right, &pm, tau)?;
        let two_p0 = Complex::with_val(prec, &p0 * 2u32);
        let rr = Complex::with_val(prec, &res_l / &two_p0);
        let rrbar = Complex::with_val(prec, &res_r / &two_p0);
        let ratio = Complex::with_val(prec, &res_l / &res_r);

        let mut left_piece = reg_l;
        left_piece -= Complex::with_val(prec, &rr * &dr_l);
        left_piece *= &f_r;

        let mut right_piece = reg_r;
        right_piece -= Complex::with_val(prec, &rrbar * &dr_r);
        right_piece *= &f_l;
        right_piece *= &ratio;

        let mut log_piece = Complex::with_val(prec, &rr * ell);
        log_piece *= &f_l;
        log_piece *= &f_r;

        let mut out = left_piece;
        out += right_piece;
        out -= log_piece;
        Ok(out)
    }

    /// Torus coefficient `ell_{(r,s)}`:
    /// `beta ell = 2 sum_{±,±} sum_{j=1/2-s}^{s-1/2}
    ///   psi((r1+1)/2 ± r + (j ± s1/2) beta^{-2})
    ///   - 4 sum_± sum_{j=1-s}^{s} psi(± r + j beta^{-2})
    ///   - 4 pi cot(pi s beta^{-2})`,
    /// with `psi(-n) = psi(n+1)` at non-positive integers.
    pub fn ell_torus(&self, r: u32, s: u32) -> Result<Complex> {
        let prec = self.cc.prec();
        let (r1, s1) = self.external_labels()?;
        let beta_inv = self.cc.beta_inv();
        let b2i = Complex::with_val(prec, &beta_inv * &beta_inv);
        let s1_half = Complex::with_val(prec, &s1 / 2u32);
        let mut acc = Complex::new(prec);
        for m in 0..2 * (s as i64) {
            // j runs over half-integers 1/2 - s, ..., s - 1/2.
            let j = rat(2 * m + 1 - 2 * (s as i64), 2);
            let jf = Complex::with_val(prec, rational_to_float(&j, prec));
            for er in [1i64, -1] {
                for es in [1i64, -1] {
                    let mut inner = jf.clone();
                    if es > 0 {
                        inner += &s1_half;
                    } else {
                        inner -= &s1_half;
                    }
                    let mut arg = Complex::with_val(prec, &inner * &b2i);
                    let shift = &r1 + rint(1 + 2 * er * (r as i64));
                    let shift = shift / rint(2);
                    // (r1 + 1)/2 ± r as one exact rational.
                    arg += Complex::with_val(prec, rational_to_float(&shift, prec));
                    let mut term = digamma_c(&arg)?;
                    term *= 2u32;
                    acc += term;
                }
            }
        }
        for j in (1 - s as i64)..=(s as i64) {
            for er in [1i64, -1] {
                let mut arg = Complex::with_val(prec, &b2i * j);
                arg += Complex::with_val(prec, er * (r as i64));
                let mut term = digamma_c(&arg)?;
                term *= 4u32;
                acc -= term;
            }
        }
        let mut x = Complex::with_val(prec, &b2i * (s as i64));
        x *= pi(prec);
        let sin = x.clone().sin();
        if sin.is_zero() {
            return Err(Error::Domain {
                what: "ell coefficient",
                detail: format!("cot(pi s / beta^2) pole at s = {s}"),
            });
        }
        let mut cot = x.cos();
        cot /= sin;
        cot *= 4u32;
        cot *= pi(prec);
        acc -= cot;
        Ok(Complex::with_val(prec, acc / self.cc.beta()))
    }

    /// Non-chiral channel contribution for lattice labels `(r, s)`:
    /// logarithmic when `r, s` are positive integers with a live pole at this
    /// truncation, zero for negative integer `s` (convention), and the plain
    /// product `F_{Delta_{(r,s)}} Fbar_{Delta_{(r,-s)}}` otherwise.
    /// `ell` overrides the torus closed form (mandatory on the sphere when
    /// the logarithmic branch is hit).
    pub fn g_block(
        &self,
        channel: Channel,
        r: &BigRational,
        s: &BigRational,
        tau: &Complex,
        ell: Option<&Complex>,
    ) -> Result<Complex> {
        let prec = self.cc.prec();
        let integer_pair = is_integer(r) && is_integer(s) && r > &rint(0);
        if integer_pair {
            let si = floor_i64(s);
            if si < 0 {
                return Ok(Complex::new(prec));
            }
            if si > 0 {
                let ru = floor_i64(r) as u32;
                let su = si as u32;
                let left_live = self.left.kernel(channel).term(ru, su).is_some();
                let right_live = self.right.kernel(channel).term(ru, su).is_some();
                if right_live {
                    let ell_val = match ell {
                        Some(e) => e.clone(),
                        None => match self.surface {
                            Surface::Torus => self.ell_torus(ru, su)?,
                            Surface::Sphere => {
                                return Err(Error::Domain {
                                    what: "sphere logarithmic block",
                                    detail: "no closed-form ell wired in; pass it explicitly"
                                        .into(),
                                })
                            }
                        },
                    };
                    return self.log_block(channel, ru, su, tau, &ell_val);
                }
                if left_live {
                    return Err(Error::LogBlockDegenerate(format!(
                        "Rbar_({ru},{su}) vanishes while R_({ru},{su}) does not"
                    )));
                }
                // No live pole on either side (vanished residues or a level
                // beyond the truncation): within the retained orders the
                // block is the plain product.
            }
        }
        let p = self.cc.momentum(r, s);
        let pbar = self.cc.momentum(r, &-s.clone());
        let l = self.left.chiral_block(channel, Mover::Left, &p, tau)?;
        let rv = self.right.chiral_block(channel, Mover::Right, &pbar, tau)?;
        Ok(Complex::with_val(prec, l * rv))
    }

    /// Exact ratio of reference structure constants under a shift of the
    /// channel's second index: `Dhat_(r,s+1)/Dhat_(r,s-1)` (`Plus2`) or
    /// `Dhat_(r,s+1)/Dhat_(r,s)` (`Plus1`, integer `r`).
    pub fn interchiral_ratio(
        &self,
        r: &BigRational,
        s: &Complex,
        direction: ShiftDirection,
    ) -> Result<Complex> {
        let (r1, s1) = self.external_labels()?;
        match direction {
            ShiftDirection::Plus2 => dhat_shift2(&self.cc, &r1, &s1, r, s),
            ShiftDirection::Plus1 => dhat_shift1(&self.cc, &r1, &s1, r, s),
        }
    }

    /// Interchiral block: `sum_{s' in s0 + 2Z} (Dhat_(r,s')/Dhat_(r,s0))
    /// G_(r,s')`, truncated to `|s'| <= s_max` (the `s0` term is always
    /// kept).  Ratios accumulate through two-step shifts, so only the
    /// reference-constant quotients printed as shift equations are used.
    pub fn interchiral_block(
        &self,
        channel: Channel,
        r: &BigRational,
        s0: &BigRational,
        s_max: &BigRational,
        tau: &Complex,
    ) -> Result<Complex> {
        if self.surface != Surface::Torus {
            return Err(Error::Domain {
                what: "interchiral block",
                detail: "sphere towers are assembled by the solver from explicit ratios".into(),
            });
        }
        let prec = self.cc.prec();
        let integer_tower = is_integer(r) && r > &rint(0) && is_integer(s0);
        let mut total = self.g_block(channel, r, s0, tau, None)?;
        // Upward tower s0 + 2, s0 + 4, ...
        let mut ratio = Complex::with_val(prec, 1);
        let mut sp = s0 + rint(2);
        while sp.abs() <= *s_max {
            let center = &sp - rint(1);
            let center_c = Complex::with_val(prec, rational_to_float(&center, prec));
            ratio = Complex::with_val(
                prec,
                &ratio * &self.interchiral_ratio(r, &center_c, ShiftDirection::Plus2)?,
            );
            let g = self.g_block(channel, r, &sp, tau, None)?;
            total += Complex::with_val(prec, &ratio * &g);
            sp += rint(2);
        }
        // Downward tower s0 - 2, s0 - 4, ...; for integer towers every
        // negative member vanishes by convention, so stop early.
        let mut ratio = Complex::with_val(prec, 1);
        let mut sp = s0 - rint(2);
        while sp.abs() <= *s_max {
            if integer_tower && sp < rint(0) {
                break;
            }
            let center = &sp + rint(1);
            let center_c = Complex::with_val(prec, rational_to_float(&center, prec));
            ratio = Complex::with_val(
                prec,
                &ratio / &self.interchiral_ratio(r, &center_c, ShiftDirection::Plus2)?,
            );
            let g = self.g_block(channel, r, &sp, tau, None)?;
            total += Complex::with_val(prec, &ratio * &g);
            sp -= rint(2);
        }
        Ok(total)
    }
}

/// Complex arithmetic-geometric mean with the principal square root chosen
/// closest to the running mean (flip the sign when |a-b| > |a+b|).
fn agm(a0: &Complex, b0: &Complex) -> Result<Complex> {
    let prec = a0.prec().0;
    let eps = Float::with_val(prec, 1) >> (prec - 8);
    let mut a = a0.clone();
    let mut b = b0.clone();
    for _ in 0..prec {
        let mut a1 = Complex::with_val(prec, &a + &b);
        a1 /= 2u32;
        let mut b1 = Complex::with_val(prec, &a * &b).sqrt();
        let diff = Complex::with_val(prec, &a1 - &b1).abs();
        let sum = Complex::with_val(prec, &a1 + &b1).abs();
        if diff.real() > sum.real() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        let gap = Complex::with_val(prec, &a - &b).abs();
        let scale = Complex::with_val(prec, &a).abs();
        if gap.real() <= &Float::with_val(prec, scale.real() * &eps) {
            return Ok(a);
        }
    }
    Err(Error::NoConvergence {
        what: "arithmetic-geometric mean",
        last: format!("{a} vs {b}"),
    })
}

/// Modulus `tau` in the upper half-plane from the sphere cross-ratio `z`,
/// via `tau = i AGM(1, sqrt(1-z)) / AGM(1, sqrt(z))`; satisfies
/// `z = theta_2^4/theta_3^4 (e^{i pi tau})`.
pub fn tau_from_cross_ratio(z: &Complex) -> Result<Complex> {
    let prec = z.prec().0;
    let one = Complex::with_val(prec, 1);
    let omz = Complex::with_val(prec, 1u32 - z);
    if z.is_zero() || omz.is_zero() {
        return Err(Error::Domain {
            what: "cross-ratio",
            detail: "z must avoid 0 and 1".into(),
        });
    }
    let num = agm(&one, &omz.sqrt())?;
    let den = agm(&one, &z.clone().sqrt())?;
    if den.is_zero() {
        return Err(Error::Domain {
            what: "cross-ratio",
            detail: "degenerate modulus".into(),
        });
    }
    let mut tau = Complex::with_val(prec, &num / &den);
    tau *= imag_unit(prec);
    if tau.imag().cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain {
            what: "cross-ratio",
            detail: format!("z = {z} maps outside the upper half-plane"),
        });
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::KacIndices;
    use crate::numerics::{cplx, rel_err};
    use crate::structure::dhat_diagonal;

    fn cc(prec: u32, beta: f64) -> CentralCharge {
        CentralCharge::new(Complex::with_val(prec, beta)).unwrap()
    }

    fn tol(prec: u32, slack: u32) -> Float {
        Float::with_val(prec, 1) >> (prec - slack)
    }

    #[test]
    fn h_zero_is_one_and_order_is_respected() {
        let prec = 192;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 5).unwrap();
        let delta = cplx(prec, 0.37, 0.0);
        let h = ctx.h_series(Channel::S, &delta).unwrap();
        assert_eq!(h.order(), 5);
        let one = Complex::with_val(prec, 1);
        assert_eq!(h.coefficients[0], one);
        assert!(BlockContext::torus(&ccv, &p1, 0).is_err(), "order 0 must be rejected");
    }

    #[test]
    fn torus_level_one_coefficient_matches_the_virasoro_trace() {
        // Independent oracle: the level-1 trace over the Verma module gives
        // 1 + Delta_1(Delta_1 - 1)/(2 Delta); stripping the eta-function
        // factor 1/prod(1-q^n) = 1 + q + ... leaves
        // h_1 = Delta_1(Delta_1 - 1)/(2 Delta).
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 3).unwrap();
        let delta = cplx(prec, 0.37, 0.0);
        let h = ctx.h_series(Channel::S, &delta).unwrap();
        let d1 = ccv.delta_of_p(&p1);
        let num = Complex::with_val(prec, &d1 * &(d1.clone() - 1u32));
        let expect = num / Complex::with_val(prec, &delta * 2u32);
        let err = rel_err(&h.coefficients[1], &expect);
        assert!(err < tol(prec, 32), "h1: {err}");
    }

    #[test]
    fn torus_series_reproduces_its_own_pole_residues() {
        // Antisymmetric probe around Delta_{(r,s)}: (h(+eps) - h(-eps)) eps/2
        // extracts the pole part, which must equal R_{r,s} h_{k-rs} at the
        // shifted dimension, coefficient by coefficient.
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let order = 8;
        let ctx = BlockContext::torus(&ccv, &p1, order).unwrap();
        let eps = Complex::with_val(prec, Float::with_val(prec, 1) >> 60);
        for (r, s) in [(1u32, 1u32), (2, 1), (1, 2), (2, 2)] {
            let d0 = ccv.delta_rs(&rint(r as i64), &rint(s as i64));
            let up = ctx
                .h_series(Channel::S, &Complex::with_val(prec, &d0 + &eps))
                .unwrap();
            let dn = ctx
                .h_series(Channel::S, &Complex::with_val(prec, &d0 - &eps))
                .unwrap();
            let shifted = ctx
                .h_series(Channel::S, &ccv.delta_rs(&rint(r as i64), &rint(-(s as i64))))
                .unwrap();
            let res = ctx.residue(r, s).unwrap();
            let level = (r * s) as usize;
            for k in 0..=order {
                let mut probe =
                    Complex::with_val(prec, &up.coefficients[k] - &dn.coefficients[k]);
                probe *= &eps;
                probe /= 2u32;
                if k < level {
                    // The antisymmetric probe leaves an O(eps^2) remainder
                    // from the regular part; 2^-120 times its derivative.
                    assert!(
                        probe.clone().abs().real().to_f64() < 1e-30,
                        "({r},{s}) k={k}: below-level coefficient should be regular"
                    );
                    continue;
                }
                let expect = Complex::with_val(prec, &res * &shifted.coefficients[k - level]);
                let err = rel_err(&probe, &expect);
                assert!(err.to_f64() < 1e-26, "({r},{s}) k={k}: {err}");
            }
        }
    }

    #[test]
    fn sphere_series_reproduces_its_own_pole_residues() {
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let ps = [
            cplx(prec, 0.41, 0.0),
            cplx(prec, 0.23, 0.0),
            cplx(prec, 0.57, 0.0),
            cplx(prec, 0.19, 0.0),
        ];
        let order = 6;
        let ctx = BlockContext::sphere(&ccv, &ps, order).unwrap();
        let eps = Complex::with_val(prec, Float::with_val(prec, 1) >> 60);
        let sixteen = Float::with_val(prec, 16);
        for (r, s) in [(1u32, 1u32), (2, 1), (3, 1)] {
            let d0 = ccv.delta_rs(&rint(r as i64), &rint(s as i64));
            let up = ctx
                .h_series(Channel::S, &Complex::with_val(prec, &d0 + &eps))
                .unwrap();
            let dn = ctx
                .h_series(Channel::S, &Complex::with_val(prec, &d0 - &eps))
                .unwrap();
            let shifted = ctx
                .h_series(Channel::S, &ccv.delta_rs(&rint(r as i64), &rint(-(s as i64))))
                .unwrap();
            let res = ctx.residue(r, s).unwrap();
            let level = (r * s) as usize;
            let scale = Float::with_val(prec, (&sixteen).pow(level as u32));
            for k in level..=order {
                let mut probe =
                    Complex::with_val(prec, &up.coefficients[k] - &dn.coefficients[k]);
                probe *= &eps;
                probe /= 2u32;
                let mut expect =
                    Complex::with_val(prec, &res * &shifted.coefficients[k - level]);
                expect *= &scale;
                let err = rel_err(&probe, &expect);
                assert!(err.to_f64() < 1e-26, "({r},{s}) k={k}: {err}");
            }
        }
    }

    #[test]
    fn torus_channel_maps_fix_their_fixed_points() {
        // tau = i is fixed by the t-map and tau = 1 + i by the u-map, so the
        // whole transform collapses to the power prefactor i^{-Delta_1}.
        let prec = 224;
        let ccv = cc(prec, 0.87);
        let p1 = cplx(prec, 0.31, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 8).unwrap();
        let p = cplx(prec, 0.3, 0.1);
        let d1 = ccv.delta_of_p(&p1);
        // i^{-Delta_1} = exp(-i pi Delta_1 / 2).
        let mut phase = Complex::with_val(prec, (0, pi(prec)));
        phase *= &d1;
        phase /= -2i32;
        let phase = phase.exp();

        let tau_t = cplx(prec, 0.0, 1.0);
        let s_val = ctx.full_block(Channel::S, &p, &tau_t).unwrap();
        let t_val = ctx.full_block(Channel::T, &p, &tau_t).unwrap();
        let expect = Complex::with_val(prec, &phase * &s_val);
        let err = rel_err(&t_val, &expect);
        assert!(err < tol(prec, 40), "t-channel at i: {err}");

        let tau_u = cplx(prec, 1.0, 1.0);
        let s_val = ctx.full_block(Channel::S, &p, &tau_u).unwrap();
        let u_val = ctx.full_block(Channel::U, &p, &tau_u).unwrap();
        let expect = Complex::with_val(prec, &phase * &s_val);
        let err = rel_err(&u_val, &expect);
        assert!(err < tol(prec, 40), "u-channel at 1+i: {err}");
    }

    #[test]
    fn sphere_channel_maps_fix_their_fixed_points() {
        // Externals (a, b, a, a): both permutations preserve the residue
        // pattern, so at the fixed points only the stated prefactors remain.
        let prec = 224;
        let ccv = cc(prec, 0.87);
        let a = cplx(prec, 0.41, 0.0);
        let b = cplx(prec, 0.28, 0.0);
        let ps = [a.clone(), b.clone(), a.clone(), a.clone()];
        let ctx = BlockContext::sphere(&ccv, &ps, 6).unwrap();
        let p = cplx(prec, 0.33, 0.0);
        let p11 = ccv.momentum(&rint(1), &rint(1));
        let mut delta = -Complex::with_val(prec, &p11 * &p11);
        for pk in &ps {
            delta += Complex::with_val(prec, pk * pk);
        }
        // i^{-2 delta} = exp(-i pi delta).
        let mut phase_t = Complex::with_val(prec, (0, pi(prec)));
        phase_t *= &delta;
        let phase_t = (-phase_t).exp();

        let tau_t = cplx(prec, 0.0, 1.0);
        let s_val = ctx.full_block(Channel::S, &p, &tau_t).unwrap();
        let t_val = ctx.full_block(Channel::T, &p, &tau_t).unwrap();
        let expect = Complex::with_val(prec, &phase_t * &s_val);
        let err = rel_err(&t_val, &expect);
        assert!(err < tol(prec, 32), "t-channel at i: {err}");

        // u at 1+i: (tau-1)^{-2 delta} = i^{-2 delta} times the phase
        // exp(i pi (P_2^2 + P_3^2)).
        let mut extra = Complex::with_val(prec, &b * &b);
        extra += Complex::with_val(prec, &a * &a);
        let mut phase_u = Complex::with_val(prec, (0, pi(prec)));
        phase_u *= &extra;
        let phase_u = Complex::with_val(prec, phase_u.exp() * &phase_t);
        let tau_u = cplx(prec, 1.0, 1.0);
        let s_val = ctx.full_block(Channel::S, &p, &tau_u).unwrap();
        let u_val = ctx.full_block(Channel::U, &p, &tau_u).unwrap();
        let expect = Complex::with_val(prec, &phase_u * &s_val);
        let err = rel_err(&u_val, &expect);
        assert!(err < tol(prec, 32), "u-channel at 1+i: {err}");
    }

    #[test]
    fn block_derivative_matches_finite_differences() {
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 6).unwrap();
        let tau = cplx(prec, 0.11, 1.02);
        let (_, deriv) = ctx
            .regularized_block_and_derivative(Channel::S, Mover::Left, 1, 2, &tau)
            .unwrap();
        let pm = ccv.momentum(&rint(1), &rint(-2));
        let h = Complex::with_val(prec, Float::with_val(prec, 1) >> 85);
        let up = ctx
            .chiral_block(
                Channel::S,
                Mover::Left,
                &Complex::with_val(prec, &pm + &h),
                &tau,
            )
            .unwrap();
        let dn = ctx
            .chiral_block(
                Channel::S,
                Mover::Left,
                &Complex::with_val(prec, &pm - &h),
                &tau,
            )
            .unwrap();
        let mut fd = Complex::with_val(prec, up - dn);
        fd /= Complex::with_val(prec, &h * 2u32);
        let err = rel_err(&deriv, &fd);
        assert!(err.to_f64() < 1e-26, "derivative vs finite difference: {err}");
    }

    #[test]
    fn pole_extraction_matches_the_printed_expansion() {
        // Near P_{(r,s)}: F = R/(2P_{(r,s)}(P - P_{(r,s)})) F_{P_{(r,-s)}}
        // + Freg + O(P - P_{(r,s)}).
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 6).unwrap();
        let tau = cplx(prec, 0.07, 0.93);
        let (r, s) = (1u32, 1u32);
        let p0 = ccv.momentum(&rint(1), &rint(1));
        let pm = ccv.momentum(&rint(1), &rint(-1));
        let eps = Complex::with_val(prec, Float::with_val(prec, 1) >> 60);
        let up = ctx
            .chiral_block(Channel::S, Mover::Left, &Complex::with_val(prec, &p0 + &eps), &tau)
            .unwrap();
        let dn = ctx
            .chiral_block(Channel::S, Mover::Left, &Complex::with_val(prec, &p0 - &eps), &tau)
            .unwrap();
        // Pole coefficient from the antisymmetric probe.
        let mut probe = Complex::with_val(prec, &up - &dn);
        probe *= &eps;
        probe /= 2u32;
        // Exact truncated identity: the order-N pole coefficient carries the
        // order-(N - rs) series at the shifted momentum.
        let res = ctx.residue(r, s).unwrap();
        let ctx_low = BlockContext::torus(&ccv, &p1, 6 - (r * s) as usize).unwrap();
        let f_pm = ctx_low
            .chiral_block(Channel::S, Mover::Left, &pm, &tau)
            .unwrap();
        let mut expect = Complex::with_val(prec, &res * &f_pm);
        expect /= Complex::with_val(prec, &p0 * 2u32);
        let direct = ctx
            .pole_coefficient(Channel::S, Mover::Left, r, s, &tau)
            .unwrap();
        let err = rel_err(&direct, &expect);
        assert!(err.to_f64() < 1e-60, "pole_coefficient identity: {err}");
        // The antisymmetric probe reproduces it up to O(eps^2).
        let err = rel_err(&probe, &direct);
        assert!(err.to_f64() < 1e-28, "pole coefficient probe: {err}");
        // Regular part from the symmetric average, same O(eps^2) remainder.
        let mut avg = Complex::with_val(prec, &up + &dn);
        avg /= 2u32;
        let (reg, _) = ctx
            .regularized_block_and_derivative(Channel::S, Mover::Left, r, s, &tau)
            .unwrap();
        let err = rel_err(&avg, &reg);
        assert!(err.to_f64() < 1e-28, "regular part: {err}");
    }

    #[test]
    fn regularized_block_falls_back_when_the_residue_vanishes() {
        // Degenerate external <1,3>: R_{1,2} = 0, so there is no pole to
        // subtract and the regularized value is the plain block.
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let p1 = ccv.momentum(&rint(1), &rint(3));
        let ctx = BlockContext::torus(&ccv, &p1, 6).unwrap();
        let tau = cplx(prec, 0.09, 1.07);
        assert!(ctx.residue(1, 2).unwrap().is_zero());
        let (reg, _) = ctx
            .regularized_block_and_derivative(Channel::S, Mover::Left, 1, 2, &tau)
            .unwrap();
        let p0 = ccv.momentum(&rint(1), &rint(2));
        let plain = ctx.chiral_block(Channel::S, Mover::Left, &p0, &tau).unwrap();
        let err = rel_err(&reg, &plain);
        assert!(err < tol(prec, 16), "fallback: {err}");
        let pole = ctx
            .pole_coefficient(Channel::S, Mover::Left, 1, 2, &tau)
            .unwrap();
        assert!(pole.is_zero(), "no residue, no pole coefficient");
    }

    #[test]
    fn near_pole_channel_dimensions_are_rejected() {
        let prec = 256;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 4).unwrap();
        let d0 = ccv.delta_rs(&rint(1), &rint(1));
        let close = Complex::with_val(prec, Float::with_val(prec, 1) >> 200);
        let err = ctx.h_series(Channel::S, &Complex::with_val(prec, &d0 + &close));
        assert!(matches!(err, Err(Error::Domain { .. })), "must reject 2^-200 offset");
        let far = Complex::with_val(prec, Float::with_val(prec, 1) >> 60);
        assert!(ctx
            .h_series(Channel::S, &Complex::with_val(prec, &d0 + &far))
            .is_ok());
    }

    #[test]
    fn log_block_matches_the_direct_residue_combination() {
        // Defining combination: G = 2 P_{(r,s)} / (Rbar Dhat_{P_{(r,s)}})
        // [Res_{P=P_{(r,s)}} + Res_{P=P_{(r,-s)}}] Dhat_P F_P Fbar_P, with the
        // residues taken by circle quadrature around each point (the second
        // is a double pole of Dhat_P, which the quadrature handles).  At
        // truncation order N the identity holds up to relative
        // O(|q|^{N-rs+1}), so the residual must also shrink with N at the
        // |q|^N rate.
        let prec = 320;
        let ccv = cc(prec, 0.83);
        let r1s1 = KacIndices::new(rint(2), rat(1, 2));
        let ext = Field::non_diagonal(&ccv, r1s1.clone()).unwrap();
        let tau = cplx(prec, 0.13, 1.08);
        let (r, s) = (1u32, 1u32);
        let p0 = ccv.momentum(&rint(1), &rint(1));
        let pm = ccv.momentum(&rint(1), &rint(-1));

        let residual = |order: usize| -> Float {
            let blocks = NonChiralBlocks::torus(&ccv, &ext, order).unwrap();
            let ell = blocks.ell_torus(r, s).unwrap();
            let got = blocks.log_block(Channel::S, r, s, &tau, &ell).unwrap();
            let w = |p: &Complex| -> Complex {
                let d = dhat_diagonal(&ccv, &r1s1, p).unwrap();
                let fl = blocks
                    .left()
                    .chiral_block(Channel::S, Mover::Left, p, &tau)
                    .unwrap();
                let fr = blocks
                    .right()
                    .chiral_block(Channel::S, Mover::Right, p, &tau)
                    .unwrap();
                let mut out = Complex::with_val(prec, &d * &fl);
                out *= fr;
                out
            };
            let quad_residue = |center: &Complex| -> Complex {
                let m = 8u32;
                let eps = Float::with_val(prec, 1) >> 16;
                let mut acc = Complex::new(prec);
                for k in 0..m {
                    let angle = Float::with_val(prec, 2 * k) * pi(prec) / m;
                    let dir =
                        Complex::with_val(prec, (angle.clone().cos(), angle.sin()));
                    let offset = Complex::with_val(prec, &dir * &eps);
                    let point = Complex::with_val(prec, center + &offset);
                    let mut term = w(&point);
                    term *= offset;
                    acc += term;
                }
                acc / m
            };
            let res_sum =
                Complex::with_val(prec, quad_residue(&p0) + quad_residue(&pm));
            let rbar = blocks.right().residue(r, s).unwrap();
            let dhat0 = dhat_diagonal(&ccv, &r1s1, &p0).unwrap();
            let mut expect = Complex::with_val(prec, &p0 * 2u32);
            expect /= Complex::with_val(prec, &rbar * &dhat0);
            expect *= res_sum;
            rel_err(&got, &expect)
        };

        let two_pi_y = Float::with_val(prec, 2) * pi(prec) * tau.imag();
        let q_abs = (-two_pi_y).exp();
        let e5 = residual(5);
        let e8 = residual(8);
        let bound = |n: u32| -> f64 {
            let p = Float::with_val(prec, (&q_abs).pow(n));
            p.to_f64() * 1e4
        };
        assert!(e5.to_f64() < bound(5), "order 5 residual too large: {e5}");
        assert!(e8.to_f64() < bound(8), "order 8 residual too large: {e8}");
        assert!(
            e8.to_f64() < e5.to_f64() * q_abs.to_f64().powi(3) * 1e3,
            "residual does not shrink at the truncation rate: {e5} -> {e8}"
        );
    }

    #[test]
    fn ell_closed_form_matches_the_defining_limit() {
        // ell = -Dhat'/Dhat at P_{(r,s)} plus the regularized limit of
        // 2/(P - P_{(r,-s)}) + Dhat'/Dhat at P_{(r,-s)}, with Dhat' taken
        // numerically.
        let prec = 384;
        let ccv = cc(prec, 0.83);
        let r1s1 = KacIndices::from_i64(1, 0);
        let ext = Field::non_diagonal(&ccv, r1s1.clone()).unwrap();
        let blocks = NonChiralBlocks::torus(&ccv, &ext, 2).unwrap();
        let (r, s) = (1u32, 1u32);
        let got = blocks.ell_torus(r, s).unwrap();

        let h = Complex::with_val(prec, Float::with_val(prec, 1) >> 80);
        let dlog = |p: &Complex| -> Complex {
            let up = dhat_diagonal(&ccv, &r1s1, &Complex::with_val(prec, p + &h)).unwrap();
            let dn = dhat_diagonal(&ccv, &r1s1, &Complex::with_val(prec, p - &h)).unwrap();
            let mid = dhat_diagonal(&ccv, &r1s1, p).unwrap();
            let mut out = Complex::with_val(prec, up - dn);
            out /= Complex::with_val(prec, &h * 2u32);
            out /= mid;
            out
        };
        let p0 = ccv.momentum(&rint(1), &rint(1));
        let pm = ccv.momentum(&rint(1), &rint(-1));
        let term1 = dlog(&p0);
        let probe = |eps: &Complex| -> Complex {
            let point = Complex::with_val(prec, &pm + eps);
            let mut out = Complex::with_val(prec, 2u32 / eps);
            out += dlog(&point);
            out
        };
        let eps = Complex::with_val(prec, Float::with_val(prec, 1) >> 40);
        let mut term2 = probe(&eps);
        term2 += probe(&-eps.clone());
        term2 /= 2u32;
        let mut expect = term2;
        expect -= term1;
        let err = rel_err(&got, &expect);
        assert!(err.to_f64() < 1e-20, "ell limit: {err}");
    }

    #[test]
    fn g_block_follows_the_lattice_conventions() {
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let ext = Field::non_diagonal(&ccv, KacIndices::from_i64(1, 0)).unwrap();
        let blocks = NonChiralBlocks::torus(&ccv, &ext, 6).unwrap();
        let tau = cplx(prec, 0.12, 1.11);
        // Negative integer s: zero by convention.
        let z = blocks
            .g_block(Channel::S, &rint(2), &rint(-1), &tau, None)
            .unwrap();
        assert!(z.is_zero());
        // Fractional s: plain product of left and right movers.
        let g = blocks
            .g_block(Channel::S, &rat(3, 2), &rat(1, 3), &tau, None)
            .unwrap();
        let p = ccv.momentum(&rat(3, 2), &rat(1, 3));
        let pbar = ccv.momentum(&rat(3, 2), &rat(-1, 3));
        let l = blocks
            .left()
            .chiral_block(Channel::S, Mover::Left, &p, &tau)
            .unwrap();
        let rr = blocks
            .right()
            .chiral_block(Channel::S, Mover::Right, &pbar, &tau)
            .unwrap();
        let expect = Complex::with_val(prec, l * rr);
        let err = rel_err(&g, &expect);
        assert!(err < tol(prec, 24), "generic product: {err}");
    }

    #[test]
    fn degenerate_external_routes_to_plain_blocks() {
        // <1,3> external: R and Rbar vanish at (r,s)=(1,2); log_block must
        // refuse and g_block must hand back the plain product.
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let ext = Field::degenerate(&ccv, 3);
        let blocks = NonChiralBlocks::torus(&ccv, &ext, 6).unwrap();
        let tau = cplx(prec, 0.1, 1.03);
        let ell = Complex::new(prec);
        let err = blocks.log_block(Channel::S, 1, 2, &tau, &ell);
        assert!(matches!(err, Err(Error::LogBlockDegenerate(_))));
        let g = blocks
            .g_block(Channel::S, &rint(1), &rint(2), &tau, None)
            .unwrap();
        let p = ccv.momentum(&rint(1), &rint(2));
        let pbar = ccv.momentum(&rint(1), &rint(-2));
        let l = blocks
            .left()
            .chiral_block(Channel::S, Mover::Left, &p, &tau)
            .unwrap();
        let rr = blocks
            .right()
            .chiral_block(Channel::S, Mover::Right, &pbar, &tau)
            .unwrap();
        let expect = Complex::with_val(prec, l * rr);
        let err = rel_err(&g, &expect);
        assert!(err < tol(prec, 24), "plain-product fallback: {err}");
    }

    #[test]
    fn interchiral_towers_truncate_and_chain_correctly() {
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let r1s1 = KacIndices::from_i64(1, 0);
        let ext = Field::non_diagonal(&ccv, r1s1.clone()).unwrap();
        let blocks = NonChiralBlocks::torus(&ccv, &ext, 4).unwrap();
        let tau = cplx(prec, 0.08, 1.13);
        let r = rat(3, 2);
        let s0 = rat(1, 3);
        // s_max below |s0| + 2: single term.
        let single = blocks
            .interchiral_block(Channel::S, &r, &s0, &rat(1, 3), &tau)
            .unwrap();
        let g0 = blocks.g_block(Channel::S, &r, &s0, &tau, None).unwrap();
        let err = rel_err(&single, &g0);
        assert!(err < tol(prec, 24), "single term: {err}");
        // s_max = 7/3 brings in s' = 7/3 and s' = -5/3, with weights given by
        // direct quotients of the reference constants.
        let wide = blocks
            .interchiral_block(Channel::S, &r, &s0, &rat(7, 3), &tau)
            .unwrap();
        let dhat = |s_num: i64, s_den: i64| -> Complex {
            crate::structure::dhat_nondiagonal(
                &ccv,
                &r1s1,
                &KacIndices::new(r.clone(), rat(s_num, s_den)),
            )
            .unwrap()
        };
        let d0 = dhat(1, 3);
        let up = Complex::with_val(prec, &dhat(7, 3) / &d0);
        let dn = Complex::with_val(prec, &dhat(-5, 3) / &d0);
        let gu = blocks.g_block(Channel::S, &r, &rat(7, 3), &tau, None).unwrap();
        let gd = blocks.g_block(Channel::S, &r, &rat(-5, 3), &tau, None).unwrap();
        let mut expect = g0;
        expect += Complex::with_val(prec, &up * &gu);
        expect += Complex::with_val(prec, &dn * &gd);
        let err = rel_err(&wide, &expect);
        assert!(err < tol(prec, 40), "three terms: {err}");
    }

    #[test]
    fn cross_ratio_modulus_satisfies_the_theta_identities() {
        let prec = 256;
        // z = 1/2 is the t-channel fixed point tau = i.
        let z = cplx(prec, 0.5, 0.0);
        let tau = tau_from_cross_ratio(&z).unwrap();
        let expect = cplx(prec, 0.0, 1.0);
        let err = rel_err(&tau, &expect);
        assert!(err < tol(prec, 24), "z=1/2: {err}");
        // Generic complex z: theta_2^4/theta_3^4 = z and
        // theta_4^4/theta_3^4 = 1 - z at the computed nome.
        let z = cplx(prec, 0.3, 0.1);
        let tau = tau_from_cross_ratio(&z).unwrap();
        assert!(tau.imag().cmp0() == Some(std::cmp::Ordering::Greater));
        let half = Complex::with_val(prec, 0.5);
        let q = exp_2pi_i(&tau, &half);
        let fourth = |k: u8| -> Complex {
            let t = theta(k, &q).unwrap();
            let sq = Complex::with_val(prec, &t * &t);
            Complex::with_val(prec, &sq * &sq)
        };
        let t2 = fourth(2);
        let t3 = fourth(3);
        let t4 = fourth(4);
        let zz = Complex::with_val(prec, &t2 / &t3);
        let err = rel_err(&zz, &z);
        assert!(err < tol(prec, 40), "theta ratio z: {err}");
        let omz = Complex::with_val(prec, &t4 / &t3);
        let expect = Complex::with_val(prec, 1u32 - &z);
        let err = rel_err(&omz, &expect);
        assert!(err < tol(prec, 40), "theta ratio 1-z: {err}");
    }

    #[test]
    fn sphere_series_coefficients_follow_the_torus_dictionary() {
        // For externals (V0', V1', V0', V0') at beta' = beta/sqrt2 the sphere
        // series is the torus series in the square root of the nome:
        // even coefficients match, odd ones vanish.
        let prec = 256;
        let beta = 0.83_f64;
        let cct = cc(prec, beta);
        let sqrt2 = Float::with_val(prec, 2).sqrt();
        let ccs = CentralCharge::new(Complex::with_val(prec, cct.beta() / &sqrt2)).unwrap();
        let p1 = cplx(prec, 0.41, 0.0);
        let torus = BlockContext::torus(&cct, &p1, 4).unwrap();
        let p0s = ccs.momentum(&rint(0), &rat(1, 2));
        let p1s = Complex::with_val(prec, &p1 / &sqrt2);
        let sphere = BlockContext::sphere(
            &ccs,
            &[p0s.clone(), p1s, p0s.clone(), p0s],
            8,
        )
        .unwrap();
        let p = cplx(prec, 0.31, 0.0);
        let delta_t = cct.delta_of_p(&p);
        let p_s = Complex::with_val(prec, &p * &sqrt2);
        let delta_s = ccs.delta_of_p(&p_s);
        let ht = torus.h_series(Channel::S, &delta_t).unwrap();
        let hs = sphere.h_series(Channel::S, &delta_s).unwrap();
        for k in 0..=4usize {
            let err = rel_err(&hs.coefficients[2 * k], &ht.coefficients[k]);
            assert!(err < tol(prec, 60), "even coefficient {k}: {err}");
        }
        for k in [1usize, 3, 5, 7] {
            assert!(
                hs.coefficients[k].clone().abs().real() < &tol(prec, 60),
                "odd coefficient {k} should vanish: {}",
                hs.coefficients[k]
            );
        }
    }

    #[test]
    fn order_one_block_is_the_prefactor_times_the_first_correction() {
        let prec = 224;
        let ccv = cc(prec, 0.83);
        let p1 = cplx(prec, 0.41, 0.0);
        let ctx = BlockContext::torus(&ccv, &p1, 1).unwrap();
        let tau = cplx(prec, 0.05, 1.21);
        let p = cplx(prec, 0.29, 0.0);
        let got = ctx.full_block(Channel::S, &p, &tau).unwrap();
        // Manual assembly: q^{P^2}/eta(tau) * (1 + h_1 q).
        let one = Complex::with_val(prec, 1);
        let q = exp_2pi_i(&tau, &one);
        let eta = dedekind_eta(&tau).unwrap();
        let p2 = Complex::with_val(prec, &p * &p);
        let qp2 = cpow(&q, &p2).unwrap();
        let delta = ccv.delta_of_p(&p);
        let d1 = ccv.delta_of_p(&p1);
        let num = Complex::with_val(prec, &d1 * &(d1.clone() - 1u32));
        let h1 = num / Complex::with_val(prec, &delta * 2u32);
        let mut expect = Complex::with_val(prec, &h1 * &q);
        expect += 1u32;
        expect *= &qp2;
        expect /= &eta;
        let err = rel_err(&got, &expect);
        assert!(err < tol(prec, 40), "order-1 block: {err}");
    }
}
