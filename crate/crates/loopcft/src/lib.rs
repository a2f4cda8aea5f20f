//! Arbitrary-precision engine for correlation data of two-dimensional critical
//! loop models.
//!
//! The crate computes torus one-point and sphere four-point correlation
//! functions of loop models as conformal-block decompositions, with exact
//! polynomial structure constants in the loop weights. It provides:
//!
//! - arbitrary-precision special functions (complex Gamma, digamma, Barnes
//!   double Gamma, Jacobi theta, Dedekind eta) in [`numerics`],
//! - exact rational / quadratic-extension polynomial arithmetic in [`algebra`],
//! - central-charge kinematics and spectrum builders in [`kinematics`],
//! - combinatorial maps of loop configurations in [`maps`],
//! - Virasoro, logarithmic and interchiral conformal blocks in [`blocks`],
//! - reference structure constants and the polynomial ansatz in [`structure`],
//! - modular-covariance / crossing least-squares solvers in [`solver`],
//! - the sphere-torus dictionary in [`sphere_torus`],
//! - closed-form partition functions and degenerate one-point functions in
//!   [`exact`],
//! - machine-readable polynomial tables in [`table`].
//!
//! All floating computation is done with MPFR/MPC via the `rug` crate; every
//! value carries its own mantissa precision and nothing is silently downcast
//! to machine floats. Exact data (Kac indices, polynomial coefficients) is
//! kept in `num` rationals, optionally extended by sqrt(3) or sqrt(5).

pub mod algebra;
pub mod blocks;
pub mod error;
pub mod exact;
pub mod kinematics;
pub mod maps;
pub mod numerics;
pub mod solver;
pub mod sphere_torus;
pub mod structure;
pub mod table;

pub use error::{Error, Result};

/// Working precision in mantissa bits.
///
/// Every tolerance in the crate is expressed relative to `2^(-bits)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    bits: u32,
}

impl Precision {
    /// Default working precision used by the solvers and the CLI.
    pub const DEFAULT_BITS: u32 = 256;

    /// Creates a precision; `bits` must be at least 64.
    pub fn new(bits: u32) -> Result<Self> {
        if bits < 64 {
            return Err(Error::Precision(bits));
        }
        Ok(Self { bits })
    }

    /// Mantissa bits.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `2^(-bits + slack)` as an `f64` exponent comparison helper.
    pub fn eps_shifted(&self, slack: i64) -> rug::Float {
        let mut e = rug::Float::with_val(64, 1u32);
        e >>= (self.bits as i64 - slack) as u32;
        e
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
        }
    }
}
