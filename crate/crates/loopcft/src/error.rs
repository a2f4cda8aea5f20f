//! Crate-wide error type.

use num::BigRational;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Precision below the supported minimum of 64 bits.
    #[error("precision must be at least 64 bits, got {0}")]
    Precision(u32),

    /// Gamma function evaluated at a non-positive integer.
    #[error("gamma pole at non-positive integer argument {0}")]
    GammaPole(String),

    /// Barnes double Gamma evaluated at a lattice pole -m*beta - n/beta.
    #[error("double gamma pole at lattice point {0} (m={1}, n={2})")]
    DoubleGammaPole(String, u64, u64),

    /// Internal series failed to reach the requested tolerance.
    #[error("series for {what} did not converge: last term {last}")]
    NoConvergence { what: &'static str, last: String },

    /// Argument outside the function's domain.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// Invalid spectrum truncation.
    #[error("inconsistent truncation: r_max {r_max} below signature {sigma}")]
    Truncation { r_max: BigRational, sigma: BigRational },

    /// Structure-constant formula hit an uncancelled Gamma_beta pole.
    #[error("uncancelled double-gamma pole in {formula} at argument {arg}")]
    PoleCollision { formula: &'static str, arg: String },

    /// Assembled structure constant evaluated exactly at its w-pole.
    #[error("structure constant has a pole at w = w_(r,s) = {0}")]
    WPole(String),

    /// Logarithmic block requested where the formula degenerates.
    #[error("logarithmic block degenerates: {0}")]
    LogBlockDegenerate(String),

    /// Linear solve failed.
    #[error("solver: {0}")]
    Solver(String),

    /// Polynomial coefficient could not be rationalized.
    #[error("rationalization failed for value {value} (threshold {threshold})")]
    Rationalize { value: String, threshold: String },

    /// Malformed polynomial table document.
    #[error("table format error at {path}: {detail}")]
    TableFormat { path: String, detail: String },

    /// Mixing incompatible quadratic extensions (sqrt3 with sqrt5).
    #[error("incompatible quadratic extensions: sqrt{0} vs sqrt{1}")]
    MixedExtension(u32, u32),

    /// Underlying I/O error.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization error.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
