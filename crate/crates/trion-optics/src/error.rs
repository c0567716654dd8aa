use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how a caller should react: `InvalidParam`/`Grid` are usage
/// errors detectable before any computation, `Unfittable`/`UnderDetermined`/`Numerics`
/// are reported by the deterministic fits, and the remaining variants are runtime guards
/// of the stochastic engines.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its domain (NaN, wrong sign, out of range).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A grid or stream violates its structural contract (empty, unsorted, mismatched).
    #[error("invalid grid or stream: {0}")]
    Grid(String),

    /// Mean detected intensity is zero; correlation functions are undefined.
    #[error("dark field: mean detected intensity is zero at the requested parameters")]
    DarkField,

    /// The detected-channel rate mapped from the field coupling exceeds the total
    /// emitter decay rate, which would require negative residual loss.
    #[error("overcoupled detector: detected channel rate {detected:.6} ns^-1 exceeds emitter decay {gamma:.6} ns^-1")]
    Overcoupled { detected: f64, gamma: f64 },

    /// A fit converged but its residual exceeds the contract threshold.
    #[error("targets not fittable: residual {residual:.6} exceeds threshold {threshold:.6}")]
    Unfittable { residual: f64, threshold: f64 },

    /// A fit was asked to determine more parameters than the targets constrain.
    #[error("under-determined fit: {0}")]
    UnderDetermined(String),

    /// A numerical routine failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerics(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn grid(msg: impl Into<String>) -> Self {
        Error::Grid(msg.into())
    }
}
