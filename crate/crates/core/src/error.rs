//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Unified error type for geometry, constants, dynamics, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data: dimension mismatches, empty spanning sets where a
    /// nonempty one is required, inconsistent member lists, and similar.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scalar parameter outside its admissible range (relaxation weights,
    /// band parameters, exponents, thresholds).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A member or sequence index outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A combinatorial size guard tripped (too many members for exhaustive
    /// subset enumeration, mask width exceeded).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The variational oracle is undefined for the given pair (e.g. both
    /// arguments span the same subspace).
    #[error("oracle undefined: {0}")]
    UndefinedOracle(String),

    /// A sampling-based estimate had no usable samples.
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),

    /// A displacement profile cannot be formed (zero initial point).
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    /// A verification routine needs data that the record does not carry
    /// (e.g. retained iterates).
    #[error("missing data: {0}")]
    MissingData(String),

    /// Two objects that must agree (profile vs. constants) do not.
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
