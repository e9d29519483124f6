//! Error types shared across the simulation core.

use thiserror::Error;

/// Configuration problems: bad prime-pool bounds, invalid sweep definitions,
/// parameter values outside their domain. These are fatal before any
/// simulation work starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("pool norm range must satisfy 5 <= min <= max, got [{min}, {max}]")]
    InvalidPoolRange { min: u64, max: u64 },
    #[error("pool norm range [{min}, {max}] contains no prime congruent to 1 mod 4")]
    EmptyPoolRange { min: u64, max: u64 },
    #[error("pool too small: {nodes} nodes need {nodes} distinct primes, pool has {pool}")]
    PoolTooSmall { nodes: usize, pool: usize },
    #[error("pool too large: product of the {nodes} largest norms overflows 64-bit range")]
    PoolProductOverflow { nodes: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("conflicting sweep definitions: {0}")]
    ConflictingSweeps(String),
}

/// Domain errors from the factorization engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("cannot factor 0")]
    ZeroInput,
}

/// Domain errors from the channel model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("distance must be positive and finite, got {0}")]
    NonPositiveDistance(f64),
    #[error("Rician K-factor must be non-negative and finite, got {0}")]
    InvalidKFactor(f64),
    #[error("{0}")]
    InvalidGeometry(String),
}

/// Per-round protocol failures. These mark a trial as failed; they never
/// abort a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("estimated channel gain is exactly zero")]
    DegenerateChannel,
    #[error("pre-processing input must be nonzero")]
    ZeroInput,
}
