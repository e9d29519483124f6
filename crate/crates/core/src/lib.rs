//! Simulation core for a decentralized over-the-air secret-key agreement
//! scheme in which every node contributes a Gaussian prime and recovers the
//! product of all contributions from the superposed analog signal.
//!
//! The crate is organized around the signal path:
//!
//! * [`gaussint`] — exact Gaussian-integer arithmetic and the prime pool the
//!   nodes draw their key material from.
//! * [`factorint`] — integer factorization (trial division, Pollard rho and
//!   p−1) plus the tolerance-window search that recovers a key norm from a
//!   noisy observation.
//! * [`channel`] — reciprocal Rician small-scale gains, free-space path loss
//!   and additive channel-estimation error.
//! * [`protocol`] — one key-generation round: log-domain pre-processing,
//!   superposition with thermal noise, exponential post-processing.
//! * [`harness`] — the Monte Carlo engine: deterministic per-trial random
//!   substreams, parameter sweeps and success-rate aggregation.
//!
//! Trials are embarrassingly parallel. With the default `parallel` feature
//! the harness runs them on a rayon pool; without it the same code runs
//! sequentially. Results are bit-identical either way because every trial
//! derives its own counter-based random stream.

pub mod channel;
pub mod error;
pub mod factorint;
pub mod gaussint;
pub mod harness;
pub mod protocol;

pub use channel::{ChannelRealization, Geometry, PathLossMode, RicianParams};
pub use error::{ChannelError, ConfigError, FactorError, ProtocolError};
pub use factorint::{FactorMode, FactorPolicy, Factorization, SearchOutcome};
pub use gaussint::{GaussianInt, PrimePool};
pub use harness::{
    plateau_oracle, run_sweep, run_sweep_seq, SimulationConfig, SuccessScope, SweepParam,
    SweepPointResult,
};
pub use protocol::{NodeState, RoundOutcome};

/// Speed of light in vacuum, m/s. Used to turn a carrier frequency into the
/// wavelength entering the free-space path-loss formula.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
