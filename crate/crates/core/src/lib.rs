//! Rate bounds and executable coding schemes for secret sharing over
//! classical-quantum broadcast channels.
//!
//! A dealer encodes a secret for transmission over a noisy broadcast channel
//! to `L` users; authorized sets of users must recover the secret while
//! unauthorized sets must learn nothing. This crate computes one-shot,
//! second-order and asymptotic achievable rates, converse bounds, and the
//! classical secret sharing capacity for monotone access structures, and runs
//! the underlying construction (2-universal hashing, shaper, syndrome source
//! coding, encoder selection) end-to-end on classical channels.

pub mod entropies;
pub mod error;
pub mod matrix;
pub mod model;
pub mod optimizer;
pub mod protocol;
pub mod rates;

pub use error::{Error, Result};
pub use matrix::{DensityOperator, HermitianOperator};
pub use model::{AccessStructure, CqBroadcastChannel, CqState, InputDistribution};
pub use rates::{EpsilonBudget, RateReport};
