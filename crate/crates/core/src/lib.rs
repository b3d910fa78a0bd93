//! Ruin probabilities for an insurance risk process whose capital is invested
//! in a geometric Brownian motion.
//!
//! The capital evolves as
//!
//! ```text
//! X_t = u + a ∫ X_s ds + σ ∫ X_s dw_s + ∫ c_s ds − Σ_{i ≤ N_t} ξ_i
//! ```
//!
//! with Poisson claim arrivals of intensity α. When `β = 2a/σ² − 1 > 0` the
//! ruin probability decays like `u^{−β}`; when `β ≤ 0` ruin is certain.
//!
//! The crate is organised by concern:
//!
//! * [`model`], [`claims`], [`premium`]: parameters and the building blocks
//!   shared by every simulator.
//! * [`analytics`]: closed-form constants and tail-slope fitting.
//! * [`chain`] and [`bridge`]: exact simulation of the capital sampled at claim
//!   instants, with the discounted premium integral evaluated on a Brownian
//!   bridge.
//! * [`fixed_point`]: perpetuity samplers and the tail constant estimator.
//! * [`oracle`]: a brute-force time-stepping simulator used to cross-check the
//!   chain.
//! * [`ergodic`]: random-coefficient AR(1) utilities and ladder epochs for the
//!   critical case.

// Parameter guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod bridge;
pub mod chain;
pub mod claims;
pub mod ergodic;
mod error;
pub mod fixed_point;
pub mod model;
pub mod oracle;
pub mod premium;
pub mod rng;
pub mod stats;

pub use analytics::{BoundsReport, TailFit, TailPoint};
pub use bridge::BridgeGrid;
pub use chain::{EmbeddedStep, PathOutcome, RuinEstimate, SimConfig};
pub use claims::ClaimDistribution;
pub use error::{Error, Result};
pub use fixed_point::{PerpetuityConfig, TailConstantEstimate};
pub use model::{ModelParams, Regime};
pub use ergodic::{ArSpec, LadderSequence};
pub use oracle::{ComparisonReport, OracleConfig};
pub use premium::PremiumSchedule;
