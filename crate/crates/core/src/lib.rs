//! Link-level simulation and outage analysis of two-user MIMO-NOMA downlink
//! with QR precoding.
//!
//! The base station has `M` antennas and serves two users with `N` antennas
//! each. The precoder is taken from the QR decomposition of user 2's channel,
//! which turns user 2's receiver into a layered SIC decoder; user 1 uses
//! zero forcing (or QR-based successive detection). Power is split on every
//! layer according to one of two policies, and outage probabilities are
//! obtained both by Monte Carlo and in closed form.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod allocation;
pub mod analytics;
pub mod benchmarks;
pub mod channel;
pub mod config;
pub mod error;
pub mod link;
pub mod matrixkit;
pub mod report;
pub mod scalar;
pub mod simulator;
pub mod verification;

pub use allocation::{OutageTarget, PowerCoefficients, RateTargets};
pub use channel::{ChannelPair, EffectiveChannel, StreamRng};
pub use config::{Detector, Policy, Scheme, SystemConfig};
pub use error::{Error, Result};
pub use link::DecodeOutcome;
pub use matrixkit::ComplexMatrix;
pub use scalar::Real;
pub use simulator::{OutageEstimate, PointEstimate, SweepResult};

/// Double-precision complex matrix.
pub type Matrix64 = ComplexMatrix<f64>;
/// Single-precision complex matrix.
pub type Matrix32 = ComplexMatrix<f32>;
pub type Channel64 = ChannelPair<f64>;
pub type Effective64 = EffectiveChannel<f64>;
pub type Rates64 = RateTargets<f64>;
pub type Coefficients64 = PowerCoefficients<f64>;
pub type Policy64 = Policy<f64>;
pub type Config64 = SystemConfig<f64>;
pub type Config32 = SystemConfig<f32>;
