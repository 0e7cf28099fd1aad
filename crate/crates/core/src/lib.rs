//! Statistical model of a time-variant diffusive mobile molecular-communication
//! channel, with everything needed to validate it end to end:
//!
//! - [`config`]: physical/protocol parameters in SI units and derived
//!   effective diffusion coefficients.
//! - [`channel`]: closed-form statistics of the time-variant channel impulse
//!   response — conditional CIR, relative-displacement density, mean,
//!   autocorrelation function, variance, normalized ACF, and coherence time.
//! - [`sim`]: particle-based Brownian-motion simulation of transmitter,
//!   receiver, and signaling molecules, plus trajectory-level Monte-Carlo
//!   estimators that validate the closed forms.
//! - [`detect`]: single-sample Poisson threshold detector with adaptive
//!   optimal/suboptimal thresholds under perfect or outdated channel
//!   knowledge.
//! - [`ber`]: Monte-Carlo evaluation of expected bit error probabilities for
//!   both CSI modes under common random numbers.
//! - [`oracle`]: independent numerical cross-checks (adaptive quadrature,
//!   brute-force threshold search, goodness-of-fit tests) used by the
//!   `validate` command and the test suite.
//!
//! All quantities are SI (meters, seconds); convert at the boundary.

pub mod ber;
pub mod channel;
pub mod config;
pub mod detect;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod stats;

pub use ber::{ber_curve, BerCurve, BerRecord};
pub use channel::{acf, acf_equal, cir_conditional, coherence_time, displacement_pdf, mean_cir,
                  normalized_acf, variance, ChannelStats, CoherenceEstimate, Notation};
pub use config::{derive_effective, EffectiveDiffusion, PhysicalConfig, Vec3};
pub use detect::{decide, optimal_threshold, poisson_cdf_below, BitSequence, CsiMode,
                 PoissonSignalModel, ThresholdBits};
pub use rng::RngStream;
pub use sim::{empirical_acf, sample_relative_trajectory, McEstimate, ObservationSeries,
              RelativeTrajectory};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration invariant is violated; names the offending field.
    #[error("invalid config: field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// An operation was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller passed inconsistently ordered or malformed arguments.
    #[error("argument error: {0}")]
    Argument(String),

    /// The Poisson signal model is uninformative (no usable threshold).
    #[error("degenerate signal model: {0}")]
    DegenerateModel(String),

    /// Normalized ACF never dropped below the threshold within the horizon.
    #[error("coherence time not reached within horizon (rho at t_max = {rho_at_horizon})")]
    CoherenceNotReached { rho_at_horizon: f64 },

    /// A quantity that must be nonnegative came out negative beyond
    /// floating-point tolerance; signals a numerics bug.
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
