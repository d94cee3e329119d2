//! Numerics for normal variance-mean mixtures and their appearance as limit
//! laws of statistics built from a random number of observations.
//!
//! The crate has three layers:
//!
//! * numeric kernels: the modified Bessel function of the third kind
//!   ([`specfun`]), adaptive Gauss-Kronrod quadrature ([`quad`]), and small
//!   dense linear algebra ([`linalg`]);
//! * distribution families: the generalized inverse Gaussian law ([`gig`])
//!   and multivariate normal variance-mean mixtures, including the
//!   generalized hyperbolic family ([`mixtures`]);
//! * the simulation laboratory: statistics with a random sample size
//!   ([`randindex`]) and Monte Carlo convergence diagnostics ([`convlab`]),
//!   with end-to-end checks in [`acceptance`].
//!
//! All randomness flows through [`rng::RandomStream`], a counter-derived
//! ChaCha stream that makes parallel experiments reproducible: results are
//! identical for any worker count.

pub mod acceptance;
pub mod convlab;
pub mod gig;
pub mod linalg;
pub mod mixtures;
pub mod quad;
pub mod randindex;
pub mod rng;
pub mod specfun;

pub use convlab::{
    run_experiment, CfGridSpec, CoherencySpec, ConvergenceReport, ExperimentConfig,
    ExperimentOutcome, LimitLaw, ReportRow,
};
pub use gig::{GigBranch, GigParams};
pub use mixtures::{GhParams, MixingLaw, MixtureSpec, MvnParams, ProjectedLaw};
pub use randindex::{
    DataModel, NormalizationScheme, Replication, SignConvention, SizeModel,
};
pub use rng::RandomStream;
pub use specfun::LogValue;

/// Crate-wide error type.
///
/// Numeric routines fail loudly instead of returning silently wrong values:
/// quadrature that cannot meet its budget reports the error estimate it
/// achieved, and moment formulas refuse orders for which the integral
/// diverges.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Parameters outside the domain of validity of a distribution family.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// An argument outside the domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),
    /// The result exceeds the range of `f64`; use the log-space variant.
    #[error("overflow: {0}")]
    Overflow(String),
    /// Adaptive quadrature exhausted its refinement budget.
    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },
    /// A moment that does not exist for the given parameters.
    #[error("moment of order {order} diverges for {family}")]
    MomentDiverges { order: f64, family: String },
    /// Vectors or matrices of incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An operation that needs data received an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
