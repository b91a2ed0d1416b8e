//! SNR estimation from binary ACK/NACK feedback and physical-layer rate
//! adaptation.
//!
//! A transmitter that only sees per-packet ACK/NACKs can still learn the
//! channel SNR and adapt its rate. This crate provides the pieces needed to
//! study how well that can work:
//!
//! - [`error_models`]: closed-form packet-error probabilities and their SNR
//!   derivatives for uncoded QAM and random Gaussian ensembles.
//! - [`estimation`]: the per-feedback score function, Fisher information,
//!   Cramer-Rao lower bounds, and the information-maximizing probe rate.
//! - [`rate_allocation`]: naive and backed-off rate assignment under
//!   estimation uncertainty, feasibility thresholds, and rate/power penalties.
//! - [`probe_planning`]: minimum probing duration and sum-rate upper bounds.
//! - [`estimator`]: a recursive stochastic-approximation SNR estimator that
//!   adapts its probe rate online.
//! - [`sim`]: a seeded Bernoulli feedback channel and Monte Carlo experiment
//!   runners with deterministic per-trial substreams.
//!
//! Monte Carlo trials and the probe-duration scan run on rayon when the
//! default `parallel` feature is enabled; disabling it falls back to
//! sequential loops with bit-identical results.

pub mod error_models;
pub mod estimation;
pub mod estimator;
pub mod probe_planning;
pub mod rate_allocation;
pub mod sim;
pub mod stats;

mod error;
mod exec;
mod optim;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
