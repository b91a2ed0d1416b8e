//! Recursive SNR estimator driven by ACK/NACK feedback.
//!
//! At each probe step the estimate moves by the innovation
//! `(F - eps(gamma_hat, R)) / ((t)^beta * eps'(gamma_hat, R))` — a
//! stochastic-approximation step whose gain is the inverse error slope —
//! and the next probe rate is chosen to maximize Fisher information at the
//! new estimate. With `beta = 1` the estimator is asymptotically efficient:
//! its variance approaches the genie-rate CRLB.
//!
//! The raw step can overshoot (a lucky ACK at a saturated rate implies a
//! huge SNR correction), so estimates are clamped to
//! `[GAMMA_HAT_MIN, GAMMA_HAT_MAX]`, and steps are skipped entirely when the
//! error slope is numerically flat (`|eps'| < DERIVATIVE_FLOOR`). Both
//! safeguards are recorded per step.

use serde::{Deserialize, Serialize};

use crate::error_models::{Rate, RateSet, SignalModel, Snr};
use crate::estimation::{genie_probe_rate, Feedback};
use crate::sim::ChannelSim;
use crate::{Error, Result};

/// Clamp bounds for the running estimate (-30 dB to +40 dB).
pub const GAMMA_HAT_MIN: f64 = 1e-3;
pub const GAMMA_HAT_MAX: f64 = 1e4;

/// Steps with an error slope flatter than this are skipped.
pub const DERIVATIVE_FLOOR: f64 = 1e-12;

/// Running state of the recursive estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    t: u32,
    gamma_hat: Snr,
    current_rate: Rate,
    beta: f64,
    model: SignalModel,
    rate_set: RateSet,
}

/// What happened inside one update step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    /// The raw step left `[GAMMA_HAT_MIN, GAMMA_HAT_MAX]` and was clamped.
    pub clamped: bool,
    /// `|eps'|` was below [`DERIVATIVE_FLOOR`]; the estimate was left as-is.
    pub step_skipped: bool,
}

/// One probe packet as seen by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Packet index, starting at 1.
    pub t: u32,
    /// Rate the packet was sent at.
    pub rate: Rate,
    /// Feedback received for this packet.
    pub feedback: Feedback,
    /// Estimate in effect after processing the previous packet's feedback.
    pub gamma_hat: Snr,
    /// Whether the update that produced `gamma_hat` was skipped by the
    /// derivative floor.
    pub step_skipped: bool,
}

/// A recorded probe run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl EstimatorState {
    /// Starts the estimator at `t = 1` with the given rate and estimate.
    ///
    /// `rate0` must be a member of `rate_set` and `beta` must lie in
    /// `(0, 1]`. An out-of-range initial estimate is clamped like any other.
    pub fn init(
        rate0: Rate,
        gamma_hat0: Snr,
        beta: f64,
        rate_set: RateSet,
        model: SignalModel,
    ) -> Result<Self> {
        if !rate_set.contains(rate0) {
            return Err(Error::RateNotInSet(rate0.value()));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidValue { what: "step exponent beta", value: beta });
        }
        let clamped = gamma_hat0.linear().clamp(GAMMA_HAT_MIN, GAMMA_HAT_MAX);
        Ok(EstimatorState {
            t: 1,
            gamma_hat: Snr::from_linear(clamped)?,
            current_rate: rate0,
            beta,
            model,
            rate_set,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn gamma_hat(&self) -> Snr {
        self.gamma_hat
    }

    pub fn current_rate(&self) -> Rate {
        self.current_rate
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Applies one feedback bit: moves the estimate, advances `t`, and
    /// re-selects the probe rate as the Fisher-information argmax.
    pub fn update(&mut self, feedback: Feedback) -> Result<StepOutcome> {
        let (eps, deps) = self.model.error_point(self.gamma_hat, self.current_rate)?;
        let mut outcome = StepOutcome { clamped: false, step_skipped: false };

        if deps.abs() < DERIVATIVE_FLOOR {
            outcome.step_skipped = true;
        } else {
            // innovation F - eps, using the accurate complement when F = 1
            let innovation = match feedback {
                Feedback::Nack => eps.complement(),
                Feedback::Ack => -eps.value(),
            };
            let gain = f64::from(self.t).powf(self.beta) * deps;
            let raw = self.gamma_hat.linear() + innovation / gain;
            let clamped = raw.clamp(GAMMA_HAT_MIN, GAMMA_HAT_MAX);
            outcome.clamped = clamped != raw;
            self.gamma_hat = Snr::from_linear(clamped)?;
        }

        self.t += 1;
        self.current_rate = genie_probe_rate(&self.model, self.gamma_hat, &self.rate_set)?;
        Ok(outcome)
    }
}

/// Runs a probe of `t_p` packets against `channel`, recording the
/// trajectory. Applies `t_p - 1` updates; the final packet's feedback is
/// recorded but (by construction) never consumed by an update.
pub fn run_probe(
    mut state: EstimatorState,
    channel: &mut ChannelSim,
    t_p: u32,
) -> Result<(EstimatorState, Trajectory)> {
    assert!(t_p >= 1, "probe duration must be at least 1");
    let mut records = Vec::with_capacity(t_p as usize);

    let mut feedback = channel.draw_feedback(state.current_rate)?;
    records.push(TrajectoryRecord {
        t: 1,
        rate: state.current_rate,
        feedback,
        gamma_hat: state.gamma_hat,
        step_skipped: false,
    });

    for t in 2..=t_p {
        let outcome = state.update(feedback)?;
        feedback = channel.draw_feedback(state.current_rate)?;
        records.push(TrajectoryRecord {
            t,
            rate: state.current_rate,
            feedback,
            gamma_hat: state.gamma_hat,
            step_skipped: outcome.step_skipped,
        });
    }

    Ok((state, Trajectory { records }))
}
