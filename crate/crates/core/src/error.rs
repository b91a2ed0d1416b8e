use thiserror::Error;

/// Errors surfaced by the library.
///
/// Infeasibility of a rate or probe plan is deliberately *not* an error:
/// sweeps routinely cross infeasible regions, so those operations return
/// marker values (`Option`/`f64::INFINITY`) instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violated a domain-type invariant (negative SNR, zero rate, ...).
    #[error("invalid {what}: {value}")]
    InvalidValue { what: &'static str, value: f64 },

    /// Uncoded QAM formulas require a rate of at least 1 bit/symbol.
    #[error("QAM rate must be >= 1 bit/symbol, got {0}")]
    QamRateBelowOne(f64),

    /// The feedback distribution is degenerate (error probability 0 or 1),
    /// so score and Fisher information are undefined without clamping.
    #[error("degenerate feedback distribution: error probability {0}")]
    DegenerateErrorProbability(f64),

    /// A rate was required to be a member of the configured rate set.
    #[error("rate {0} is not a member of the rate set")]
    RateNotInSet(f64),

    /// Configuration rejected before running an experiment.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
