//! Probe-duration lower bounds and the sum-rate upper bound.
//!
//! Feasibility of data transmission puts a floor on the estimator's effective
//! SNR; the Cramer-Rao bound turns that floor into a minimum number of probe
//! packets `T_p^min` at a given probe error rate. Trading probe packets
//! against data packets then yields an upper bound on the achievable sum
//! rate over a block of `T` packets.
//!
//! `tp_min_*` return continuous packet counts (callers `ceil()` as needed)
//! so that sweep curves stay smooth. The sum-rate scan defaults to
//! `gamma_hat = gamma`; pass an explicit estimate to decouple them.

use serde::{Deserialize, Serialize};

use crate::error_models::{
    gaussian_packet_error_opt, ErrorProbability, Rate, Snr, DEFAULT_RHO_GRID, SignalModel,
};
use crate::estimation::min_variance_bound;
use crate::exec::map_indexed;
use crate::rate_allocation::{rate_bound, LinkParams, PosteriorSummary, RateLaw};
use crate::{Error, Result};

/// A fixed-rate probing plan: duration, rate, and the resulting probe error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePlan {
    pub t_p: u32,
    pub probe_rate: Rate,
    pub probe_error: f64,
}

impl ProbePlan {
    /// Builds a plan from the model's error law at `(gamma, probe_rate)`.
    /// The probe error must be non-degenerate for the plan to carry
    /// information.
    pub fn new(model: &SignalModel, gamma: Snr, probe_rate: Rate, t_p: u32) -> Result<Self> {
        if t_p == 0 {
            return Err(Error::InvalidValue { what: "probe duration", value: 0.0 });
        }
        let eps = model.packet_error(gamma, probe_rate)?.value();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::DegenerateErrorProbability(eps));
        }
        Ok(ProbePlan { t_p, probe_rate, probe_error: eps })
    }
}

/// Minimum probing duration for uncoded QAM, as a closed form in the probe
/// error level `eps` alone:
///
/// ```text
/// T_p^min = 2*(alpha + ln 0.1n) * eps
///           / [ (1-eps) * ((1-eps)^{-1/n} - 1)^2
///               * ln^2(5*(1 - (1-eps)^{1/n})) * (n*gamma_hat/gamma)^2 ]
/// ```
///
/// Returns a continuous packet count. Errors on a degenerate `eps` or a
/// non-positive `gamma` (the form divides by it).
pub fn tp_min_qam(gamma: Snr, gamma_hat: Snr, probe_error: &ErrorProbability, lp: &LinkParams) -> Result<f64> {
    let eps = probe_error.value();
    let comp = probe_error.complement();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DegenerateErrorProbability(eps));
    }
    let g = gamma.linear();
    if g <= 0.0 {
        return Err(Error::InvalidValue { what: "SNR (must be > 0 here)", value: g });
    }
    let n = f64::from(lp.n());
    let log_comp = if eps < 0.5 { (-eps).ln_1p() } else { comp.ln() };
    let grow = (-log_comp / n).exp_m1(); // (1-eps)^{-1/n} - 1
    let sym = -(log_comp / n).exp_m1(); // 1 - (1-eps)^{1/n}
    let lg = (5.0 * sym).ln();
    let scale = n * gamma_hat.linear() / g;
    Ok(2.0 * lp.qam_qos_term() * eps / (comp * grow * grow * lg * lg * scale * scale))
}

/// Minimum probing duration for Gaussian signaling in the low-SNR regime:
///
/// `T_p^min = 8*alpha*(1-eps)*(1+rho*+gamma)^2 / (eps*(n*rho**gamma_hat)^2)`
///
/// where `rho*` is the tightest-union-bound parameter at `(gamma, probe_rate)`.
/// `Ok(None)` when `rho* = 0` (the bound is vacuous there and says nothing);
/// errors if the probe error is degenerate.
pub fn tp_min_gaussian(gamma: Snr, gamma_hat: Snr, probe_rate: Rate, lp: &LinkParams) -> Result<Option<f64>> {
    let (eps, rho) = gaussian_packet_error_opt(gamma, probe_rate, lp.n(), DEFAULT_RHO_GRID);
    if rho == 0.0 {
        return Ok(None);
    }
    let e = eps.value();
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::DegenerateErrorProbability(e));
    }
    let n = f64::from(lp.n());
    let opg = 1.0 + rho + gamma.linear();
    let denom = n * rho * gamma_hat.linear();
    Ok(Some(8.0 * lp.alpha() * eps.complement() * opg * opg / (e * denom * denom)))
}

/// Result of the probe/data split scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRateBound {
    /// Maximizing probe duration; 0 when no duration yields a feasible rate.
    pub t_p_star: u32,
    /// Backed-off data rate at the optimum (bits/symbol).
    pub rate_per_data_packet: f64,
    /// `(T - t_p_star) * rate_per_data_packet`.
    pub total: f64,
}

/// Upper bound on the sum rate over a block of `block_len` packets.
///
/// For each `T_p` in `1..block_len`, the estimator variance is lower-bounded
/// by the genie-rate CRLB and the data rate by the corresponding back-off
/// bound; the scan returns the `T_p` maximizing `(T - T_p) * rate`, smallest
/// `T_p` on ties. `gamma_hat` defaults to `gamma`.
///
/// The scan may evaluate in parallel; the reduction is order-fixed so the
/// result is identical for any thread count.
pub fn sumrate_max(
    model: &SignalModel,
    law: RateLaw,
    gamma: Snr,
    lp: &LinkParams,
    block_len: u32,
    gamma_hat: Option<Snr>,
) -> Result<SumRateBound> {
    if block_len < 2 {
        return Err(Error::InvalidValue { what: "block length", value: f64::from(block_len) });
    }
    let gh = gamma_hat.unwrap_or(gamma);
    let t = f64::from(block_len);

    let rows: Vec<Result<Option<(u32, f64, f64)>>> = map_indexed((block_len - 1) as usize, |i| {
        let t_p = i as u32 + 1;
        let sigma2 = min_variance_bound(model, gamma, t_p, lp.rate_set())?;
        if !sigma2.is_finite() {
            return Ok(None);
        }
        let p = PosteriorSummary::new(gh, sigma2)?;
        Ok(rate_bound(law, p, lp).map(|rate| (t_p, rate, (t - f64::from(t_p)) * rate)))
    });

    let mut best: Option<(u32, f64, f64)> = None;
    for row in rows {
        if let Some((t_p, rate, total)) = row? {
            let better = match best {
                None => true,
                // strict improvement only: ties keep the smallest t_p
                Some((_, _, bt)) => total > bt,
            };
            if better {
                best = Some((t_p, rate, total));
            }
        }
    }
    Ok(match best {
        Some((t_p_star, rate, total)) => SumRateBound { t_p_star, rate_per_data_packet: rate, total },
        None => SumRateBound { t_p_star: 0, rate_per_data_packet: 0.0, total: 0.0 },
    })
}
