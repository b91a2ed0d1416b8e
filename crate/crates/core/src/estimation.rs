//! Score function, Fisher information, and Cramer-Rao lower bounds for SNR
//! estimation from binary ACK/NACK feedback.
//!
//! Each feedback bit is Bernoulli with success probability `eps(gamma, R)`,
//! so the per-observation score is
//!
//! `V = eps'/(1-eps) * (f/eps - 1)`
//!
//! and the Fisher information is `Phi = (eps')^2 / (eps*(1-eps))`. The
//! variance of any unbiased estimator built from a probe sequence is bounded
//! below by the inverse of the accumulated information.
//!
//! A degenerate feedback distribution (`eps` exactly 0 or 1) carries no
//! information; the model-driven entry points floor the divisors at
//! [`EPS_DIVISION_FLOOR`](crate::error_models::EPS_DIVISION_FLOOR) so those
//! points evaluate to zero information rather than a crash. An exhausted
//! bound (every probe rate uninformative) is reported as `f64::INFINITY`,
//! which sweeps can render, rather than as an error.

use serde::{Deserialize, Serialize};

use crate::error_models::{Rate, RateSet, SignalModel, Snr};
use crate::{Error, Result};

/// One ACK/NACK feedback bit: ACK = packet decoded, NACK = decoding error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    Ack,
    Nack,
}

impl Feedback {
    /// 0 for ACK, 1 for NACK.
    pub fn as_bit(self) -> u8 {
        match self {
            Feedback::Ack => 0,
            Feedback::Nack => 1,
        }
    }
}

/// Per-observation Fisher information about the linear SNR.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FisherInfo(f64);

impl FisherInfo {
    pub fn new(value: f64) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::InvalidValue { what: "Fisher information", value });
        }
        Ok(FisherInfo(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Score of one feedback bit given `eps` and `eps' = d eps/d gamma` directly.
///
/// Errors on a degenerate `eps` (outside the open interval); no clamping is
/// applied on this raw path.
pub fn score_raw(eps: f64, deps: f64, f: Feedback) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DegenerateErrorProbability(eps));
    }
    Ok(match f {
        Feedback::Nack => deps / eps,
        Feedback::Ack => -deps / (1.0 - eps),
    })
}

/// Fisher information from `eps` and `eps'` directly; errors on degenerate `eps`.
///
/// Evaluated as `(eps'/eps) * (eps'/(1-eps))` so that squaring a tiny slope
/// cannot underflow before the division rescues it.
pub fn fisher_info_raw(eps: f64, deps: f64) -> Result<FisherInfo> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DegenerateErrorProbability(eps));
    }
    FisherInfo::new((deps / eps) * (deps / (1.0 - eps)))
}

/// Score of one feedback bit under `model` at `(gamma, rate)`.
pub fn score(model: &SignalModel, gamma: Snr, rate: Rate, f: Feedback) -> Result<f64> {
    let (eps, deps) = model.error_point(gamma, rate)?;
    let (e, comp, _) = eps.for_division();
    Ok(match f {
        Feedback::Nack => deps / e,
        Feedback::Ack => -deps / comp,
    })
}

/// Fisher information under `model` at `(gamma, rate)`.
///
/// Saturated points (error probability underflowing to 0 or rounding to 1
/// with a vanishing derivative) evaluate to zero information.
pub fn fisher_info(model: &SignalModel, gamma: Snr, rate: Rate) -> Result<FisherInfo> {
    let (eps, deps) = model.error_point(gamma, rate)?;
    let (e, comp, _) = eps.for_division();
    FisherInfo::new((deps / e) * (deps / comp))
}

/// Cramer-Rao lower bound on the variance of any unbiased SNR estimator
/// built from one feedback bit per rate in `rates`: the inverse of the
/// summed per-rate Fisher information. `f64::INFINITY` when every term is
/// zero (no probe carries information).
pub fn crlb(model: &SignalModel, gamma: Snr, rates: &[Rate]) -> Result<f64> {
    let mut total = 0.0;
    for &rate in rates {
        total += fisher_info(model, gamma, rate)?.value();
    }
    if total == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / total)
}

/// CRLB for a constant-rate probe of `t_p` packets:
/// `(1/t_p) * eps*(1-eps) / (eps')^2`.
pub fn crlb_fixed_rate(model: &SignalModel, gamma: Snr, rate: Rate, t_p: u32) -> Result<f64> {
    assert!(t_p >= 1, "probe duration must be at least 1");
    let phi = fisher_info(model, gamma, rate)?.value();
    if phi == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (f64::from(t_p) * phi))
}

/// The information-maximizing probe rate: argmax of Fisher information over
/// the rate set, ties resolved to the smallest rate.
pub fn genie_probe_rate(model: &SignalModel, gamma: Snr, rate_set: &RateSet) -> Result<Rate> {
    let mut best_rate = rate_set.rates()[0];
    let mut best_phi = -1.0;
    for &rate in rate_set.rates() {
        let phi = fisher_info(model, gamma, rate)?.value();
        if phi > best_phi {
            best_phi = phi;
            best_rate = rate;
        }
    }
    Ok(best_rate)
}

/// Smallest CRLB achievable with any length-`t_p` probe-rate sequence drawn
/// from `rate_set`: the fixed-rate bound at the genie probe rate.
pub fn min_variance_bound(model: &SignalModel, gamma: Snr, t_p: u32, rate_set: &RateSet) -> Result<f64> {
    let rate = genie_probe_rate(model, gamma, rate_set)?;
    crlb_fixed_rate(model, gamma, rate, t_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qam() -> SignalModel {
        SignalModel::uncoded_qam(500).unwrap()
    }

    fn rate(r: f64) -> Rate {
        Rate::new(r).unwrap()
    }

    #[test]
    fn score_raw_reference_values() {
        assert_eq!(score_raw(0.5, -0.1, Feedback::Nack).unwrap(), -0.2);
        assert_eq!(score_raw(0.5, -0.1, Feedback::Ack).unwrap(), 0.2);
    }

    #[test]
    fn score_raw_zero_mean() {
        let (eps, deps) = (0.5, -0.1);
        let mean = eps * score_raw(eps, deps, Feedback::Nack).unwrap()
            + (1.0 - eps) * score_raw(eps, deps, Feedback::Ack).unwrap();
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn score_raw_rejects_degenerate() {
        assert!(matches!(score_raw(0.0, -0.1, Feedback::Ack), Err(Error::DegenerateErrorProbability(_))));
        assert!(matches!(score_raw(1.0, -0.1, Feedback::Ack), Err(Error::DegenerateErrorProbability(_))));
        assert!(fisher_info_raw(1.0, -0.1).is_err());
    }

    #[test]
    fn fisher_raw_is_two_point_score_variance() {
        let (eps, deps) = (0.5, -0.1);
        let phi = fisher_info_raw(eps, deps).unwrap().value();
        assert!((phi - 0.04).abs() < 1e-15);
        let v1 = score_raw(eps, deps, Feedback::Nack).unwrap();
        let v0 = score_raw(eps, deps, Feedback::Ack).unwrap();
        let var = eps * v1 * v1 + (1.0 - eps) * v0 * v0;
        assert!((phi - var).abs() < 1e-15);
    }

    #[test]
    fn fisher_vanishes_at_extreme_snr() {
        let m = qam();
        let hi = fisher_info(&m, Snr::from_linear(1e9).unwrap(), rate(2.0)).unwrap();
        assert_eq!(hi.value(), 0.0);
    }

    #[test]
    fn fisher_finite_in_saturated_region() {
        // eps rounds to 1.0 at this point; information must stay tiny and
        // finite thanks to the accurate complement.
        let m = qam();
        let phi = fisher_info(&m, Snr::from_linear(2.0).unwrap(), rate(2.0)).unwrap().value();
        assert!(phi.is_finite());
        assert!(phi < 1e-10, "phi = {phi}");
    }

    #[test]
    fn crlb_constant_rate_matches_fixed_rate_form() {
        let m = qam();
        let g = Snr::from_db(10.0);
        let rates = vec![rate(2.0); 10];
        let a = crlb(&m, g, &rates).unwrap();
        let b = crlb_fixed_rate(&m, g, rate(2.0), 10).unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crlb_arithmetic_reference() {
        // eps = 0.5, deps = -0.1 => Phi = 0.04; ten observations => 2.5.
        let phi = fisher_info_raw(0.5, -0.1).unwrap().value();
        assert!((1.0 / (10.0 * phi) - 2.5).abs() < 1e-12);
        assert!((1.0 / phi - 25.0).abs() < 1e-12);
    }

    #[test]
    fn crlb_halves_when_duration_doubles() {
        let m = qam();
        let g = Snr::from_db(12.0);
        let a = crlb_fixed_rate(&m, g, rate(3.0), 7).unwrap();
        let b = crlb_fixed_rate(&m, g, rate(3.0), 14).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crlb_infinite_when_uninformative() {
        let m = qam();
        let g = Snr::from_linear(1e9).unwrap();
        assert_eq!(crlb(&m, g, &[rate(1.0), rate(2.0)]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn crlb_weakly_decreases_as_rates_append() {
        let m = qam();
        let g = Snr::from_db(10.0);
        let mut rates = Vec::new();
        let mut prev = f64::INFINITY;
        for r in [1.0, 2.0, 3.0, 2.0, 4.0, 2.0] {
            rates.push(rate(r));
            let b = crlb(&m, g, &rates).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn genie_rate_singleton() {
        let rs = RateSet::new(vec![3.0]).unwrap();
        let r = genie_probe_rate(&qam(), Snr::from_db(10.0), &rs).unwrap();
        assert_eq!(r.value(), 3.0);
    }

    #[test]
    fn genie_rate_matches_exhaustive_scan() {
        let m = qam();
        let rs = RateSet::integer_range(1, 10).unwrap();
        for db in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
            let g = Snr::from_db(db);
            let picked = genie_probe_rate(&m, g, &rs).unwrap();
            let best = rs
                .rates()
                .iter()
                .map(|&r| (r, fisher_info(&m, g, r).unwrap().value()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert_eq!(picked.value(), best.0.value(), "at {} dB", db);
        }
    }

    #[test]
    fn min_variance_bound_is_fixed_rate_bound_at_genie_rate() {
        let m = qam();
        let g = Snr::from_db(10.0);
        let rs = RateSet::integer_range(1, 10).unwrap();
        let genie = genie_probe_rate(&m, g, &rs).unwrap();
        let a = min_variance_bound(&m, g, 25, &rs).unwrap();
        let b = crlb_fixed_rate(&m, g, genie, 25).unwrap();
        assert_eq!(a, b);
        for &r in rs.rates() {
            assert!(a <= crlb_fixed_rate(&m, g, r, 25).unwrap() + 1e-15);
        }
    }

    #[test]
    fn min_variance_bound_beats_every_sequence() {
        // Brute-force over all |R|^t_p rate sequences, t_p <= 3, |R| <= 4.
        let m = qam();
        let g = Snr::from_db(9.0);
        let rs = RateSet::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        for t_p in 1u32..=3 {
            let bound = min_variance_bound(&m, g, t_p, &rs).unwrap();
            let k = rs.len();
            let mut best = f64::INFINITY;
            for idx in 0..k.pow(t_p) {
                let mut seq = Vec::with_capacity(t_p as usize);
                let mut v = idx;
                for _ in 0..t_p {
                    seq.push(rs.rates()[v % k]);
                    v /= k;
                }
                best = best.min(crlb(&m, g, &seq).unwrap());
            }
            assert!((bound / best - 1.0).abs() < 1e-12, "t_p = {t_p}");
        }
    }
}
