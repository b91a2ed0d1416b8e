//! Naive and backed-off rate allocation under SNR-estimation uncertainty.
//!
//! Given an unbiased estimate `gamma_hat` with conditional error variance
//! `sigma2`, the *naive* allocator maximizes rate against the instantaneous
//! error at `gamma_hat`, while the *back-off* bound keeps the expected error
//! (over the Gaussian-approximated estimation error) below the target
//! `exp(-alpha)`. The quality metric that decides feasibility is the
//! estimator's effective SNR `gamma_hat^2 / sigma2`.
//!
//! All rates returned here are continuous bits/symbol values so that sweep
//! curves are smooth; projecting onto a discrete [`RateSet`] is a separate
//! step ([`RateSet::floor_member`]). Infeasibility is a first-class `None`,
//! never an error, because sweeps routinely cross infeasible regions.

use serde::{Deserialize, Serialize};

use crate::error_models::{RateSet, Snr, DEFAULT_RHO_GRID};
use crate::optim::grid_golden_max;
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;
const RHO_GOLDEN_ITERS: usize = 40;

/// Tolerance on `|backoff - naive(gamma_hat/mu)|` for the power-penalty solve.
const MU_RATE_TOL: f64 = 1e-10;

/// Upper end of the power-penalty search bracket.
const MU_MAX: f64 = 1e6;

/// Summary of an SNR estimator's output: the estimate and its conditional
/// error variance (linear-SNR units squared).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    gamma_hat: Snr,
    sigma2: f64,
}

impl PosteriorSummary {
    pub fn new(gamma_hat: Snr, sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidValue { what: "error variance sigma2", value: sigma2 });
        }
        Ok(PosteriorSummary { gamma_hat, sigma2 })
    }

    /// Fixes `sigma2` from a target effective SNR `gamma_hat^2/sigma2`.
    pub fn from_effective_snr(gamma_hat: Snr, effective_snr: f64) -> Result<Self> {
        if !(effective_snr > 0.0) {
            return Err(Error::InvalidValue { what: "effective SNR", value: effective_snr });
        }
        let g = gamma_hat.linear();
        Self::new(gamma_hat, g * g / effective_snr)
    }

    pub fn gamma_hat(self) -> Snr {
        self.gamma_hat
    }

    pub fn sigma2(self) -> f64 {
        self.sigma2
    }

    /// `gamma_hat^2 / sigma2`; infinite for a zero-variance estimate.
    pub fn effective_snr(self) -> f64 {
        let g = self.gamma_hat.linear();
        if self.sigma2 == 0.0 {
            f64::INFINITY
        } else {
            g * g / self.sigma2
        }
    }
}

/// QoS target and packet parameters shared by the allocation formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    alpha: f64,
    n: u32,
    rate_set: RateSet,
}

impl LinkParams {
    pub fn new(alpha: f64, n: u32, rate_set: RateSet) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidValue { what: "QoS exponent alpha", value: alpha });
        }
        if n == 0 {
            return Err(Error::InvalidValue { what: "packet size n", value: 0.0 });
        }
        Ok(LinkParams { alpha, n, rate_set })
    }

    /// `alpha = -ln(target_error)` for a target packet error in `(0, 1)`.
    pub fn from_target_error(target_error: f64, n: u32, rate_set: RateSet) -> Result<Self> {
        if !(target_error > 0.0 && target_error < 1.0) {
            return Err(Error::InvalidValue { what: "target error", value: target_error });
        }
        Self::new(-target_error.ln(), n, rate_set)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn rate_set(&self) -> &RateSet {
        &self.rate_set
    }

    /// `alpha + ln(0.1 n)`, the exponent budget of the QAM formulas.
    pub fn qam_qos_term(&self) -> f64 {
        self.alpha + (0.1 * f64::from(self.n)).ln()
    }
}

/// Low- or high-SNR approximation regime for the Gaussian-ensemble formulas.
/// The regime is an explicit caller choice; nothing here auto-selects it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Low,
    High,
}

/// Which family of allocation formulas applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateLaw {
    Qam,
    Gaussian(Regime),
}

/// Minimum effective SNR for a feasible rate to exist under `law`.
/// The high-SNR Gaussian regime has no threshold (returns 0).
pub fn effective_snr_threshold(law: RateLaw, lp: &LinkParams) -> f64 {
    match law {
        RateLaw::Qam => 2.0 * lp.qam_qos_term(),
        RateLaw::Gaussian(Regime::Low) => 2.0 * lp.alpha(),
        RateLaw::Gaussian(Regime::High) => 0.0,
    }
}

/// Naive QAM rate: `log2(1 + gamma_hat * 1.5 / (alpha + ln 0.1n))`.
pub fn naive_rate_qam(p: PosteriorSummary, lp: &LinkParams) -> f64 {
    let c = lp.qam_qos_term();
    assert!(c > 0.0, "alpha + ln(0.1 n) must be positive");
    (1.0 + p.gamma_hat().linear() * 1.5 / c).log2()
}

/// Whether the estimator is good enough for uncoded QAM:
/// `gamma_hat^2/sigma2 >= 2*(alpha + ln 0.1n)` (boundary included).
pub fn qam_feasible(p: PosteriorSummary, lp: &LinkParams) -> bool {
    p.effective_snr() >= effective_snr_threshold(RateLaw::Qam, lp)
}

/// Largest QAM rate whose *expected* error stays within target under the
/// Gaussian approximation; `None` when the effective SNR is below threshold.
///
/// Uses the cancellation-free form
/// `log2(1 + gamma_hat*1.5*(1 + sqrt(1 - 2c*x))/(2c))` with
/// `x = sigma2/gamma_hat^2`, which recovers the naive rate exactly at
/// `sigma2 = 0`.
pub fn rate_bound_qam(p: PosteriorSummary, lp: &LinkParams) -> Option<f64> {
    let c = lp.qam_qos_term();
    assert!(c > 0.0, "alpha + ln(0.1 n) must be positive");
    let g = p.gamma_hat().linear();
    if g == 0.0 {
        return Some(0.0);
    }
    let x = p.sigma2() / (g * g);
    let disc = 1.0 - 2.0 * c * x;
    if disc < 0.0 {
        return None;
    }
    Some((1.0 + g * 1.5 * (1.0 + disc.sqrt()) / (2.0 * c)).log2())
}

fn gaussian_objective(regime: Regime, gh: f64, sigma2: f64, alpha: f64, n: f64, rho: f64) -> f64 {
    if rho <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let shared = -alpha / (n * rho);
    match regime {
        Regime::Low => {
            let opr = 1.0 + rho;
            (shared + gh / (2.0 * opr) - 0.125 * n * rho * sigma2 / (opr * opr)) / LN2
        }
        Regime::High => {
            (shared + 0.5 * (gh / (1.0 + rho)).ln() - 0.125 * n * rho * sigma2 / (gh * gh)) / LN2
        }
    }
}

fn gaussian_rate_max(regime: Regime, gh: f64, sigma2: f64, lp: &LinkParams) -> f64 {
    let n = f64::from(lp.n());
    let alpha = lp.alpha();
    grid_golden_max(
        |rho| gaussian_objective(regime, gh, sigma2, alpha, n, rho),
        0.0,
        1.0,
        DEFAULT_RHO_GRID,
        RHO_GOLDEN_ITERS,
    )
    .value
}

/// Naive Gaussian-ensemble rate: the union-bound rate at `sigma2 = 0`,
/// maximized over the union-bound parameter. Negative maxima (no positive
/// rate meets the target even with a perfect estimate) report as 0.
pub fn naive_rate_gaussian(p: PosteriorSummary, lp: &LinkParams, regime: Regime) -> f64 {
    gaussian_rate_max(regime, p.gamma_hat().linear(), 0.0, lp).max(0.0)
}

/// Backed-off Gaussian-ensemble rate bound under estimation uncertainty.
///
/// Low regime: requires `gamma_hat^2/sigma2 >= 2*alpha` and a positive
/// maximum, else `None`. High regime: no threshold; a non-positive maximum
/// clamps to rate 0, mirroring the naive convention.
pub fn rate_bound_gaussian(p: PosteriorSummary, lp: &LinkParams, regime: Regime) -> Option<f64> {
    if regime == Regime::Low
        && p.effective_snr() < effective_snr_threshold(RateLaw::Gaussian(Regime::Low), lp)
    {
        return None;
    }
    let best = gaussian_rate_max(regime, p.gamma_hat().linear(), p.sigma2(), lp);
    match regime {
        Regime::Low => {
            if best <= 0.0 {
                None
            } else {
                Some(best)
            }
        }
        Regime::High => Some(best.max(0.0)),
    }
}

fn naive_rate(law: RateLaw, p: PosteriorSummary, lp: &LinkParams) -> f64 {
    match law {
        RateLaw::Qam => naive_rate_qam(p, lp),
        RateLaw::Gaussian(regime) => naive_rate_gaussian(p, lp, regime),
    }
}

/// Back-off rate bound under `law`; `None` marks infeasibility.
pub fn rate_bound(law: RateLaw, p: PosteriorSummary, lp: &LinkParams) -> Option<f64> {
    match law {
        RateLaw::Qam => {
            if qam_feasible(p, lp) {
                rate_bound_qam(p, lp)
            } else {
                None
            }
        }
        RateLaw::Gaussian(regime) => rate_bound_gaussian(p, lp, regime),
    }
}

/// Rate penalty, back-off rate, and power penalty for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    /// Naive rate at `gamma_hat` (bits/symbol).
    pub naive_rate: f64,
    /// Backed-off rate bound; `None` when infeasible.
    pub backoff_rate: Option<f64>,
    /// `naive - backoff` (bits/symbol) when the back-off rate exists.
    pub rate_penalty_delta: Option<f64>,
    /// Linear SNR scale factor `mu >= 1` solving
    /// `naive(gamma_hat/mu) = backoff`; `None` when infeasible.
    pub power_penalty_mu: Option<f64>,
}

impl PenaltyReport {
    /// Power penalty in dB, when defined.
    pub fn mu_db(&self) -> Option<f64> {
        self.power_penalty_mu.map(|mu| 10.0 * mu.log10())
    }
}

/// Computes the penalty report for one `(gamma_hat, sigma2)` point.
///
/// The power penalty is solved by monotone bisection of
/// `naive(gamma_hat/mu) = backoff` over `mu` in `[1, 1e6]`; if even
/// `mu = 1e6` cannot shrink the naive rate down to the back-off bound the
/// penalty reports as infeasible.
pub fn penalties(law: RateLaw, p: PosteriorSummary, lp: &LinkParams) -> PenaltyReport {
    let naive = naive_rate(law, p, lp);
    let backoff = rate_bound(law, p, lp);
    let (delta, mu) = match backoff {
        None => (None, None),
        Some(b) => {
            let delta = (naive - b).max(0.0);
            (Some(delta), solve_power_penalty(law, p.gamma_hat(), lp, b))
        }
    };
    PenaltyReport { naive_rate: naive, backoff_rate: backoff, rate_penalty_delta: delta, power_penalty_mu: mu }
}

fn scaled_naive(law: RateLaw, gamma_hat: Snr, lp: &LinkParams, mu: f64) -> f64 {
    let scaled = Snr::from_linear(gamma_hat.linear() / mu).expect("scaled SNR stays valid");
    let p = PosteriorSummary::new(scaled, 0.0).expect("zero variance is valid");
    naive_rate(law, p, lp)
}

fn solve_power_penalty(law: RateLaw, gamma_hat: Snr, lp: &LinkParams, backoff: f64) -> Option<f64> {
    // naive(gamma_hat/mu) decreases in mu; bracket [1, MU_MAX].
    let g = |mu: f64| scaled_naive(law, gamma_hat, lp, mu) - backoff;
    let g_lo = g(1.0);
    if g_lo <= MU_RATE_TOL {
        return Some(1.0);
    }
    if g(MU_MAX) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (1.0, MU_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.abs() < MU_RATE_TOL {
            return Some(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
