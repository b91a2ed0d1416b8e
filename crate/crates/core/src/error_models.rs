//! Closed-form packet-error probabilities and their SNR derivatives.
//!
//! Two signal models are supported:
//!
//! - **Uncoded QAM**: per-symbol error `0.2*exp(-1.5*gamma/(2^R - 1))`,
//!   lifted to a packet of `n` symbols as `1 - (1 - eps_k)^n`.
//! - **Random Gaussian ensemble**: the random-coding union bound
//!   `exp(n*rho*[R*ln2 - 0.5*ln(1 + gamma/(1+rho))])`, minimized over the
//!   union-bound parameter `rho` in `[0, 1]`. The minimized bound is treated
//!   as the true error law of this model; everything downstream (Fisher
//!   information, simulation draws) evaluates it as such.
//!
//! SNR is kept linear internally; dB enters only through the [`Snr`]
//! conversion helpers. All functions here are pure and thread-safe.

use serde::{Deserialize, Serialize};

use crate::optim::grid_golden_min;
use crate::{Error, Result};

/// Floor applied to `eps` and `1 - eps` before a division needs them.
pub const EPS_DIVISION_FLOOR: f64 = 1e-300;

/// Default number of grid points for the union-bound parameter search.
pub const DEFAULT_RHO_GRID: usize = 1025;

/// Golden-section refinement iterations after the grid scan.
const RHO_GOLDEN_ITERS: usize = 40;

/// Linear signal-to-noise ratio. Nonnegative and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Snr(f64);

impl Snr {
    pub fn from_linear(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidValue { what: "SNR (linear)", value });
        }
        Ok(Snr(value))
    }

    /// `10^(db/10)`; any finite dB value maps to a valid linear SNR.
    pub fn from_db(db: f64) -> Self {
        Snr(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    /// `10*log10(linear)`; `-inf` for a zero SNR.
    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Transmission rate in bits/symbol. Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(f64);

impl Rate {
    pub fn new(bits_per_symbol: f64) -> Result<Self> {
        if !bits_per_symbol.is_finite() || bits_per_symbol <= 0.0 {
            return Err(Error::InvalidValue { what: "rate (bits/symbol)", value: bits_per_symbol });
        }
        Ok(Rate(bits_per_symbol))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Finite ordered set of admissible rates, ascending and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet(Vec<Rate>);

impl RateSet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("rate set must be non-empty".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("rates must be comparable"));
        values.dedup();
        let rates = values.into_iter().map(Rate::new).collect::<Result<Vec<_>>>()?;
        Ok(RateSet(rates))
    }

    /// Integer rates `lo..=hi` bits/symbol (the classic QAM ladder).
    pub fn integer_range(lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::InvalidConfig(format!("bad integer rate range {lo}..={hi}")));
        }
        Self::new((lo..=hi).map(f64::from).collect())
    }

    /// `points` rates equally spaced over `(0, upper]`.
    pub fn spaced_open(upper: f64, points: usize) -> Result<Self> {
        if points == 0 || !(upper > 0.0) {
            return Err(Error::InvalidConfig(format!("bad spaced rate set ({upper}, {points})")));
        }
        Self::new((1..=points).map(|i| upper * i as f64 / points as f64).collect())
    }

    pub fn rates(&self) -> &[Rate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, rate: Rate) -> bool {
        self.0.iter().any(|r| r.value() == rate.value())
    }

    /// Largest member `<=` the continuous rate `value`, if any.
    pub fn floor_member(&self, value: f64) -> Option<Rate> {
        self.0.iter().rev().find(|r| r.value() <= value).copied()
    }
}

/// Which packet-error law applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SignalModel {
    /// Uncoded QAM with `n` symbols per packet.
    UncodedQam { n: u32 },
    /// Random Gaussian ensemble with `n` symbols per packet and a
    /// `rho_grid_size`-point grid for the union-bound parameter search.
    GaussianEnsemble { n: u32, rho_grid_size: usize },
}

impl SignalModel {
    pub fn uncoded_qam(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidValue { what: "packet size n", value: n as f64 });
        }
        Ok(SignalModel::UncodedQam { n })
    }

    pub fn gaussian(n: u32) -> Result<Self> {
        Self::gaussian_with_grid(n, DEFAULT_RHO_GRID)
    }

    pub fn gaussian_with_grid(n: u32, rho_grid_size: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidValue { what: "packet size n", value: n as f64 });
        }
        if rho_grid_size < 2 {
            return Err(Error::InvalidValue {
                what: "rho grid size",
                value: rho_grid_size as f64,
            });
        }
        Ok(SignalModel::GaussianEnsemble { n, rho_grid_size })
    }

    pub fn n(&self) -> u32 {
        match *self {
            SignalModel::UncodedQam { n } | SignalModel::GaussianEnsemble { n, .. } => n,
        }
    }

    /// Packet-error probability of this model at `(gamma, rate)`.
    pub fn packet_error(&self, gamma: Snr, rate: Rate) -> Result<ErrorProbability> {
        match *self {
            SignalModel::UncodedQam { n } => qam_packet_error(gamma, rate, n),
            SignalModel::GaussianEnsemble { n, rho_grid_size } => {
                Ok(gaussian_packet_error_opt(gamma, rate, n, rho_grid_size).0)
            }
        }
    }

    /// `d eps / d gamma` at `(gamma, rate)`. For the Gaussian model the
    /// derivative is taken at the per-point optimal `rho`, held fixed.
    pub fn packet_error_dgamma(&self, gamma: Snr, rate: Rate) -> Result<f64> {
        match *self {
            SignalModel::UncodedQam { n } => qam_packet_error_dgamma(gamma, rate, n),
            SignalModel::GaussianEnsemble { n, rho_grid_size } => {
                let (_, rho) = gaussian_packet_error_opt(gamma, rate, n, rho_grid_size);
                Ok(gaussian_error_dgamma(gamma, rate, n, rho))
            }
        }
    }

    /// Error level and derivative in one call (shares the `rho` search).
    pub fn error_point(&self, gamma: Snr, rate: Rate) -> Result<(ErrorProbability, f64)> {
        match *self {
            SignalModel::UncodedQam { n } => {
                Ok((qam_packet_error(gamma, rate, n)?, qam_packet_error_dgamma(gamma, rate, n)?))
            }
            SignalModel::GaussianEnsemble { n, rho_grid_size } => {
                let (eps, rho) = gaussian_packet_error_opt(gamma, rate, n, rho_grid_size);
                let deps = gaussian_error_dgamma(gamma, rate, n, rho);
                Ok((eps, deps))
            }
        }
    }
}

/// A probability of decoding error, with an accurately tracked complement.
///
/// `complement` stores `1 - value` computed without cancellation so that
/// Fisher-information denominators stay meaningful when `value` rounds to 1.
/// `clamped` records whether a range clamp was applied on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProbability {
    value: f64,
    complement: f64,
    clamped: bool,
}

impl ErrorProbability {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidValue { what: "error probability", value });
        }
        Ok(ErrorProbability { value, complement: 1.0 - value, clamped: false })
    }

    fn from_parts(value: f64, complement: f64, clamped: bool) -> Self {
        debug_assert!((0.0..=1.0).contains(&value));
        debug_assert!((0.0..=1.0).contains(&complement));
        ErrorProbability { value, complement, clamped }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    /// `1 - value`, computed without cancellation where the model allows.
    pub fn complement(self) -> f64 {
        self.complement
    }

    pub fn was_clamped(self) -> bool {
        self.clamped
    }

    /// `(eps, 1-eps)` floored at [`EPS_DIVISION_FLOOR`] for use as a divisor,
    /// plus whether the floor engaged.
    pub fn for_division(self) -> (f64, f64, bool) {
        let eps = self.value.max(EPS_DIVISION_FLOOR);
        let comp = self.complement.max(EPS_DIVISION_FLOOR);
        let clamped = eps != self.value || comp != self.complement;
        (eps, comp, clamped)
    }
}

fn check_qam_rate(rate: Rate) -> Result<f64> {
    if rate.value() < 1.0 {
        return Err(Error::QamRateBelowOne(rate.value()));
    }
    Ok(exp2m1(rate.value()))
}

/// `2^r - 1`, accurate for small `r` as well.
fn exp2m1(r: f64) -> f64 {
    (r * std::f64::consts::LN_2).exp_m1()
}

/// Symbol error rate of uncoded QAM: `0.2 * exp(-1.5*gamma/(2^R - 1))`.
///
/// Strictly decreasing in `gamma`, strictly increasing in `R`. Requires
/// `R >= 1` so the constellation term `2^R - 1` stays away from zero.
pub fn qam_symbol_error(gamma: Snr, rate: Rate) -> Result<ErrorProbability> {
    let denom = check_qam_rate(rate)?;
    let value = 0.2 * (-1.5 * gamma.linear() / denom).exp();
    Ok(ErrorProbability::from_parts(value, 1.0 - value, false))
}

/// Packet error rate of `n` independent uncoded QAM symbols:
/// `1 - (1 - eps_k)^n`.
pub fn qam_packet_error(gamma: Snr, rate: Rate, n: u32) -> Result<ErrorProbability> {
    let eps_k = qam_symbol_error(gamma, rate)?.value();
    let log_comp = f64::from(n) * (-eps_k).ln_1p();
    let value = -log_comp.exp_m1();
    let complement = log_comp.exp();
    Ok(ErrorProbability::from_parts(value, complement, false))
}

/// `d/d gamma` of [`qam_packet_error`], via the chain rule on the symbol
/// error. Well-defined at `gamma = 0` and strictly negative wherever the
/// error is non-degenerate.
pub fn qam_packet_error_dgamma(gamma: Snr, rate: Rate, n: u32) -> Result<f64> {
    let denom = check_qam_rate(rate)?;
    let eps_k = 0.2 * (-1.5 * gamma.linear() / denom).exp();
    let pow = (f64::from(n) - 1.0) * (-eps_k).ln_1p();
    Ok(-f64::from(n) * pow.exp() * eps_k * 1.5 / denom)
}

/// `d eps / d gamma` for uncoded QAM expressed from the packet-error level
/// itself:
///
/// `eps' = (1-eps) * ((1-eps)^{-1/n} - 1) * ln(5*(1-(1-eps)^{1/n})) * n/gamma`
///
/// This is the factorization used by the probe-duration bound, which is
/// parameterized by the probe error rather than the rate. It divides by
/// `gamma`, so `gamma > 0` is required; use [`qam_packet_error_dgamma`] at
/// zero SNR.
pub fn qam_packet_error_dgamma_from_eps(eps: &ErrorProbability, gamma: Snr, n: u32) -> Result<f64> {
    let g = gamma.linear();
    if g <= 0.0 {
        return Err(Error::InvalidValue { what: "SNR (must be > 0 here)", value: g });
    }
    let (e, comp) = (eps.value(), eps.complement());
    if e <= 0.0 || e >= 1.0 {
        return Err(Error::DegenerateErrorProbability(e));
    }
    let nf = f64::from(n);
    // ln(1-eps) without cancellation: prefer the stored complement when it
    // is the better-conditioned representation.
    let log_comp = if e < 0.5 { (-e).ln_1p() } else { comp.ln() };
    let grow = (-log_comp / nf).exp_m1(); // (1-eps)^{-1/n} - 1
    let sym = -(log_comp / nf).exp_m1(); // 1 - (1-eps)^{1/n}
    Ok(comp * grow * (5.0 * sym).ln() * nf / g)
}

/// Exponent of the Gaussian-ensemble union bound at fixed `rho`:
/// `n*rho*(R*ln2 - 0.5*ln(1 + gamma/(1+rho)))`.
fn gaussian_exponent(gamma: f64, rate: f64, n: u32, rho: f64) -> f64 {
    f64::from(n) * rho * (rate * std::f64::consts::LN_2 - 0.5 * (gamma / (1.0 + rho)).ln_1p())
}

/// Random-coding union bound at a fixed union-bound parameter `rho`:
/// `min(1, exp(n*rho*[R*ln2 - 0.5*ln(1+gamma/(1+rho))]))`.
///
/// Values above 1 are vacuous and are clamped to 1 (flagged).
pub fn gaussian_packet_error_bound(gamma: Snr, rate: Rate, n: u32, rho: f64) -> Result<ErrorProbability> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidValue { what: "union bound parameter rho", value: rho });
    }
    let g = gaussian_exponent(gamma.linear(), rate.value(), n, rho);
    if g >= 0.0 {
        let clamped = g > 0.0;
        Ok(ErrorProbability::from_parts(1.0, 0.0, clamped))
    } else {
        Ok(ErrorProbability::from_parts(g.exp(), -g.exp_m1(), false))
    }
}

/// Tightest union bound: minimizes [`gaussian_packet_error_bound`] over
/// `rho` in `[0, 1]` with a `grid_points`-point scan plus golden-section
/// refinement. Fully deterministic; flat ties resolve to the smallest `rho`.
pub fn gaussian_packet_error_opt(
    gamma: Snr,
    rate: Rate,
    n: u32,
    grid_points: usize,
) -> (ErrorProbability, f64) {
    let (g, r) = (gamma.linear(), rate.value());
    let m = grid_golden_min(|rho| gaussian_exponent(g, r, n, rho), 0.0, 1.0, grid_points, RHO_GOLDEN_ITERS);
    // The exponent is 0 at rho = 0, so the minimum is never positive.
    let value = m.value.min(0.0);
    let eps = ErrorProbability::from_parts(value.exp(), -value.exp_m1(), false);
    (eps, m.x)
}

/// `d/d gamma` of the fixed-`rho` union bound: `eps * (-n*rho) / (2*(1+rho+gamma))`.
///
/// Zero at `rho = 0` and throughout the clamped (vacuous) region, strictly
/// negative elsewhere.
pub fn gaussian_error_dgamma(gamma: Snr, rate: Rate, n: u32, rho: f64) -> f64 {
    let g = gamma.linear();
    let exponent = gaussian_exponent(g, rate.value(), n, rho);
    if exponent >= 0.0 {
        return 0.0;
    }
    exponent.exp() * (-f64::from(n) * rho) / (2.0 * (1.0 + rho + g))
}
