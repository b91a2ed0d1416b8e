//! Seeded ACK/NACK channel simulation and Monte Carlo experiment runners.
//!
//! Feedback for a packet sent at rate `R` over a block-fading channel with
//! true SNR `gamma` is Bernoulli with NACK probability `eps(gamma, R)`,
//! independent across packets given the rates.
//!
//! Every experiment derives one random substream per trial from
//! `(master seed, trial index)` alone, and per-trial results are collected
//! in trial order before any statistics are reduced. Outputs are therefore
//! byte-identical for any thread count, and identical between the parallel
//! and sequential execution paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error_models::{Rate, RateSet, SignalModel, Snr};
use crate::estimation::{fisher_info, genie_probe_rate, Feedback};
use crate::estimator::{run_probe, EstimatorState, Trajectory};
use crate::exec::{map_indexed, map_indexed_seq};
use crate::stats::{ks_p_value, ks_statistic, standard_normal_cdf, Welford};
use crate::{Error, Result};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-trial generator: the returned stream is a pure function
/// of `(master_seed, trial)`, independent of any other trial's draws.
pub fn substream(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut s = master_seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Block-fading ACK/NACK channel: the SNR is fixed for the whole probe and
/// each feedback bit consumes exactly one uniform draw from the stream.
#[derive(Debug, Clone)]
pub struct ChannelSim {
    true_gamma: Snr,
    model: SignalModel,
    rng: ChaCha8Rng,
}

impl ChannelSim {
    pub fn new(true_gamma: Snr, model: SignalModel, rng: ChaCha8Rng) -> Self {
        ChannelSim { true_gamma, model, rng }
    }

    pub fn from_seed_trial(true_gamma: Snr, model: SignalModel, master_seed: u64, trial: u64) -> Self {
        Self::new(true_gamma, model, substream(master_seed, trial))
    }

    pub fn true_gamma(&self) -> Snr {
        self.true_gamma
    }

    pub fn model(&self) -> &SignalModel {
        &self.model
    }

    /// Draws one feedback bit for a packet at `rate`:
    /// NACK with probability `eps(true_gamma, rate)`.
    pub fn draw_feedback(&mut self, rate: Rate) -> Result<Feedback> {
        let eps = self.model.packet_error(self.true_gamma, rate)?.value();
        let u: f64 = self.rng.random();
        Ok(if u < eps { Feedback::Nack } else { Feedback::Ack })
    }
}

/// Configuration of one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub model: SignalModel,
    pub true_gamma: Snr,
    pub rate_set: RateSet,
    pub init_rate: Rate,
    pub init_gamma_hat: Snr,
    pub beta: f64,
    pub t_p: u32,
    pub trials: u32,
    pub seed: u64,
}

impl McConfig {
    /// QAM setup: packets of 500 symbols, integer rates 1..=10, started at
    /// 3 dB and 1 bit/symbol.
    pub fn qam_defaults(true_gamma: Snr) -> Result<Self> {
        Ok(McConfig {
            model: SignalModel::uncoded_qam(500)?,
            true_gamma,
            rate_set: RateSet::integer_range(1, 10)?,
            init_rate: Rate::new(1.0)?,
            init_gamma_hat: Snr::from_db(3.0),
            beta: 1.0,
            t_p: 5000,
            trials: 500,
            seed: 1,
        })
    }

    /// Gaussian-ensemble setup: 100 rates equally spaced over (0, 5]
    /// bits/real-symbol, started at 0 dB and 0.5 bits/symbol.
    pub fn gaussian_defaults(true_gamma: Snr) -> Result<Self> {
        Ok(McConfig {
            model: SignalModel::gaussian(500)?,
            true_gamma,
            rate_set: RateSet::spaced_open(5.0, 100)?,
            init_rate: Rate::new(0.5)?,
            init_gamma_hat: Snr::from_db(0.0),
            beta: 1.0,
            t_p: 500,
            trials: 100,
            seed: 1,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.t_p == 0 {
            return Err(Error::InvalidConfig("t_p must be >= 1".into()));
        }
        if !self.rate_set.contains(self.init_rate) {
            return Err(Error::RateNotInSet(self.init_rate.value()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidConfig(format!("beta {} outside (0, 1]", self.beta)));
        }
        Ok(())
    }

    fn init_state(&self) -> Result<EstimatorState> {
        EstimatorState::init(
            self.init_rate,
            self.init_gamma_hat,
            self.beta,
            self.rate_set.clone(),
            self.model,
        )
    }
}

/// Variance and normality statistics of the final estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub trials: u32,
    pub t_p: u32,
    pub true_gamma_db: f64,
    /// Fisher-argmax probe rate at the true SNR (bits/symbol).
    pub genie_rate: f64,
    /// Per-feedback Fisher information at the genie rate.
    pub fisher_at_genie: f64,
    pub estimate_mean: f64,
    pub estimate_variance: f64,
    /// `t_p * var(gamma_hat) * Phi(gamma, genie rate)`; approaches 1 for an
    /// asymptotically efficient estimator.
    pub normalized_variance: f64,
    /// KS statistic of `sqrt(t_p * Phi) * (gamma_hat - gamma)` against the
    /// standard normal.
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    /// Set when fewer than two trials make the variance meaningless.
    pub degenerate: bool,
}

fn final_estimate_trial(cfg: &McConfig, trial: u64) -> Result<f64> {
    let mut chan = ChannelSim::from_seed_trial(cfg.true_gamma, cfg.model, cfg.seed, trial);
    let mut state = cfg.init_state()?;
    // Lean probe loop: same draw/update sequence as `run_probe`, without
    // recording a trajectory.
    let mut feedback = chan.draw_feedback(state.current_rate())?;
    for _ in 2..=cfg.t_p {
        state.update(feedback)?;
        feedback = chan.draw_feedback(state.current_rate())?;
    }
    Ok(state.gamma_hat().linear())
}

fn efficiency_report(cfg: &McConfig, finals: Vec<Result<f64>>) -> Result<McReport> {
    let finals = finals.into_iter().collect::<Result<Vec<f64>>>()?;

    let genie = genie_probe_rate(&cfg.model, cfg.true_gamma, &cfg.rate_set)?;
    let phi = fisher_info(&cfg.model, cfg.true_gamma, genie)?.value();

    let mut acc = Welford::new();
    for &g in &finals {
        acc.add(g);
    }
    let variance = acc.variance();
    let t_p = f64::from(cfg.t_p);

    let scale = (t_p * phi).sqrt();
    let gamma = cfg.true_gamma.linear();
    let mut normalized: Vec<f64> = finals.iter().map(|&g| scale * (g - gamma)).collect();
    let d = ks_statistic(&mut normalized, standard_normal_cdf);

    Ok(McReport {
        trials: cfg.trials,
        t_p: cfg.t_p,
        true_gamma_db: cfg.true_gamma.db(),
        genie_rate: genie.value(),
        fisher_at_genie: phi,
        estimate_mean: acc.mean(),
        estimate_variance: variance,
        normalized_variance: t_p * variance * phi,
        ks_statistic: d,
        ks_p_value: ks_p_value(d, finals.len()),
        degenerate: cfg.trials < 2,
    })
}

/// Runs `trials` independent probes and reports the variance statistics of
/// the final estimates. Parallel when the `parallel` feature is enabled.
pub fn run_efficiency_experiment(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let finals = map_indexed(cfg.trials as usize, |i| final_estimate_trial(cfg, i as u64));
    efficiency_report(cfg, finals)
}

/// Sequential twin of [`run_efficiency_experiment`]; kept callable in every
/// build for determinism checks and benchmarks.
pub fn run_efficiency_experiment_seq(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let finals = map_indexed_seq(cfg.trials as usize, |i| final_estimate_trial(cfg, i as u64));
    efficiency_report(cfg, finals)
}

/// One recorded trajectory per entry of `gammas`, all other settings shared.
/// Trial `i` uses substream `(cfg.seed, i)` with true SNR `gammas[i]`.
pub fn run_trajectory_experiment(cfg: &McConfig, gammas: &[Snr]) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let runs = map_indexed(gammas.len(), |i| {
        let mut chan = ChannelSim::from_seed_trial(gammas[i], cfg.model, cfg.seed, i as u64);
        run_probe(cfg.init_state()?, &mut chan, cfg.t_p).map(|(_, traj)| traj)
    });
    runs.into_iter().collect()
}

/// `cfg.trials` recorded trajectories at the configured true SNR.
pub fn run_trajectory_trials(cfg: &McConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let runs = map_indexed(cfg.trials as usize, |i| {
        let mut chan = ChannelSim::from_seed_trial(cfg.true_gamma, cfg.model, cfg.seed, i as u64);
        run_probe(cfg.init_state()?, &mut chan, cfg.t_p).map(|(_, traj)| traj)
    });
    runs.into_iter().collect()
}

/// Probe-rate convergence summary over seeded trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub trials: u32,
    /// Genie probe rate at the true SNR.
    pub genie_rate: f64,
    /// Fraction of trials whose final `window` probe rates all equal the
    /// genie rate.
    pub locked_fraction: f64,
    /// Median over trials of the first packet index after which the rate
    /// never leaves the genie rate (`t_p + 1` for trials that never lock,
    /// so the median stays defined).
    pub median_lock_time: f64,
}

/// Measures how quickly the adaptive probe rate locks onto the genie rate.
pub fn run_convergence_experiment(cfg: &McConfig, window: u32) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if window == 0 || window > cfg.t_p {
        return Err(Error::InvalidConfig(format!(
            "window {} outside 1..={}",
            window, cfg.t_p
        )));
    }
    let genie = genie_probe_rate(&cfg.model, cfg.true_gamma, &cfg.rate_set)?;

    let per_trial: Vec<Result<(bool, u32)>> = map_indexed(cfg.trials as usize, |i| {
        let mut chan = ChannelSim::from_seed_trial(cfg.true_gamma, cfg.model, cfg.seed, i as u64);
        let (_, traj) = run_probe(cfg.init_state()?, &mut chan, cfg.t_p)?;
        // first index after which the rate stays at the genie rate
        let mut lock_from = cfg.t_p + 1;
        for rec in traj.records.iter().rev() {
            if rec.rate.value() == genie.value() {
                lock_from = rec.t;
            } else {
                break;
            }
        }
        let locked_window = lock_from <= cfg.t_p - window + 1;
        Ok((locked_window, lock_from))
    });

    let mut locked = 0u32;
    let mut lock_times = Vec::with_capacity(cfg.trials as usize);
    for r in per_trial {
        let (locked_window, lock_from) = r?;
        if locked_window {
            locked += 1;
        }
        lock_times.push(lock_from);
    }
    lock_times.sort_unstable();
    let mid = lock_times.len() / 2;
    let median = if lock_times.len() % 2 == 1 {
        f64::from(lock_times[mid])
    } else {
        0.5 * (f64::from(lock_times[mid - 1]) + f64::from(lock_times[mid]))
    };

    Ok(ConvergenceReport {
        trials: cfg.trials,
        genie_rate: genie.value(),
        locked_fraction: f64::from(locked) / f64::from(cfg.trials),
        median_lock_time: median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qam() -> SignalModel {
        SignalModel::uncoded_qam(500).unwrap()
    }

    #[test]
    fn degenerate_bernoulli_draws() {
        // eps = 0 at astronomically high SNR: always ACK.
        let mut chan = ChannelSim::from_seed_trial(Snr::from_linear(1e9).unwrap(), qam(), 3, 0);
        for _ in 0..100 {
            assert_eq!(chan.draw_feedback(Rate::new(2.0).unwrap()).unwrap(), Feedback::Ack);
        }
        // eps = 1 (saturated) at tiny SNR: always NACK.
        let mut chan = ChannelSim::from_seed_trial(Snr::from_linear(1e-3).unwrap(), qam(), 3, 0);
        for _ in 0..100 {
            assert_eq!(chan.draw_feedback(Rate::new(8.0).unwrap()).unwrap(), Feedback::Nack);
        }
    }

    #[test]
    fn nack_frequency_within_binomial_ci() {
        let gamma = Snr::from_db(10.0);
        let rate = Rate::new(2.0).unwrap();
        let eps = qam().packet_error(gamma, rate).unwrap().value();
        let n = 100_000u32;
        let mut chan = ChannelSim::from_seed_trial(gamma, qam(), 99, 0);
        let mut nacks = 0u32;
        for _ in 0..n {
            if chan.draw_feedback(rate).unwrap() == Feedback::Nack {
                nacks += 1;
            }
        }
        let phat = f64::from(nacks) / f64::from(n);
        // 99% binomial CI (normal approximation, z = 2.576)
        let half = 2.576 * (eps * (1.0 - eps) / f64::from(n)).sqrt();
        assert!(
            (phat - eps).abs() <= half,
            "phat {phat} vs eps {eps} (half-width {half})"
        );
    }

    #[test]
    fn substreams_are_uncorrelated_at_lag_one() {
        // First uniform of consecutive trial substreams: lag-1 correlation
        // must vanish.
        let n = 100_000usize;
        let draws: Vec<f64> = (0..n as u64 + 1)
            .map(|trial| substream(12345, trial).random::<f64>())
            .collect();
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let (x, y) = (draws[i], draws[i + 1]);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let corr = (sxy - sx * sy / nf)
            / ((sxx - sx * sx / nf).sqrt() * (syy - sy * sy / nf).sqrt());
        assert!(corr.abs() < 0.01, "lag-1 correlation {corr}");
    }

    #[test]
    fn joint_feedback_frequencies_factorize() {
        // Conditional independence given the rates: the empirical joint of
        // (F at R1, F at R2) must match the product of the marginals.
        let gamma = Snr::from_db(10.0);
        let (r1, r2) = (Rate::new(1.0).unwrap(), Rate::new(2.0).unwrap());
        let model = qam();
        let e1 = model.packet_error(gamma, r1).unwrap().value();
        let e2 = model.packet_error(gamma, r2).unwrap().value();
        let n = 100_000u32;
        let mut chan = ChannelSim::from_seed_trial(gamma, model, 4242, 0);
        let mut joint = 0u32;
        for _ in 0..n {
            let f1 = chan.draw_feedback(r1).unwrap();
            let f2 = chan.draw_feedback(r2).unwrap();
            if f1 == Feedback::Nack && f2 == Feedback::Nack {
                joint += 1;
            }
        }
        let phat = f64::from(joint) / f64::from(n);
        let expected = e1 * e2;
        let half = 5.0 * (expected * (1.0 - expected) / f64::from(n)).sqrt();
        assert!((phat - expected).abs() <= half, "joint {phat} vs product {expected}");
    }

    #[test]
    fn single_trial_report_is_degenerate() {
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.trials = 1;
        cfg.t_p = 50;
        let rep = run_efficiency_experiment(&cfg).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.estimate_variance, 0.0);
    }

    #[test]
    fn parallel_and_sequential_runs_match_exactly() {
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.trials = 32;
        cfg.t_p = 400;
        let a = run_efficiency_experiment(&cfg).unwrap();
        let b = run_efficiency_experiment_seq(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trajectory_experiment_uses_per_gamma_streams() {
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.t_p = 100;
        let gammas = [Snr::from_db(5.0), Snr::from_db(10.0), Snr::from_db(20.0)];
        let trajs = run_trajectory_experiment(&cfg, &gammas).unwrap();
        assert_eq!(trajs.len(), 3);
        for t in &trajs {
            assert_eq!(t.len(), 100);
        }
        let again = run_trajectory_experiment(&cfg, &gammas).unwrap();
        assert_eq!(trajs, again);
    }

    #[test]
    fn config_validation_rejects_bad_setups() {
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.init_rate = Rate::new(2.5).unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = McConfig::qam_defaults(Snr::from_db(10.0)).unwrap();
        cfg.beta = 1.25;
        assert!(cfg.validate().is_err());
    }
}
