//! Small statistics toolkit shared by the Monte Carlo runners and tests:
//! streaming mean/variance, the standard normal CDF, and a one-sample
//! Kolmogorov-Smirnov test against it.

use statrs::function::erf::erfc;

/// Welford's streaming mean and (sample) variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 until two values have been seen.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

/// CDF of the standard normal distribution.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic of `sample` against `cdf`.
/// `D = sup_x |F_n(x) - F(x)|`; the sample is sorted internally.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sample.is_empty(), "KS statistic needs at least one sample");
    sample.sort_by(|a, b| a.partial_cmp(b).expect("KS sample must not contain NaN"));
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    d
}

/// Asymptotic p-value for a KS statistic `d` at sample size `n`
/// (Stephens' finite-sample correction of the Kolmogorov distribution).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let mut p = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        p += sign * 2.0 * (-2.0 * jf * jf * lambda * lambda).exp();
        sign = -sign;
    }
    p.clamp(0.0, 1.0)
}
