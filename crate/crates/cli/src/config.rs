//! Experiment configuration: JSON file schema plus flag merging. Every
//! field is optional in the file; explicit command-line flags always win,
//! then file values, then the subcommand defaults.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use arq_rateadapt_core::error_models::RateSet;

/// `--config` file schema. Subcommands read the fields they understand and
/// reject a sweep declared for a different variable.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub target_error: Option<f64>,
    pub alpha: Option<f64>,
    pub n: Option<u32>,
    pub rates: Option<RateSetSpec>,
    pub gamma_db: Option<Vec<f64>>,
    pub regime: Option<String>,
    pub block_len: Option<Vec<u32>>,
    pub sweep: Option<SweepSpec>,
    pub beta: Option<f64>,
    pub tp: Option<u32>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub init_gamma_db: Option<f64>,
    pub init_rate: Option<f64>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

/// Rate-set description: an explicit list, an integer ladder, or points
/// equally spaced over `(0, upper]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSetSpec {
    List(Vec<f64>),
    Integer { lo: u32, hi: u32 },
    Spaced { upper: f64, points: usize },
}

impl RateSetSpec {
    pub fn build(&self) -> Result<RateSet, String> {
        match self {
            RateSetSpec::List(v) => RateSet::new(v.clone()),
            RateSetSpec::Integer { lo, hi } => RateSet::integer_range(*lo, *hi),
            RateSetSpec::Spaced { upper, points } => RateSet::spaced_open(*upper, *points),
        }
        .map_err(|e| e.to_string())
    }
}

/// One sweep over a named variable.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepSpec {
    pub variable: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: String,
}

/// Fully resolved sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub scale: Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    /// Evenly spaced values.
    Linear,
    /// Evenly spaced in dB; values emitted in dB.
    Db,
    /// Evenly spaced in log10.
    Log,
}

impl Scale {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Scale::Linear),
            "db" | "dB" => Ok(Scale::Db),
            "log" => Ok(Scale::Log),
            other => Err(format!("unknown sweep scale '{other}' (linear|db|log)")),
        }
    }
}

impl Sweep {
    /// Merges flags over the file sweep over defaults, checking the variable
    /// name and the `points >= 2` invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        variable: &str,
        flag_from: Option<f64>,
        flag_to: Option<f64>,
        flag_points: Option<usize>,
        flag_scale: Option<Scale>,
        file: Option<&SweepSpec>,
        default: (f64, f64, usize, Scale),
    ) -> Result<Self, String> {
        if let Some(spec) = file {
            if spec.variable != variable {
                return Err(format!(
                    "config sweeps '{}' but this command sweeps '{variable}'",
                    spec.variable
                ));
            }
        }
        let from = flag_from.or(file.map(|s| s.from)).unwrap_or(default.0);
        let to = flag_to.or(file.map(|s| s.to)).unwrap_or(default.1);
        let points = flag_points.or(file.map(|s| s.points)).unwrap_or(default.2);
        let scale = match (flag_scale, file) {
            (Some(s), _) => s,
            (None, Some(spec)) => Scale::parse(&spec.scale)?,
            (None, None) => default.3,
        };
        if points < 2 {
            return Err(format!("sweep needs at least 2 points, got {points}"));
        }
        if !(from.is_finite() && to.is_finite()) || from == to {
            return Err(format!("bad sweep range [{from}, {to}]"));
        }
        if scale == Scale::Log && (from <= 0.0 || to <= 0.0) {
            return Err("log sweeps need positive endpoints".into());
        }
        Ok(Sweep { from, to, points, scale })
    }

    /// The swept grid. `Db` returns the values in dB (conversion to linear
    /// is the caller's concern).
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear | Scale::Db => self.from + (self.to - self.from) * t,
                    Scale::Log => {
                        10f64.powf(self.from.log10() + (self.to.log10() - self.from.log10()) * t)
                    }
                }
            })
            .collect()
    }
}

/// QoS exponent from `--alpha` / `--target-error` flags and file fields.
/// Exactly one source wins: flags conflict if both given; otherwise alpha
/// takes precedence over target error; default target error 1e-3.
pub fn resolve_alpha(
    flag_alpha: Option<f64>,
    flag_target: Option<f64>,
    file: &FileConfig,
) -> Result<f64, String> {
    if flag_alpha.is_some() && flag_target.is_some() {
        return Err("pass either --alpha or --target-error, not both".into());
    }
    let alpha = flag_alpha.or(file.alpha);
    let target = flag_target.or(file.target_error);
    let alpha = match (alpha, target) {
        (Some(a), _) => a,
        (None, Some(t)) => {
            if !(t > 0.0 && t < 1.0) {
                return Err(format!("target error {t} outside (0, 1)"));
            }
            -t.ln()
        }
        (None, None) => -(1e-3f64).ln(),
    };
    if !(alpha > 0.0) {
        return Err(format!("alpha must be positive, got {alpha}"));
    }
    Ok(alpha)
}
