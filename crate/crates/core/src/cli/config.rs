use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::analysis::Metric;
use crate::link::{ChannelConfig, Protocol, Variant};

pub const DEFAULT_SNR_DB: f64 = 20.0;
pub const DEFAULT_SIR_DB: f64 = 10.0;
pub const DEFAULT_GAMMA_TH_DB: f64 = 8.0;
pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_TS_RATIO: f64 = 0.2;
pub const DEFAULT_PS_RATIO: f64 = 0.6;
pub const DEFAULT_MU: [f64; 2] = [0.6, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    Ts,
    Ps,
}

impl From<ProtocolArg> for Variant {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Ts => Variant::TimeSwitching,
            ProtocolArg::Ps => Variant::PowerSplitting,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    /// Throughput from the ergodic capacity.
    Erg,
    /// Throughput from the outage capacity.
    Out,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Erg => Metric::ErgodicThroughput,
            MetricArg::Out => Metric::OutageThroughput,
        }
    }
}

/// Link and run settings shared by every subcommand.
///
/// Noise variances and mean channel gains are fixed to one, so the source
/// power equals the first-hop SNR and the total interference power is
/// `P_S / SIR`, split across interferers in proportion to `--mu`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON object supplying any of the options below; flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Harvesting protocol [default: ts].
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Harvesting ratio α (ts) or θ (ps) [default: 0.2 for ts, 0.6 for ps].
    #[arg(long)]
    pub ratio: Option<f64>,
    /// First-hop average SNR in dB [default: 20].
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Average signal-to-interference ratio at the relay in dB [default: 10].
    #[arg(long, allow_negative_numbers = true)]
    pub sir_db: Option<f64>,
    /// Decoding threshold in dB [default: 8].
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_th_db: Option<f64>,
    /// Energy conversion efficiency in [0, 1] [default: 1].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Relative interferer powers, normalized to sum to one [default: 0.6,0.4].
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mu: Option<Vec<f64>>,
    /// Throughput metric [default: erg].
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Monte Carlo trials [default: 1000000].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Monte Carlo seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ratio tolerance of the optimizer [default: 1e-4].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Add simulated columns with standard errors.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    protocol: Option<ProtocolArg>,
    ratio: Option<f64>,
    snr_db: Option<f64>,
    sir_db: Option<f64>,
    gamma_th_db: Option<f64>,
    eta: Option<f64>,
    mu: Option<Vec<f64>>,
    metric: Option<MetricArg>,
    trials: Option<u64>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
    validate: Option<bool>,
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Fully resolved settings. Decibel inputs are kept for reporting; the
/// linear values are what the computations use.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub ratio: f64,
    pub snr_db: f64,
    pub sir_db: f64,
    pub gamma_th_db: f64,
    pub snr: f64,
    pub sir: f64,
    pub gamma_th: f64,
    pub eta: f64,
    pub mu: Vec<f64>,
    pub metric: Metric,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
    pub validate: bool,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Interference weights scaled to sum to one, zeros dropped.
pub fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        bail!("interference weights must be finite and non-negative, got {weights:?}");
    }
    let total: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Ok(Vec::new());
    }
    if total <= 0.0 {
        bail!("interference weights must not all be zero");
    }
    Ok(weights.iter().filter(|&&w| w > 0.0).map(|w| w / total).collect())
}

/// Unit noise and unit mean gains; `P_S = SNR`, `Σ P_i = P_S / SIR`.
pub fn preset_channel(snr_db: f64, sir_db: f64, eta: f64, weights: &[f64]) -> ChannelConfig {
    let source_power = db_to_linear(snr_db);
    let interference = source_power / db_to_linear(sir_db);
    let interferer_powers: Vec<f64> = weights.iter().map(|w| w * interference).collect();
    ChannelConfig {
        source_power,
        mean_gain_interferers: vec![1.0; interferer_powers.len()],
        interferer_powers,
        relay_noise_var: 1.0,
        dest_noise_var: 1.0,
        mean_gain_sr: 1.0,
        mean_gain_rd: 1.0,
        efficiency: eta,
    }
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file_config(p)?,
            None => FileConfig::default(),
        };
        let variant: Variant = args.protocol.or(file.protocol).unwrap_or(ProtocolArg::Ts).into();
        let ratio = args.ratio.or(file.ratio).unwrap_or(match variant {
            Variant::TimeSwitching => DEFAULT_TS_RATIO,
            Variant::PowerSplitting => DEFAULT_PS_RATIO,
        });
        let snr_db = args.snr_db.or(file.snr_db).unwrap_or(DEFAULT_SNR_DB);
        let sir_db = args.sir_db.or(file.sir_db).unwrap_or(DEFAULT_SIR_DB);
        let gamma_th_db = args.gamma_th_db.or(file.gamma_th_db).unwrap_or(DEFAULT_GAMMA_TH_DB);
        let eta = args.eta.or(file.eta).unwrap_or(1.0);
        let mu = args.mu.clone().or(file.mu).unwrap_or_else(|| DEFAULT_MU.to_vec());
        let tolerance = args.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        for (name, v) in [("snr_db", snr_db), ("sir_db", sir_db), ("gamma_th_db", gamma_th_db)] {
            if !v.is_finite() {
                bail!("{name} must be finite, got {v}");
            }
        }
        if !(0.0..=1.0).contains(&eta) {
            bail!("eta must lie in [0, 1], got {eta}");
        }
        Protocol::new(variant, ratio)?;
        Ok(Self {
            variant,
            ratio,
            snr_db,
            sir_db,
            gamma_th_db,
            snr: db_to_linear(snr_db),
            sir: db_to_linear(sir_db),
            gamma_th: db_to_linear(gamma_th_db),
            eta,
            mu: normalize_weights(&mu)?,
            metric: args.metric.or(file.metric).unwrap_or(MetricArg::Erg).into(),
            trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tolerance,
            out: args.out.clone().or(file.out),
            validate: args.validate || file.validate.unwrap_or(false),
        })
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            variant: self.variant,
            ratio: self.ratio,
        }
    }

    pub fn channel(&self) -> ChannelConfig {
        preset_channel(self.snr_db, self.sir_db, self.eta, &self.mu)
    }
}
