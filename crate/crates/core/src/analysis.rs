//! Harvesting-ratio sweeps and optimization, and majorization checks on
//! interference profiles.

use log::warn;
use rayon::prelude::*;

use crate::capacity::{ergodic_capacity, outage_capacity, throughput, CapacityMethod, CapacityResult};
use crate::error::{Error, Result};
use crate::link::{effective_params, ChannelConfig, Protocol, Variant};
use crate::monte_carlo::{mc_link, MonteCarloEstimate};
use crate::special::QuadratureSettings;

/// Points in the coarse scan of [`optimize_ratio`].
pub const COARSE_POINTS: usize = 33;
/// Trials used when a Schur comparison has to fall back to simulation.
pub const FALLBACK_TRIALS: u64 = 1_000_000;
/// Seed used when a Schur comparison has to fall back to simulation.
pub const FALLBACK_SEED: u64 = 42;

/// Throughput figure of merit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Throughput built on the ergodic capacity.
    ErgodicThroughput,
    /// Throughput built on the outage capacity at the threshold.
    OutageThroughput,
}

impl Metric {
    pub fn label(self) -> &'static str {
        match self {
            Metric::ErgodicThroughput => "T_erg",
            Metric::OutageThroughput => "T_out",
        }
    }
}

/// Throughput and its error estimate for one configuration. Ratios at the
/// endpoints of `[0, 1]` give zero.
pub fn evaluate_metric(
    cfg: &ChannelConfig,
    proto: &Protocol,
    metric: Metric,
    gamma_th: f64,
    q: &QuadratureSettings,
) -> Result<(f64, f64)> {
    if !proto.is_interior() {
        cfg.validate()?;
        return Ok((0.0, 0.0));
    }
    let attach = |e: Error| Error::AtRatio {
        ratio: proto.ratio,
        source: Box::new(e),
    };
    let p = effective_params(cfg, proto).map_err(attach)?;
    let c = match metric {
        Metric::ErgodicThroughput => ergodic_capacity(&p, q),
        Metric::OutageThroughput => outage_capacity(&p, gamma_th),
    }
    .map_err(attach)?;
    Ok(throughput_with_error(proto, &c))
}

fn throughput_with_error(proto: &Protocol, c: &CapacityResult) -> (f64, f64) {
    let unit = CapacityResult { value: 1.0, ..*c };
    let factor = throughput(proto, &unit);
    (throughput(proto, c), factor * c.est_error)
}

/// Ergodic and outage throughput from one simulation pass.
pub fn simulate_throughputs(
    cfg: &ChannelConfig,
    proto: &Protocol,
    gamma_th: f64,
    trials: u64,
    seed: u64,
) -> Result<(MonteCarloEstimate, MonteCarloEstimate)> {
    let est = mc_link(cfg, proto, gamma_th, trials, seed)?;
    let unit = CapacityResult {
        value: 1.0,
        method: CapacityMethod::MonteCarlo,
        est_error: 0.0,
    };
    let factor = throughput(proto, &unit);
    let rate = 0.5 * (1.0 + gamma_th).log2();
    let ergodic = MonteCarloEstimate {
        mean: factor * est.ergodic.mean,
        std_error: factor * est.ergodic.std_error,
        ..est.ergodic
    };
    let outage = MonteCarloEstimate {
        mean: factor * rate * (1.0 - est.outage.mean),
        std_error: factor * rate * est.outage.std_error,
        ..est.outage
    };
    Ok((ergodic, outage))
}

/// One throughput from simulation, used when the analytic routes fail.
pub fn simulate_metric(
    cfg: &ChannelConfig,
    proto: &Protocol,
    metric: Metric,
    gamma_th: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let (ergodic, outage) = simulate_throughputs(cfg, proto, gamma_th, trials, seed)?;
    Ok(match metric {
        Metric::ErgodicThroughput => ergodic,
        Metric::OutageThroughput => outage,
    })
}

/// Throughput over a grid of harvesting ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variant: Variant,
    pub metric: Metric,
    pub ratios: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_ratio: f64,
    pub max_value: f64,
}

/// `0.01, 0.02, …, 0.99`.
pub fn default_ratio_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("ratio grid is empty".into()));
    }
    if grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Config("ratio grid must lie strictly inside (0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("ratio grid must be strictly increasing".into()));
    }
    Ok(())
}

fn evaluate_grid(
    cfg: &ChannelConfig,
    variant: Variant,
    grid: &[f64],
    metric: Metric,
    gamma_th: f64,
    q: &QuadratureSettings,
) -> Result<Vec<f64>> {
    grid.par_iter()
        .map(|&r| {
            let proto = Protocol::new(variant, r)?;
            evaluate_metric(cfg, &proto, metric, gamma_th, q).map(|(v, _)| v)
        })
        .collect()
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Evaluates the metric at every grid ratio and records the best one.
pub fn sweep_ratio(
    cfg: &ChannelConfig,
    variant: Variant,
    grid: &[f64],
    metric: Metric,
    gamma_th: f64,
    q: &QuadratureSettings,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let values = evaluate_grid(cfg, variant, grid, metric, gamma_th, q)?;
    let k = argmax(&values);
    Ok(SweepResult {
        variant,
        metric,
        ratios: grid.to_vec(),
        argmax_ratio: grid[k],
        max_value: values[k],
        values,
    })
}

/// Best harvesting ratio found by [`optimize_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub ratio: f64,
    pub value: f64,
    /// The coarse scan showed more than one strict local maximum.
    pub multimodal: bool,
}

fn strict_local_maxima(values: &[f64]) -> usize {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i + 1 == n || values[i] > values[i + 1];
            left && right && n > 1
        })
        .count()
}

/// Coarse scan on `i/34`, `i = 1..=33`, then golden-section search inside
/// the bracket around the best coarse point until it is narrower than `tol`.
pub fn optimize_ratio(
    cfg: &ChannelConfig,
    variant: Variant,
    metric: Metric,
    gamma_th: f64,
    tol: f64,
    q: &QuadratureSettings,
) -> Result<Optimum> {
    if !(1e-6..=1e-2).contains(&tol) {
        return Err(Error::Config(format!("optimizer tolerance must lie in [1e-6, 1e-2], got {tol}")));
    }
    let step = 1.0 / (COARSE_POINTS + 1) as f64;
    let grid: Vec<f64> = (1..=COARSE_POINTS).map(|i| i as f64 * step).collect();
    let values = evaluate_grid(cfg, variant, &grid, metric, gamma_th, q)?;
    let multimodal = strict_local_maxima(&values) > 1;
    if multimodal {
        warn!(
            "{} {} versus ratio has several local maxima on the coarse grid; \
             the refined optimum is local to the best coarse point",
            variant.label(),
            metric.label()
        );
    }
    let k = argmax(&values);
    let mut best = (grid[k], values[k]);
    let eval = |r: f64| -> Result<f64> {
        let proto = Protocol::new(variant, r)?;
        evaluate_metric(cfg, &proto, metric, gamma_th, q).map(|(v, _)| v)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (grid[k] - step, grid[k] + step);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > best.1 {
            best = (x, f);
        }
    }
    Ok(Optimum {
        ratio: best.0,
        value: best.1,
        multimodal,
    })
}

/// Whether `x` majorizes `y`: equal totals and every prefix sum of `x`
/// sorted descending dominates that of `y`.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "majorization needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("majorization needs non-negative entries".into()));
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let (tx, ty): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let slack = 1e-9 * tx.max(ty);
    if (tx - ty).abs() > slack {
        return Ok(false);
    }
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px < py - slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How two interference profiles compare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairOutcome {
    /// `larger` majorizes `smaller`; `holds` records whether the metric
    /// respected the order within tolerance.
    Ordered { larger: usize, smaller: usize, holds: bool },
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurPair {
    pub first: usize,
    pub second: usize,
    pub outcome: PairOutcome,
    pub tolerance: f64,
}

/// Metric values for each profile and the verdict on every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub pairs: Vec<SchurPair>,
}

impl SchurReport {
    /// No comparable pair violates the ordering.
    pub fn all_hold(&self) -> bool {
        self.pairs
            .iter()
            .all(|p| !matches!(p.outcome, PairOutcome::Ordered { holds: false, .. }))
    }
}

/// Configuration with the given interferer powers, each on a unit-mean
/// channel; zero entries are dropped.
pub fn with_interferer_powers(template: &ChannelConfig, powers: &[f64]) -> ChannelConfig {
    let powers: Vec<f64> = powers.iter().copied().filter(|&p| p > 0.0).collect();
    ChannelConfig {
        mean_gain_interferers: vec![1.0; powers.len()],
        interferer_powers: powers,
        ..template.clone()
    }
}

/// Checks that the metric is ordered like the interference profiles under
/// majorization. Each profile lists interferer powers on unit-mean channels;
/// the other fields come from `template`.
///
/// A profile whose analytic evaluation fails is simulated instead.
pub fn schur_order_check(
    template: &ChannelConfig,
    profiles: &[Vec<f64>],
    proto: &Protocol,
    metric: Metric,
    gamma_th: f64,
    q: &QuadratureSettings,
) -> Result<SchurReport> {
    let evaluated: Vec<(f64, f64)> = profiles
        .par_iter()
        .map(|powers| {
            let cfg = with_interferer_powers(template, powers);
            match evaluate_metric(&cfg, proto, metric, gamma_th, q) {
                Ok(v) => Ok(v),
                Err(e) => {
                    warn!("analytic evaluation failed ({e}); simulating instead");
                    simulate_metric(&cfg, proto, metric, gamma_th, FALLBACK_TRIALS, FALLBACK_SEED)
                        .map(|m| (m.mean, 3.0 * m.std_error))
                }
            }
        })
        .collect::<Result<_>>()?;
    let (values, errors): (Vec<f64>, Vec<f64>) = evaluated.into_iter().unzip();
    let mut pairs = Vec::new();
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            let tolerance = 1e-6 + errors[i] + errors[j];
            let order = if majorizes(&profiles[i], &profiles[j])? {
                Some((i, j))
            } else if majorizes(&profiles[j], &profiles[i])? {
                Some((j, i))
            } else {
                None
            };
            let outcome = match order {
                Some((larger, smaller)) => PairOutcome::Ordered {
                    larger,
                    smaller,
                    holds: values[larger] >= values[smaller] - tolerance,
                },
                None => PairOutcome::Incomparable,
            };
            pairs.push(SchurPair {
                first: i,
                second: j,
                outcome,
                tolerance,
            });
        }
    }
    Ok(SchurReport { values, errors, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(sir_db: f64) -> ChannelConfig {
        let ps = 100.0;
        let pi = ps / 10f64.powf(sir_db / 10.0);
        ChannelConfig {
            source_power: ps,
            interferer_powers: vec![0.6 * pi, 0.4 * pi],
            relay_noise_var: 1.0,
            dest_noise_var: 1.0,
            mean_gain_sr: 1.0,
            mean_gain_rd: 1.0,
            mean_gain_interferers: vec![1.0, 1.0],
            efficiency: 1.0,
        }
    }

    fn gth() -> f64 {
        10f64.powf(0.8)
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[1.0, 0.0, 0.0, 0.0, 0.0], &[0.6, 0.4, 0.0, 0.0, 0.0]).unwrap());
        assert!(majorizes(&[0.3, 0.7], &[0.3, 0.7]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[0.6, 0.4]).unwrap());
        assert!(majorizes(&[0.6, 0.4], &[0.5, 0.5]).unwrap());
        assert!(!majorizes(&[0.6, 0.5], &[0.5, 0.5]).unwrap());
        assert!(majorizes(&[1.0], &[1.0, 0.0]).is_err());
        assert!(majorizes(&[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn sweep_vanishes_at_both_ends_with_interior_peak() {
        let q = QuadratureSettings::default();
        let grid = [0.001, 0.1, 0.2, 0.3, 0.5, 0.7, 0.999];
        let s = sweep_ratio(&preset(10.0), Variant::TimeSwitching, &grid, Metric::OutageThroughput, gth(), &q)
            .unwrap();
        assert!(s.values[0] < 0.05 * s.max_value);
        assert!(s.values[6] < 0.05 * s.max_value);
        assert!(s.argmax_ratio > 0.001 && s.argmax_ratio < 0.999);
        assert!(sweep_ratio(&preset(10.0), Variant::TimeSwitching, &[0.5, 0.2], Metric::OutageThroughput, 1.0, &q)
            .is_err());
        assert!(sweep_ratio(&preset(10.0), Variant::TimeSwitching, &[], Metric::OutageThroughput, 1.0, &q).is_err());
    }

    #[test]
    fn optimizer_agrees_with_dense_scan() {
        let q = QuadratureSettings::default();
        let cfg = preset(10.0);
        let tol = 1e-4;
        let opt = optimize_ratio(&cfg, Variant::PowerSplitting, Metric::OutageThroughput, gth(), tol, &q).unwrap();
        let dense: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let s = sweep_ratio(&cfg, Variant::PowerSplitting, &dense, Metric::OutageThroughput, gth(), &q).unwrap();
        assert!((opt.ratio - s.argmax_ratio).abs() <= tol.max(1e-3));
        assert!(opt.value >= s.max_value - 1e-9);
        assert!(!opt.multimodal);
    }

    #[test]
    fn zero_metric_optimum_is_zero() {
        let mut cfg = preset(10.0);
        cfg.efficiency = 0.0;
        let opt = optimize_ratio(
            &cfg,
            Variant::TimeSwitching,
            Metric::OutageThroughput,
            gth(),
            1e-3,
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(opt.value, 0.0);
    }

    #[test]
    fn optimizer_rejects_bad_tolerance() {
        let r = optimize_ratio(
            &preset(10.0),
            Variant::TimeSwitching,
            Metric::OutageThroughput,
            gth(),
            0.5,
            &QuadratureSettings::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn local_maxima_count() {
        assert_eq!(strict_local_maxima(&[0.0, 1.0, 0.5]), 1);
        assert_eq!(strict_local_maxima(&[0.0, 1.0, 0.5, 0.7, 0.2]), 2);
        assert_eq!(strict_local_maxima(&[0.0, 0.0, 0.0]), 0);
    }

    #[test]
    fn singleton_schur_report_is_empty() {
        let r = schur_order_check(
            &preset(10.0),
            &[vec![6.0, 4.0]],
            &Protocol::time_switching(0.2).unwrap(),
            Metric::OutageThroughput,
            gth(),
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!(r.pairs.is_empty());
        assert!(r.all_hold());
    }

    #[test]
    fn endpoint_ratio_gives_zero() {
        let (v, _) = evaluate_metric(
            &preset(10.0),
            &Protocol::time_switching(1.0).unwrap(),
            Metric::ErgodicThroughput,
            gth(),
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }
}
