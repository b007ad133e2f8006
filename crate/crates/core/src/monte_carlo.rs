//! Direct simulation of the physical link.
//!
//! Trials are cut into fixed-size blocks. Block `b` draws from a ChaCha8
//! generator seeded with the master seed on stream `b`, and per-block
//! moments are merged in block order, so results depend only on
//! `(seed, trials)` and never on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::link::{ChannelConfig, Protocol, Variant};

/// Trials per block.
pub const BLOCK_SIZE: u64 = 1 << 16;
/// Smallest trial count the estimators accept.
pub const MIN_TRIALS: u64 = 1000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// One fading realization, in SNR units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDraw {
    pub gamma_h: f64,
    pub i_r: f64,
    pub w: f64,
    pub gamma_sr: f64,
    pub gamma_rd: f64,
}

/// Outage and ergodic estimates from one simulation pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEstimates {
    pub outage: MonteCarloEstimate,
    pub ergodic: MonteCarloEstimate,
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    // random() is in [0, 1), so 1 − U is in (0, 1].
    -mean * (1.0 - rng.random::<f64>()).ln()
}

/// Draws one realization of every channel and assembles the SNRs from the
/// harvested energy, exactly as the relay would.
pub fn sample_trial<R: Rng + ?Sized>(cfg: &ChannelConfig, proto: &Protocol, rng: &mut R) -> TrialDraw {
    let h = exponential(rng, cfg.mean_gain_sr);
    let g = exponential(rng, cfg.mean_gain_rd);
    let signal = cfg.source_power * h;
    let interference: f64 = cfg
        .interferer_powers
        .iter()
        .zip(&cfg.mean_gain_interferers)
        .map(|(p, omega)| p * exponential(rng, *omega))
        .sum();
    let received = signal + interference;
    // Relay transmit power per unit of received power, and the share of the
    // received power left for decoding.
    let (power_gain, info_share) = match proto.variant {
        Variant::TimeSwitching => {
            let a = proto.ratio;
            // E_H = η α T P_rx spent over the (1−α)T/2 relaying phase.
            (cfg.efficiency * a / ((1.0 - a) / 2.0), 1.0)
        }
        Variant::PowerSplitting => {
            let t = proto.ratio;
            // E_H = η θ P_rx T/2 spent over the T/2 relaying phase.
            (cfg.efficiency * t, 1.0 - t)
        }
    };
    let gamma_h = info_share * signal / cfg.relay_noise_var;
    let i_r = info_share * interference / cfg.relay_noise_var;
    let relay_power = power_gain * received;
    let gamma_rd = relay_power * g / cfg.dest_noise_var;
    let w = power_gain / info_share * cfg.relay_noise_var / cfg.dest_noise_var * g;
    TrialDraw {
        gamma_h,
        i_r,
        w,
        gamma_sr: gamma_h / (1.0 + i_r),
        gamma_rd,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn estimate(&self, seed: u64) -> MonteCarloEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        MonteCarloEstimate {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            trials: self.n,
            seed,
        }
    }
}

fn check_inputs(cfg: &ChannelConfig, proto: &Protocol, trials: u64) -> Result<()> {
    cfg.validate()?;
    if !proto.is_interior() {
        return Err(Error::Config(format!(
            "simulation needs a harvesting ratio strictly inside (0, 1), got {}",
            proto.ratio
        )));
    }
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("at least {MIN_TRIALS} trials required, got {trials}")));
    }
    Ok(())
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_len(trials: u64, block: u64) -> u64 {
    (trials - block * BLOCK_SIZE).min(BLOCK_SIZE)
}

fn simulate<const K: usize, F>(
    cfg: &ChannelConfig,
    proto: &Protocol,
    trials: u64,
    seed: u64,
    observe: F,
) -> Result<[MonteCarloEstimate; K]>
where
    F: Fn(&TrialDraw) -> [f64; K] + Sync,
{
    check_inputs(cfg, proto, trials)?;
    let blocks = trials.div_ceil(BLOCK_SIZE);
    let per_block: Vec<[Moments; K]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let mut acc = [Moments::default(); K];
            for _ in 0..block_len(trials, b) {
                let draw = sample_trial(cfg, proto, &mut rng);
                for (m, x) in acc.iter_mut().zip(observe(&draw)) {
                    m.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = [Moments::default(); K];
    for block in &per_block {
        for (t, m) in total.iter_mut().zip(block) {
            t.merge(m);
        }
    }
    Ok(total.map(|m| m.estimate(seed)))
}

fn is_outage(d: &TrialDraw, gamma_th: f64) -> bool {
    d.gamma_sr <= gamma_th || d.gamma_rd <= gamma_th
}

fn instantaneous_capacity(d: &TrialDraw) -> f64 {
    0.5 * (1.0 + d.gamma_sr.min(d.gamma_rd)).log2()
}

/// Fraction of trials in which the relay or the destination fails to decode.
pub fn mc_outage(
    cfg: &ChannelConfig,
    proto: &Protocol,
    gamma_th: f64,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let [e] = simulate(cfg, proto, trials, seed, |d| {
        [f64::from(u8::from(is_outage(d, gamma_th)))]
    })?;
    Ok(e)
}

/// Sample mean of `(1/2) log₂(1 + min(γ_SR, γ_RD))`.
pub fn mc_ergodic(cfg: &ChannelConfig, proto: &Protocol, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    let [e] = simulate(cfg, proto, trials, seed, |d| [instantaneous_capacity(d)])?;
    Ok(e)
}

/// Outage and ergodic estimates sharing the same draws.
pub fn mc_link(
    cfg: &ChannelConfig,
    proto: &Protocol,
    gamma_th: f64,
    trials: u64,
    seed: u64,
) -> Result<LinkEstimates> {
    let [outage, ergodic] = simulate(cfg, proto, trials, seed, |d| {
        [f64::from(u8::from(is_outage(d, gamma_th))), instantaneous_capacity(d)]
    })?;
    Ok(LinkEstimates { outage, ergodic })
}

/// The raw draws, in the same order the estimators consume them.
pub fn sample_draws(cfg: &ChannelConfig, proto: &Protocol, trials: u64, seed: u64) -> Result<Vec<TrialDraw>> {
    check_inputs(cfg, proto, trials)?;
    let blocks = trials.div_ceil(BLOCK_SIZE);
    let chunks: Vec<Vec<TrialDraw>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            (0..block_len(trials, b))
                .map(|_| sample_trial(cfg, proto, &mut rng))
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::effective_params;

    fn preset(m: usize) -> ChannelConfig {
        let weights = [0.6, 0.4, 0.3, 0.2, 0.1];
        ChannelConfig {
            source_power: 100.0,
            interferer_powers: weights[..m].iter().map(|w| 10.0 * w).collect(),
            relay_noise_var: 1.0,
            dest_noise_var: 1.0,
            mean_gain_sr: 1.0,
            mean_gain_rd: 1.0,
            mean_gain_interferers: vec![1.0; m],
            efficiency: 1.0,
        }
    }

    #[test]
    fn draws_satisfy_their_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for proto in [Protocol::time_switching(0.3).unwrap(), Protocol::power_splitting(0.6).unwrap()] {
            for _ in 0..1000 {
                let d = sample_trial(&preset(2), &proto, &mut rng);
                assert_eq!(d.gamma_sr, d.gamma_h / (1.0 + d.i_r));
                let alt = d.w * (d.gamma_h + d.i_r);
                assert!((d.gamma_rd - alt).abs() <= 1e-12 * d.gamma_rd.max(1e-300));
            }
        }
    }

    #[test]
    fn no_harvesting_efficiency_means_silent_relay() {
        let mut cfg = preset(2);
        cfg.efficiency = 0.0;
        let proto = Protocol::time_switching(0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!((0..100).all(|_| sample_trial(&cfg, &proto, &mut rng).gamma_rd == 0.0));
        assert_eq!(mc_ergodic(&cfg, &proto, 2000, 1).unwrap().mean, 0.0);
    }

    #[test]
    fn no_interferers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = sample_trial(&preset(0), &Protocol::power_splitting(0.5).unwrap(), &mut rng);
        assert_eq!(d.i_r, 0.0);
        assert_eq!(d.gamma_sr, d.gamma_h);
    }

    #[test]
    fn first_hop_mean_matches_effective_params() {
        let cfg = preset(2);
        let proto = Protocol::power_splitting(0.3).unwrap();
        let p = effective_params(&cfg, &proto).unwrap();
        let draws = sample_draws(&cfg, &proto, 1_000_000, 9).unwrap();
        let n = draws.len() as f64;
        let mean = draws.iter().map(|d| d.gamma_h).sum::<f64>() / n;
        let var = draws.iter().map(|d| (d.gamma_h - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - p.gbar_h()).abs() < 3.0 * (var / n).sqrt());
    }

    #[test]
    fn thresholds_at_extremes() {
        let cfg = preset(2);
        let proto = Protocol::time_switching(0.2).unwrap();
        assert_eq!(mc_outage(&cfg, &proto, 0.0, 5000, 4).unwrap().mean, 0.0);
        assert_eq!(mc_outage(&cfg, &proto, 1e12, 5000, 4).unwrap().mean, 1.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = preset(2);
        let proto = Protocol::time_switching(0.2).unwrap();
        let trials = 3 * BLOCK_SIZE + 17;
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_link(&cfg, &proto, 6.3, trials, 42).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
        assert_eq!(one.outage.trials, trials);
    }

    #[test]
    fn merged_moments_match_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(77) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            merged.merge(&m);
        }
        assert!((whole.mean - merged.mean).abs() < 1e-12);
        assert!((whole.m2 - merged.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = preset(1);
        let proto = Protocol::time_switching(0.2).unwrap();
        assert!(mc_outage(&cfg, &proto, 1.0, 999, 0).is_err());
        assert!(mc_outage(&cfg, &Protocol::time_switching(1.0).unwrap(), 1.0, 1000, 0).is_err());
    }
}
