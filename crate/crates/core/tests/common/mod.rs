#![allow(dead_code)]

use ehrelay::cli::db_to_linear;
use ehrelay::link::{ChannelConfig, Protocol, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 20_240_601;
pub const CORPUS_SIZE: usize = 20;

#[derive(Debug, Clone)]
pub struct Case {
    pub index: usize,
    pub cfg: ChannelConfig,
    pub proto: Protocol,
    pub gamma_th: f64,
}

/// Relative interferer powers: strictly increasing by at least 1.25x, or
/// with repeats, depending on `repeated`.
fn weights<R: Rng>(rng: &mut R, m: usize, repeated: bool) -> Vec<f64> {
    let mut distinct = Vec::new();
    let mut w = 1.0;
    let levels = if repeated { m.div_ceil(2) } else { m };
    for _ in 0..levels {
        distinct.push(w);
        w *= rng.random_range(1.25..3.0);
    }
    if !repeated {
        return distinct;
    }
    (0..m).map(|i| distinct[i / 2]).collect()
}

/// Randomized link configurations: M cycles through 0, 1, 2, 5, the
/// protocol alternates every four cases, and half the multi-interferer
/// cases repeat a power level.
pub fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|k| {
            let m = [0, 1, 2, 5][k % 4];
            let variant = if (k / 4) % 2 == 0 {
                Variant::TimeSwitching
            } else {
                Variant::PowerSplitting
            };
            let snr_db = rng.random_range(5.0..30.0);
            let sir_db = rng.random_range(3.0..20.0);
            let ratio = rng.random_range(0.1..0.8);
            let gamma_th_db = rng.random_range(0.0..10.0);
            let eta = rng.random_range(0.5..1.0);
            let repeated = m > 1 && (k / 8) % 2 == 1;
            let w = weights(&mut rng, m, repeated);
            let total: f64 = w.iter().sum();
            let source_power = db_to_linear(snr_db);
            let interference = source_power / db_to_linear(sir_db);
            let cfg = ChannelConfig {
                source_power,
                interferer_powers: w.iter().map(|x| x / total * interference).collect(),
                relay_noise_var: 1.0,
                dest_noise_var: 1.0,
                mean_gain_sr: 1.0,
                mean_gain_rd: 1.0,
                mean_gain_interferers: vec![1.0; m],
                efficiency: eta,
            };
            Case {
                index: k,
                cfg,
                proto: Protocol::new(variant, ratio).unwrap(),
                gamma_th: db_to_linear(gamma_th_db),
            }
        })
        .collect()
}

/// Parsed CSV: header and rows of fields.
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn parse(text: &str) -> Self {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("").split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { header, rows }
    }

    pub fn column(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }

    pub fn f64_at(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.column(name)].parse().unwrap()
    }
}

/// Runs the command-line front end in process.
pub fn run_cli(args: &[&str]) -> i32 {
    let mut full = vec!["ehrelay"];
    full.extend_from_slice(args);
    ehrelay::cli::run(full)
}
