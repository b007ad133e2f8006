use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use super::config::{normalize_weights, preset_channel, RunConfig};
use super::table::{num, Table};
use crate::analysis::{
    default_ratio_grid, evaluate_metric, majorizes, optimize_ratio, schur_order_check, simulate_throughputs,
    sweep_ratio, Metric, PairOutcome,
};
use crate::capacity::{ergodic_capacity, throughput};
use crate::link::{effective_params, outage_probability_auto, OutageMethod, Protocol, Variant};
use crate::monte_carlo::mc_link;
use crate::special::QuadratureSettings;

/// Output of a subcommand: the CSV and a one-line summary.
pub struct Report {
    pub table: Table,
    pub summary: String,
}

/// Normalized interference profiles of the distribution figures.
pub const PROFILES: [[f64; 5]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.6, 0.4, 0.0, 0.0, 0.0],
    [0.2, 0.2, 0.2, 0.2, 0.2],
];
/// SIR values (dB) of the ratio and optimum figures.
pub const FIGURE_SIRS_DB: [f64; 3] = [5.0, 10.0, 15.0];
/// First-hop SNR (dB) of the ratio figures.
pub const FIGURE_SNR_DB: f64 = 20.0;
/// SIR (dB) of the distribution figures.
pub const PROFILE_FIGURE_SIR_DB: f64 = 10.0;
/// Interference split of the figures other than the distribution ones.
pub const FIGURE_WEIGHTS: [f64; 2] = [0.6, 0.4];

fn quadrature() -> QuadratureSettings {
    QuadratureSettings::default()
}

fn method_label(m: OutageMethod) -> &'static str {
    match m {
        OutageMethod::ClosedForm => "closed_form",
        OutageMethod::Integral => "integral",
    }
}

fn ratio_name(v: Variant) -> &'static str {
    match v {
        Variant::TimeSwitching => "alpha",
        Variant::PowerSplitting => "theta",
    }
}

/// First-hop SNR grid (dB) of the SNR figures: 0 to 30 in steps of 2.5.
pub fn snr_grid_db() -> Vec<f64> {
    (0..=12).map(|i| 2.5 * i as f64).collect()
}

/// The default ratio grid extended towards both endpoints, so the curves
/// show their limits.
pub fn figure_ratio_grid() -> Vec<f64> {
    let mut grid = vec![1e-4, 1e-3];
    grid.extend(default_ratio_grid());
    grid.extend([0.999, 0.9999]);
    grid
}

fn point(run: &RunConfig) -> String {
    format!(
        "{} ratio={} snr_db={} sir_db={} gamma_th_db={}",
        run.variant.label(),
        run.ratio,
        run.snr_db,
        run.sir_db,
        run.gamma_th_db
    )
}

pub fn outage(run: &RunConfig) -> Result<Report> {
    let p = effective_params(&run.channel(), &run.protocol()).with_context(|| point(run))?;
    let (value, err, method) = outage_probability_auto(&p, run.gamma_th).with_context(|| point(run))?;
    let mut header = vec!["protocol", "ratio", "snr_db", "sir_db", "gamma_th_db", "p_out", "est_error", "method"];
    let mut row = vec![
        run.variant.label().to_string(),
        num(run.ratio),
        num(run.snr_db),
        num(run.sir_db),
        num(run.gamma_th_db),
        num(value),
        num(err),
        method_label(method).to_string(),
    ];
    if run.validate {
        let mc = mc_link(&run.channel(), &run.protocol(), run.gamma_th, run.trials, run.seed)?;
        header.extend(["mc_p_out", "mc_std_error"]);
        row.extend([num(mc.outage.mean), num(mc.outage.std_error)]);
    }
    let mut table = Table::new(header);
    table.push(row);
    Ok(Report {
        table,
        summary: format!("outage probability {value:.6} ({}) at {}", method_label(method), point(run)),
    })
}

pub fn ergodic(run: &RunConfig) -> Result<Report> {
    let proto = run.protocol();
    let p = effective_params(&run.channel(), &proto).with_context(|| point(run))?;
    let c = ergodic_capacity(&p, &quadrature()).with_context(|| point(run))?;
    let t = throughput(&proto, &c);
    let mut header = vec!["protocol", "ratio", "snr_db", "sir_db", "c_erg", "t_erg", "est_error"];
    let mut row = vec![
        run.variant.label().to_string(),
        num(run.ratio),
        num(run.snr_db),
        num(run.sir_db),
        num(c.value),
        num(t),
        num(c.est_error),
    ];
    if run.validate {
        let mc = mc_link(&run.channel(), &proto, run.gamma_th, run.trials, run.seed)?;
        header.extend(["mc_c_erg", "mc_std_error"]);
        row.extend([num(mc.ergodic.mean), num(mc.ergodic.std_error)]);
    }
    let mut table = Table::new(header);
    table.push(row);
    Ok(Report {
        table,
        summary: format!("ergodic capacity {:.6} bits/s/Hz, throughput {t:.6} at {}", c.value, point(run)),
    })
}

fn mc_columns(label: &str) -> [String; 2] {
    [format!("mc_{label}"), format!("mc_{label}_se")]
}

pub fn sweep(run: &RunConfig) -> Result<Report> {
    let cfg = run.channel();
    let grid = default_ratio_grid();
    let s = sweep_ratio(&cfg, run.variant, &grid, run.metric, run.gamma_th, &quadrature()).with_context(|| point(run))?;
    let label = run.metric.label();
    let mut header = vec!["ratio".to_string(), label.to_string()];
    if run.validate {
        header.extend(mc_columns(label));
    }
    let mut table = Table::new(header);
    for (r, v) in s.ratios.iter().zip(&s.values) {
        let mut row = vec![num(*r), num(*v)];
        if run.validate {
            let proto = Protocol::new(run.variant, *r)?;
            let (erg, out) = simulate_throughputs(&cfg, &proto, run.gamma_th, run.trials, run.seed)?;
            let m = if run.metric == Metric::ErgodicThroughput { erg } else { out };
            row.extend([num(m.mean), num(m.std_error)]);
        }
        table.push(row);
    }
    Ok(Report {
        table,
        summary: format!(
            "{} {label} peaks at {}={} ({:.6}) on {} grid points (seed {})",
            run.variant.label(),
            ratio_name(run.variant),
            s.argmax_ratio,
            s.max_value,
            grid.len(),
            run.seed
        ),
    })
}

pub fn optimize(run: &RunConfig) -> Result<Report> {
    let o = optimize_ratio(&run.channel(), run.variant, run.metric, run.gamma_th, run.tolerance, &quadrature())
        .with_context(|| point(run))?;
    let mut table = Table::new(["protocol", "metric", "snr_db", "sir_db", "opt_ratio", "opt_value", "multimodal"]);
    table.push(vec![
        run.variant.label().to_string(),
        run.metric.label().to_string(),
        num(run.snr_db),
        num(run.sir_db),
        num(o.ratio),
        num(o.value),
        o.multimodal.to_string(),
    ]);
    Ok(Report {
        table,
        summary: format!(
            "optimal {} {} = {:.6} at {} = {:.5}{}",
            run.variant.label(),
            run.metric.label(),
            o.value,
            ratio_name(run.variant),
            o.ratio,
            if o.multimodal { " (coarse scan was multimodal)" } else { "" }
        ),
    })
}

struct ProtocolOptima {
    ts: (f64, f64),
    ps: (f64, f64),
}

fn optima_at(run: &RunConfig, snr_db: f64, sir_db: f64, metric: Metric) -> Result<ProtocolOptima> {
    let cfg = preset_channel(snr_db, sir_db, run.eta, &run.mu);
    let q = quadrature();
    let at = |v: Variant| {
        optimize_ratio(&cfg, v, metric, run.gamma_th, run.tolerance, &q)
            .map(|o| (o.ratio, o.value))
            .with_context(|| format!("{} at snr_db={snr_db} sir_db={sir_db}", v.label()))
    };
    Ok(ProtocolOptima {
        ts: at(Variant::TimeSwitching)?,
        ps: at(Variant::PowerSplitting)?,
    })
}

pub fn compare_protocols(run: &RunConfig, snr_grid: &[f64]) -> Result<Report> {
    let optima: Vec<ProtocolOptima> = snr_grid
        .par_iter()
        .map(|&snr| optima_at(run, snr, run.sir_db, run.metric))
        .collect::<Result<_>>()?;
    let mut table = Table::new(["snr_db", "opt_T_ts", "opt_T_ps", "opt_alpha", "opt_theta"]);
    let mut crossover = None;
    let mut prev_ts_ahead = None;
    for (snr, o) in snr_grid.iter().zip(&optima) {
        table.push(vec![num(*snr), num(o.ts.1), num(o.ps.1), num(o.ts.0), num(o.ps.0)]);
        let ts_ahead = o.ts.1 > o.ps.1;
        if prev_ts_ahead == Some(true) && !ts_ahead && crossover.is_none() {
            crossover = Some(*snr);
        }
        prev_ts_ahead = Some(ts_ahead);
    }
    let summary = match crossover {
        Some(s) => format!("{}: ps overtakes ts by snr_db={s}", run.metric.label()),
        None => format!("{}: no ts-to-ps crossover on the grid", run.metric.label()),
    };
    Ok(Report { table, summary })
}

fn profile_label(p: &[f64]) -> String {
    p.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

pub fn schur(run: &RunConfig, profiles: &[Vec<f64>]) -> Result<Report> {
    let normalized: Vec<Vec<f64>> = if profiles.is_empty() {
        PROFILES.iter().map(|p| p.to_vec()).collect()
    } else {
        profiles.to_vec()
    };
    let width = normalized.iter().map(Vec::len).max().unwrap_or(0);
    let mut weights = Vec::new();
    for p in &normalized {
        normalize_weights(p)?;
        let total: f64 = p.iter().sum();
        let mut w: Vec<f64> = p.iter().map(|v| v / total).collect();
        w.resize(width, 0.0);
        weights.push(w);
    }
    let template = preset_channel(run.snr_db, run.sir_db, run.eta, &[]);
    let interference = run.snr / run.sir;
    let powers: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| w.iter().map(|v| v * interference).collect())
        .collect();
    let report = schur_order_check(&template, &powers, &run.protocol(), run.metric, run.gamma_th, &quadrature())
        .with_context(|| point(run))?;
    let mut table = Table::new([
        "first", "second", "relation", "value_first", "value_second", "tolerance", "holds",
    ]);
    let mut ordered = 0;
    let mut held = 0;
    for pair in &report.pairs {
        let (relation, holds) = match pair.outcome {
            PairOutcome::Ordered { larger, holds, .. } => {
                ordered += 1;
                held += usize::from(holds);
                (if larger == pair.first { "majorizes" } else { "majorized_by" }, holds.to_string())
            }
            PairOutcome::Incomparable => ("incomparable", String::new()),
        };
        table.push(vec![
            profile_label(&weights[pair.first]),
            profile_label(&weights[pair.second]),
            relation.to_string(),
            num(report.values[pair.first]),
            num(report.values[pair.second]),
            num(pair.tolerance),
            holds,
        ]);
    }
    Ok(Report {
        table,
        summary: format!(
            "{} {}: ordering holds for {held} of {ordered} comparable pairs at {}",
            run.variant.label(),
            run.metric.label(),
            point(run)
        ),
    })
}

pub fn mc_validate(run: &RunConfig) -> Result<Report> {
    let cfg = run.channel();
    let proto = run.protocol();
    let p = effective_params(&cfg, &proto).with_context(|| point(run))?;
    let (outage, _, _) = outage_probability_auto(&p, run.gamma_th).with_context(|| point(run))?;
    let capacity = ergodic_capacity(&p, &quadrature()).with_context(|| point(run))?;
    let mc = mc_link(&cfg, &proto, run.gamma_th, run.trials, run.seed)?;
    let mut table = Table::new([
        "quantity", "analytic", "mc_mean", "mc_std_error", "abs_diff", "tolerance", "agrees",
    ]);
    let mut agreed = 0;
    let rows = [
        ("outage_probability", outage, mc.outage, 3.0 * mc.outage.std_error),
        ("ergodic_capacity", capacity.value, mc.ergodic, (3.0 * mc.ergodic.std_error).max(0.01)),
    ];
    for (name, analytic, est, tol) in rows {
        let diff = (analytic - est.mean).abs();
        agreed += usize::from(diff <= tol);
        table.push(vec![
            name.to_string(),
            num(analytic),
            num(est.mean),
            num(est.std_error),
            num(diff),
            num(tol),
            (diff <= tol).to_string(),
        ]);
    }
    Ok(Report {
        table,
        summary: format!(
            "{agreed} of 2 quantities agree with simulation ({} trials, seed {}) at {}",
            run.trials,
            run.seed,
            point(run)
        ),
    })
}

pub fn figure(run: &RunConfig, number: u8) -> Result<Report> {
    match number {
        2 => ratio_figure(run, Variant::TimeSwitching),
        3 => ratio_figure(run, Variant::PowerSplitting),
        4 => optimum_figure(run, Metric::ErgodicThroughput),
        5 => optimum_figure(run, Metric::OutageThroughput),
        6 => profile_figure(run, Variant::TimeSwitching, 0.2),
        7 => profile_figure(run, Variant::PowerSplitting, 0.6),
        n => bail!("no figure {n}; choose 2 to 7"),
    }
}

fn ratio_figure(run: &RunConfig, variant: Variant) -> Result<Report> {
    let grid = figure_ratio_grid();
    let q = quadrature();
    let ratio = ratio_name(variant);
    let mut header = vec!["sir_db".to_string(), ratio.to_string(), "T_erg".into(), "T_out".into()];
    if run.validate {
        header.extend(mc_columns("T_erg"));
        header.extend(mc_columns("T_out"));
    }
    let mut table = Table::new(header);
    let mut peaks = Vec::new();
    for sir in FIGURE_SIRS_DB {
        let cfg = preset_channel(FIGURE_SNR_DB, sir, run.eta, &FIGURE_WEIGHTS);
        let ctx = || format!("{} at sir_db={sir}", variant.label());
        let erg = sweep_ratio(&cfg, variant, &grid, Metric::ErgodicThroughput, run.gamma_th, &q).with_context(ctx)?;
        let out = sweep_ratio(&cfg, variant, &grid, Metric::OutageThroughput, run.gamma_th, &q).with_context(ctx)?;
        peaks.push(format!("sir {sir} dB: {ratio}*={}", erg.argmax_ratio));
        let sims: Vec<Option<_>> = if run.validate {
            grid.par_iter()
                .map(|&r| {
                    let proto = Protocol::new(variant, r)?;
                    simulate_throughputs(&cfg, &proto, run.gamma_th, run.trials, run.seed).map(Some)
                })
                .collect::<crate::Result<_>>()?
        } else {
            vec![None; grid.len()]
        };
        for (i, &r) in grid.iter().enumerate() {
            let mut row = vec![num(sir), num(r), num(erg.values[i]), num(out.values[i])];
            if let Some((e, o)) = sims[i] {
                row.extend([num(e.mean), num(e.std_error), num(o.mean), num(o.std_error)]);
            }
            table.push(row);
        }
    }
    Ok(Report {
        table,
        summary: format!("{} T_erg peaks: {}", variant.label(), peaks.join(", ")),
    })
}

fn optimum_figure(run: &RunConfig, metric: Metric) -> Result<Report> {
    let label = metric.label();
    let mut header = vec![
        "sir_db".to_string(),
        "snr_db".into(),
        "opt_T_ts".into(),
        "opt_T_ps".into(),
        "opt_alpha".into(),
        "opt_theta".into(),
    ];
    if run.validate {
        header.extend(mc_columns("opt_T_ts"));
        header.extend(mc_columns("opt_T_ps"));
    }
    let points: Vec<(f64, f64)> = FIGURE_SIRS_DB
        .iter()
        .flat_map(|&sir| snr_grid_db().into_iter().map(move |snr| (sir, snr)))
        .collect();
    let preset = RunConfig {
        mu: FIGURE_WEIGHTS.to_vec(),
        ..run.clone()
    };
    let optima: Vec<ProtocolOptima> = points
        .par_iter()
        .map(|&(sir, snr)| optima_at(&preset, snr, sir, metric))
        .collect::<Result<_>>()?;
    let mut table = Table::new(header);
    let mut ps_wins = 0;
    for (&(sir, snr), o) in points.iter().zip(&optima) {
        let mut row = vec![num(sir), num(snr), num(o.ts.1), num(o.ps.1), num(o.ts.0), num(o.ps.0)];
        ps_wins += usize::from(o.ps.1 > o.ts.1);
        if run.validate {
            let cfg = preset_channel(snr, sir, run.eta, &FIGURE_WEIGHTS);
            for (variant, (r, _)) in [(Variant::TimeSwitching, o.ts), (Variant::PowerSplitting, o.ps)] {
                let proto = Protocol::new(variant, r)?;
                let (e, out) = simulate_throughputs(&cfg, &proto, run.gamma_th, run.trials, run.seed)?;
                let m = if metric == Metric::ErgodicThroughput { e } else { out };
                row.extend([num(m.mean), num(m.std_error)]);
            }
        }
        table.push(row);
    }
    Ok(Report {
        table,
        summary: format!("optimal {label}: ps ahead at {ps_wins} of {} points", points.len()),
    })
}

fn profile_figure(run: &RunConfig, variant: Variant, ratio: f64) -> Result<Report> {
    let proto = Protocol::new(variant, ratio)?;
    let q = quadrature();
    let mut header = vec!["profile".to_string(), "mu_hat".into(), "snr_db".into(), "T_erg".into(), "T_out".into()];
    if run.validate {
        header.extend(mc_columns("T_erg"));
        header.extend(mc_columns("T_out"));
    }
    let points: Vec<(usize, f64)> = (0..PROFILES.len())
        .flat_map(|k| snr_grid_db().into_iter().map(move |snr| (k, snr)))
        .collect();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&(k, snr)| -> Result<Vec<String>> {
            let weights: Vec<f64> = PROFILES[k].iter().copied().filter(|&w| w > 0.0).collect();
            let cfg = preset_channel(snr, PROFILE_FIGURE_SIR_DB, run.eta, &weights);
            let ctx = || format!("profile {} at snr_db={snr}", k + 1);
            let (erg, _) = evaluate_metric(&cfg, &proto, Metric::ErgodicThroughput, run.gamma_th, &q).with_context(ctx)?;
            let (out, _) = evaluate_metric(&cfg, &proto, Metric::OutageThroughput, run.gamma_th, &q).with_context(ctx)?;
            let mut row = vec![
                (k + 1).to_string(),
                profile_label(&PROFILES[k]),
                num(snr),
                num(erg),
                num(out),
            ];
            if run.validate {
                let (e, o) = simulate_throughputs(&cfg, &proto, run.gamma_th, run.trials, run.seed)?;
                row.extend([num(e.mean), num(e.std_error), num(o.mean), num(o.std_error)]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(header);
    for row in rows {
        table.push(row);
    }
    let ordered = PROFILES
        .windows(2)
        .all(|w| majorizes(&w[0], &w[1]).unwrap_or(false));
    Ok(Report {
        table,
        summary: format!(
            "{} {}={ratio}: {} profiles over {} SNR points (profiles ordered by majorization: {ordered})",
            variant.label(),
            ratio_name(variant),
            PROFILES.len(),
            snr_grid_db().len()
        ),
    })
}
