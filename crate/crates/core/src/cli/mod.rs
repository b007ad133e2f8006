//! Command-line front end.
//!
//! Every subcommand writes a CSV (header row, one record per point) to
//! `--out` or standard output, and a one-line summary to standard error.
//! Figure presets use unit noise variances and unit mean channel gains,
//! so the source power equals the first-hop SNR and the interferer powers
//! follow from the SIR and the relative weights.

mod commands;
mod config;
mod table;

use std::ffi::OsString;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

pub use commands::{figure_ratio_grid, snr_grid_db, Report, FIGURE_SIRS_DB, PROFILES};
pub use config::{db_to_linear, preset_channel, CommonArgs, RunConfig};
pub use table::Table;

#[derive(Debug, Parser)]
#[command(name = "ehrelay", version, about = "Throughput of an interference-powered decode-and-forward relay")]
pub struct Cli {
    /// Worker threads for grid evaluations and simulations [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outage probability at the destination.
    Outage(CommonArgs),
    /// Ergodic capacity and throughput.
    Ergodic(CommonArgs),
    /// Throughput over the harvesting-ratio grid 0.01..0.99.
    Sweep(CommonArgs),
    /// Best harvesting ratio for one protocol.
    Optimize(CommonArgs),
    /// Optimal throughput of both protocols over first-hop SNR.
    CompareProtocols(CompareArgs),
    /// Check throughput ordering across interference profiles.
    Schur(SchurArgs),
    /// Compare analytic outage and ergodic capacity with simulation.
    McValidate(CommonArgs),
    /// Reproduce a figure of the numerical study.
    ///
    /// 2/3: T_erg and T_out versus α (TS) or θ (PS), SNR 20 dB, SIR 5/10/15 dB.
    /// 4/5: optimal T_erg / T_out of both protocols versus SNR.
    /// 6/7: TS (α = 0.2) / PS (θ = 0.6) throughput versus SNR for three
    /// interference profiles at SIR 10 dB.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First-hop SNR grid in dB [default: 0,2.5,...,30].
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    snr_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SchurArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Interference profile as comma-separated relative powers; repeat for
    /// each profile [default: 1,0,0,0,0 / 0.6,0.4,0,0,0 / 0.2,0.2,0.2,0.2,0.2].
    #[arg(long = "profile")]
    profiles: Vec<String>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure number.
    #[arg(value_parser = clap::value_parser!(u8).range(2..=7))]
    number: u8,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_profile(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad profile entry {v:?} in {s:?}")))
        .collect()
}

fn execute(command: &Command) -> Result<(Report, RunConfig)> {
    let (report, run) = match command {
        Command::Outage(a) => {
            let run = RunConfig::resolve(a)?;
            (commands::outage(&run)?, run)
        }
        Command::Ergodic(a) => {
            let run = RunConfig::resolve(a)?;
            (commands::ergodic(&run)?, run)
        }
        Command::Sweep(a) => {
            let run = RunConfig::resolve(a)?;
            (commands::sweep(&run)?, run)
        }
        Command::Optimize(a) => {
            let run = RunConfig::resolve(a)?;
            (commands::optimize(&run)?, run)
        }
        Command::CompareProtocols(a) => {
            let run = RunConfig::resolve(&a.common)?;
            let grid = a.snr_grid.clone().unwrap_or_else(snr_grid_db);
            (commands::compare_protocols(&run, &grid)?, run)
        }
        Command::Schur(a) => {
            let run = RunConfig::resolve(&a.common)?;
            let profiles = a.profiles.iter().map(|s| parse_profile(s)).collect::<Result<Vec<_>>>()?;
            (commands::schur(&run, &profiles)?, run)
        }
        Command::McValidate(a) => {
            let run = RunConfig::resolve(a)?;
            (commands::mc_validate(&run)?, run)
        }
        Command::Figure(a) => {
            let run = RunConfig::resolve(&a.common)?;
            (commands::figure(&run, a.number)?, run)
        }
    };
    Ok((report, run))
}

fn run_parsed(cli: &Cli) -> Result<()> {
    let (report, run) = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(|| execute(&cli.command))?,
        None => execute(&cli.command)?,
    };
    report
        .table
        .write(run.out.as_deref())
        .with_context(|| match &run.out {
            Some(p) => format!("writing {}", p.display()),
            None => "writing standard output".into(),
        })?;
    eprintln!("{}", report.summary);
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_parsed(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
