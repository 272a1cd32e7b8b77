//! Argument parsing and the flag-over-config merge.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{RunConfig, SEED_ENV};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "loadmix", version, about = "EV arrival simulation, load synthesis and GGMM fitting")]
pub struct Cli {
    /// JSON run configuration; defaults reproduce the reference setup.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config seed and LOADMIX_SEED.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (default: `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thinning simulation of the arrival process with a mean-count check.
    SimulateArrivals {
        #[arg(long, value_name = "R")]
        replications: Option<u32>,
    },
    /// One day of EV charging sessions and their aggregate demand.
    EvProfile {
        #[arg(long, value_name = "R")]
        replications: Option<u32>,
    },
    /// Fits a GGMM to the load for one order or an order range.
    Fit(FitArgs),
    /// Fits every order in the range and picks one by the MSE plateau.
    SelectOrder(FitArgs),
    /// Draws synthetic load values from a fitted model.
    Sample {
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Load CSV with `timestamp,kw` columns.
    #[arg(long, value_name = "PATH")]
    pub load: Option<PathBuf>,
    /// Add simulated EV demand, one day per day of load.
    #[arg(long)]
    pub with_ev: bool,
    #[arg(long, value_name = "N", conflicts_with = "m_range")]
    pub m: Option<usize>,
    #[arg(long, value_name = "A..B", value_parser = parse_range)]
    pub m_range: Option<[usize; 2]>,
    #[arg(long, value_name = "X")]
    pub epsilon: Option<f64>,
    /// Histogram bins for MSE and plots (default: Freedman–Diaconis).
    #[arg(long, value_name = "B")]
    pub bins: Option<usize>,
    /// Add wall-clock seconds to iterations.csv (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

fn parse_range(text: &str) -> Result<[usize; 2], String> {
    let (a, b) = text.split_once("..").ok_or_else(|| format!("expected A..B, got `{text}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("`{a}` is not an order"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("`{b}` is not an order"))?;
    if a == 0 || b < a {
        return Err(format!("range {a}..{b} must satisfy 1 <= A <= B"));
    }
    Ok([a, b])
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        config.io.out_dir = out;
    }
    let env = std::env::var(SEED_ENV).ok();
    let seed = config.resolve_seed(cli.seed, env.as_deref())?;
    match cli.command {
        Command::SimulateArrivals { replications } => {
            if let Some(r) = replications {
                config.arrivals.replications = r;
            }
            commands::simulate_arrivals(&config, seed)
        }
        Command::EvProfile { replications } => {
            if let Some(r) = replications {
                config.ev.replications = r;
            }
            commands::ev_profile(&config, seed)
        }
        Command::Fit(args) => {
            apply_fit_args(&mut config, &args);
            commands::fit(&config, seed, false, args.timing)
        }
        Command::SelectOrder(args) => {
            apply_fit_args(&mut config, &args);
            if args.m.is_some() {
                return Err(CliError::Config("select-order compares a range; use --m-range".into()));
            }
            config.em.m = None;
            commands::fit(&config, seed, true, args.timing)
        }
        Command::Sample { model, n } => {
            if model.is_some() {
                config.io.model = model;
            }
            if let Some(n) = n {
                config.sample.n = n;
            }
            commands::sample(&config, seed)
        }
    }
}

fn apply_fit_args(config: &mut RunConfig, args: &FitArgs) {
    if args.load.is_some() {
        config.io.load_csv = args.load.clone();
    }
    config.with_ev |= args.with_ev;
    if let Some(m) = args.m {
        config.em.m = Some(m);
    }
    if let Some(r) = args.m_range {
        config.em.m_range = r;
        config.em.m = None;
    }
    if let Some(e) = args.epsilon {
        config.em.epsilon = e;
    }
    if args.bins.is_some() {
        config.em.histogram_bins = args.bins;
    }
}
