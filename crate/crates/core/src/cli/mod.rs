//! Command-line front end for the `splitmspe` binary.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::elastic_net::{DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::splitreg::SplitRegConfig;
use commands::SplitRegFitArgs;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "splitmspe", version, about = "Split regression and minimum-MSPE curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count the splits of p variables into G nonempty groups.
    Count {
        p: usize,
        groups: usize,
        /// Also count splits that leave some variables out.
        #[arg(long)]
        leftout: bool,
    },
    /// Draw one design whose empirical covariance equals the target.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimum-MSPE curves over a grid of beta2 values.
    Curves {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core. Results do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit SplitReg to a CSV whose last column is the response.
    SplitregFit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        lambda_s: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda_d: f64,
        #[arg(long, default_value_t = 3)]
        groups: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: usize,
        /// Aggregate with leave-one-out stacking weights instead of the mean.
        #[arg(long)]
        stacking: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn warn_ordering(cfg: &RunConfig) {
    if cfg.r < cfg.rho {
        eprintln!(
            "warning: r = {} is below rho = {}; the gains from splitting are expected when r > rho",
            cfg.r, cfg.rho
        );
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Count { p, groups, leftout } => commands::write_output(None, &commands::count(p, groups, leftout)?),
        Command::Gen { config, seed, output } => {
            let cfg = load(&config, seed)?;
            warn_ordering(&cfg);
            let text = commands::gen(&cfg)?;
            commands::write_output(output.as_deref().or(cfg.output.as_deref()), &text)
        }
        Command::Curves {
            config,
            seed,
            jobs,
            output,
        } => {
            let mut cfg = load(&config, seed)?;
            if let Some(jobs) = jobs {
                cfg.jobs = jobs;
            }
            warn_ordering(&cfg);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.jobs)
                .build()
                .map_err(|e| Error::param(format!("cannot start {} worker threads: {e}", cfg.jobs)))?;
            let records = pool.install(|| commands::curves(&cfg))?;
            let text = commands::format_curves(&cfg, &records);
            commands::write_output(output.as_deref().or(cfg.output.as_deref()), &text)
        }
        Command::SplitregFit {
            data,
            lambda_s,
            alpha,
            lambda_d,
            groups,
            tolerance,
            max_sweeps,
            stacking,
            output,
        } => {
            let config = SplitRegConfig {
                max_sweeps,
                tolerance,
                ..SplitRegConfig::new(groups, lambda_s, alpha, lambda_d)
            };
            config.validate()?;
            let text = commands::splitreg_fit(&SplitRegFitArgs { data, config, stacking })?;
            commands::write_output(output.as_deref(), &text)
        }
    }
}
