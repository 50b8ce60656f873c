//! `stressuq`: baseline runs, forest training, uncertainty envelopes and
//! reference-stress propagation for fully developed channel flow.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stressuq::{ErrorKind, Result};

use crate::commands::Context;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "stressuq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options every command accepts. Flags override the config file.
#[derive(Args, Clone)]
struct Common {
    /// TOML config with [solver], [uq], [data] and [forest] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Friction Reynolds number of the solver run.
    #[arg(long)]
    re_tau: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Converged SST solution.
    Baseline {
        #[command(flatten)]
        common: Common,
    },
    /// Fit a discrepancy forest on the training Reynolds numbers.
    Train {
        #[command(flatten)]
        common: Common,
        /// p, pcorr or pcorr_angles.
        #[arg(long)]
        target: Option<String>,
    },
    /// Perturbed runs and their velocity envelope.
    Uq {
        #[command(flatten)]
        common: Common,
        /// data-free, p, pcorr or pcorr_angles.
        #[arg(long)]
        mode: Option<String>,
        /// Relative distance to the corners in data-free mode.
        #[arg(long)]
        delta_b: Option<f64>,
        /// Forest file for the data-driven modes.
        #[arg(long)]
        forest: Option<PathBuf>,
        /// Re-evaluate features on every iterate instead of on the baseline.
        #[arg(long)]
        in_loop: bool,
    },
    /// Propagate reference stresses through the mean-flow equation.
    PropagateDns {
        #[command(flatten)]
        common: Common,
        /// Relative amplitude of uniform noise on the shear stress.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Summarise the runs found in a directory and its subdirectories.
    Report {
        dir: PathBuf,
        /// Where summary.csv goes; defaults to DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write analytic stand-in reference tables.
    SynthDns {
        #[command(flatten)]
        common: Common,
        /// Reynolds numbers; defaults to the training and test sets.
        #[arg(long, value_delimiter = ',')]
        re: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
}

fn context(common: &Common) -> Result<Context> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.re_tau {
        cfg.solver.re_tau = r;
    }
    Ok(Context {
        cfg,
        config_path: common.config.clone(),
        out: common.out.clone(),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Baseline { common } => commands::baseline(&context(&common)?),
        Command::Train { common, target } => {
            let mut ctx = context(&common)?;
            if target.is_some() {
                ctx.cfg.forest.target = target;
            }
            ctx.cfg.target()?;
            commands::train_forest(&ctx)
        }
        Command::Uq {
            common,
            mode,
            delta_b,
            forest,
            in_loop,
        } => {
            let mut ctx = context(&common)?;
            let uq = &mut ctx.cfg.uq;
            if let Some(m) = mode {
                uq.mode = m;
            }
            if let Some(d) = delta_b {
                uq.delta_b = d;
            }
            if forest.is_some() {
                uq.forest = forest;
            }
            if in_loop {
                uq.freeze_features = false;
            }
            commands::uq(&ctx)
        }
        Command::PropagateDns { common, noise } => {
            let mut ctx = context(&common)?;
            if let Some(n) = noise {
                ctx.cfg.uq.noise = n;
            }
            commands::propagate(&ctx)
        }
        Command::Report { dir, out } => {
            let ctx = Context {
                cfg: RunConfig::default(),
                config_path: None,
                out: out.unwrap_or_else(|| dir.clone()),
            };
            commands::report(&dir, &ctx)
        }
        Command::SynthDns { common, re, points } => {
            let ctx = context(&common)?;
            let res = if re.is_empty() {
                let d = &ctx.cfg.data;
                d.train_re.iter().chain(&d.test_re).copied().collect()
            } else {
                re
            };
            commands::synth_dns(&ctx, &res, points)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", commands::error_chain(&e));
            ExitCode::from(match e.kind() {
                ErrorKind::Configuration => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Data => 4,
            })
        }
    }
}
