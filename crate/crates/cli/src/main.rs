//! `dsperm run --config <path>` runs one experiment. Flags override fields
//! of the config file; fields set in neither take the experiment default.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dsperm::experiments::{self, ExperimentConfig, OutputFormat, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "dsperm", version, about = "Directed spatial permutation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its result files.
    Run(RunArgs),
    /// List the registered experiments.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    cprime: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    updates: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = &args.experiment {
        cfg.experiment = e.clone();
    }
    if cfg.experiment.is_empty() {
        bail!("no experiment given: pass --config or --experiment");
    }
    cfg.m = args.m.or(cfg.m);
    cfg.cprime = args.cprime.or(cfg.cprime);
    cfg.a = args.a.or(cfg.a);
    cfg.samples = args.samples.or(cfg.samples);
    cfg.updates = args.updates.or(cfg.updates);
    cfg.reps = args.reps.or(cfg.reps);
    cfg.threads = args.threads.or(cfg.threads);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(f) = &args.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::List => {
            for e in EXPERIMENTS {
                println!("{e}");
            }
            Ok(())
        }
        Command::Run(args) => build_config(&args).and_then(|cfg| {
            let record = experiments::run(&cfg)?;
            let result = &record.result;
            if result.rows.as_array().is_some_and(|r| r.len() <= 32) {
                println!("{}", serde_json::to_string_pretty(result)?);
            } else {
                println!("{}", serde_json::to_string_pretty(&result.summary)?);
            }
            if let Some(dir) = &cfg.output_dir {
                eprintln!("wrote {} in {:.2}s", dir.display(), record.wall_time_secs);
            }
            Ok(())
        }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
