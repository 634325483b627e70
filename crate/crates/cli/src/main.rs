use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::Parser;

use lclab::config::{ExperimentConfig, ExperimentKind};

/// Monte Carlo laboratory for covariance matrices with log-concave columns.
#[derive(Parser, Debug)]
#[command(name = "lclab", version, about)]
struct Cli {
    /// Experiment to run: mp-check | rigidity | local-law | edge-tw | spike |
    /// concentration | interp | green-compare
    experiment: String,

    /// Path to the JSON config document.
    #[arg(long)]
    config: PathBuf,

    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: LCLAB_THREADS or the available cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match run() {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let kind = ExperimentKind::parse(&cli.experiment)
        .ok_or_else(|| anyhow!("unknown experiment {:?}", cli.experiment))?;

    let threads = cli
        .threads
        .or_else(|| std::env::var("LCLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .stack_size(8 * 1024 * 1024)
            .build_global()
            .context("thread pool")?;
    }

    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| anyhow!(e))?;
    if cfg.experiment != kind {
        return Err(anyhow!(
            "config names experiment {:?} but the command line asked for {:?}",
            cfg.experiment.as_str(),
            kind.as_str()
        ));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = Some(out);
    }

    let result = lclab::run(&cfg)?;
    println!(
        "experiment {} finished in {:.2}s ({} trials)",
        cfg.experiment.as_str(),
        result.wall_clock_secs,
        cfg.trials
    );
    for line in lclab::verdict_lines(&result) {
        println!("  {line}");
    }
    if let Some(dir) = &cfg.output_dir {
        println!("results written to {}", dir.display());
    }
    Ok(result.all_pass())
}
