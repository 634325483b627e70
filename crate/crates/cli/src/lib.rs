//! Experiment runner: configuration, orchestration, persistence and plots.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};

use lclab_core::sampling::CalibrationCache;

pub use config::{EnsembleConfig, ExperimentConfig, ExperimentKind};
pub use report::{ExperimentResult, Verdict};

/// Name of the calibration cache file inside the output directory.
pub const CALIBRATION_CACHE_FILE: &str = "calibration_cache.txt";

/// Validates and executes one experiment. When the config names an output
/// directory, results (CSV + JSON + SVG plots) are written there and the
/// calibration cache is persisted alongside them.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(anyhow!("invalid config:\n  - {}", violations.join("\n  - ")));
    }
    let cache = match &cfg.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating output dir {}", dir.display()))?;
            CalibrationCache::with_file(dir.join(CALIBRATION_CACHE_FILE))
                .map_err(|e| anyhow!("calibration cache: {e}"))?
        }
        None => CalibrationCache::in_memory(),
    };
    let start = Instant::now();
    let body = experiments::run_experiment(cfg, &cache)?;
    let result = ExperimentResult {
        config: cfg.clone(),
        body,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    if let Some(dir) = &cfg.output_dir {
        persist(&result, dir)?;
    }
    Ok(result)
}

fn persist(result: &ExperimentResult, dir: &Path) -> Result<()> {
    result
        .write(dir)
        .with_context(|| format!("writing results under {}", dir.display()))?;
    plot::emit_plots(&result.body.plots, dir);
    Ok(())
}

/// One line per verdict, for terminal output.
pub fn verdict_lines(result: &ExperimentResult) -> Vec<String> {
    result
        .body
        .verdicts
        .iter()
        .map(|v| {
            format!(
                "{} {} (observed {:.6} {} {:.6}) — {}",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.observed,
                v.relation,
                v.threshold,
                v.detail
            )
        })
        .collect()
}
