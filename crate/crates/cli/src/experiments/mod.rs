//! Experiment implementations. Each experiment consumes a validated config,
//! runs its Monte Carlo campaign with per-trial RNG substreams, and returns
//! per-trial rows, aggregates, verdicts and plot payloads.

mod concentration;
mod edge_tw;
mod green_compare;
mod interp;
mod local_law;
mod mp_check;
mod rigidity;
mod spike;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use lclab_core::mp_model::MpModel;
use lclab_core::sampling::{CalibrationCache, Sampler, SamplerSpec};
use lclab_core::seeding;

use crate::config::{EnsembleConfig, ExperimentConfig, ExperimentKind};
use crate::report::ExperimentBody;

/// Dispatches the experiment named in the config.
pub fn run_experiment(cfg: &ExperimentConfig, cache: &CalibrationCache) -> Result<ExperimentBody> {
    let ctx = RunContext::new(cfg, cache)?;
    match cfg.experiment {
        ExperimentKind::MpCheck => mp_check::run(&ctx),
        ExperimentKind::Rigidity => rigidity::run(&ctx),
        ExperimentKind::LocalLaw => local_law::run(&ctx),
        ExperimentKind::EdgeTw => edge_tw::run(&ctx),
        ExperimentKind::Spike => spike::run(&ctx),
        ExperimentKind::Concentration => concentration::run(&ctx),
        ExperimentKind::Interp => interp::run(&ctx),
        ExperimentKind::GreenCompare => green_compare::run(&ctx),
    }
}

/// Everything an experiment needs at run time.
pub struct RunContext<'a> {
    pub cfg: &'a ExperimentConfig,
    pub cache: &'a CalibrationCache,
    pub m: usize,
    pub model: MpModel,
}

impl<'a> RunContext<'a> {
    fn new(cfg: &'a ExperimentConfig, cache: &'a CalibrationCache) -> Result<Self> {
        let m = cfg
            .resolved_m()
            .ok_or_else(|| anyhow!("row dimension unresolved (give m or y)"))?;
        let model = MpModel::from_dims(m, cfg.n).context("reference law")?;
        Ok(RunContext { cfg, cache, m, model })
    }

    /// Sampler for the configured ensemble at dimension `m`.
    pub fn sampler(&self, dimension: usize) -> Result<Sampler> {
        prepare(&self.cfg.ensemble, dimension, self.cache)
    }

    /// Sampler for the comparison baseline (Gaussian unless overridden).
    pub fn baseline_sampler(&self, dimension: usize) -> Result<Sampler> {
        match &self.cfg.baseline {
            Some(e) => prepare(e, dimension, self.cache),
            None => prepare(&EnsembleConfig::Gaussian, dimension, self.cache),
        }
    }

    /// Seed for trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        seeding::trial_seed(self.cfg.seed, t as u64)
    }

    /// KS tolerance: explicit override, else `gaussian_default` for the
    /// Gaussian ensemble and `other_default` otherwise.
    pub fn ks_tolerance(&self, gaussian_default: f64, other_default: f64) -> f64 {
        self.cfg.thresholds.ks_tolerance.unwrap_or(if self.cfg.ensemble.is_gaussian() {
            gaussian_default
        } else {
            other_default
        })
    }
}

fn prepare(ensemble: &EnsembleConfig, dimension: usize, cache: &CalibrationCache) -> Result<Sampler> {
    let spec: SamplerSpec = ensemble.sampler_spec(dimension);
    Sampler::prepare(spec, cache).map_err(|e| anyhow!("sampler setup: {e}"))
}

/// Runs `trials` independent closures in parallel, preserving trial order.
pub fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(&f)
        .collect::<Result<Vec<T>>>()
}

/// CDF of the reference spectral law for the `M × M` matrix (point mass at
/// the origin plus the continuous bulk).
pub fn mp_cdf_law1(model: &MpModel) -> impl Fn(f64) -> f64 + '_ {
    let point = model.point_mass(lclab_core::mp_model::Law::One);
    let cont = (1.0f64 / model.y()).min(1.0);
    move |x: f64| {
        if x < 0.0 {
            0.0
        } else if x < model.lambda_minus() {
            point
        } else if x >= model.lambda_plus() {
            1.0
        } else {
            point + cont - model.tail_mass2(x) / model.y()
        }
    }
}

/// Mean and standard error of a sample.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Median of a sample (by copy).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
