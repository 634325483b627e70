//! Global-law check: KS distance of each empirical spectral distribution to
//! the reference bulk law.

use anyhow::{anyhow, Result};

use lclab_core::ensemble::{h_spectrum, SampleMeta};
use lclab_core::mp_model::Law;
use lclab_core::sampling::assemble_x;
use lclab_core::stats::ks_distance;

use super::{mean_se, mp_cdf_law1, par_trials, RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let sampler = ctx.sampler(ctx.m)?;
    let cdf = mp_cdf_law1(&ctx.model);
    let per_trial = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let draw = assemble_x(&sampler, cfg.n, seed).map_err(|e| anyhow!("trial {t} (seed {seed}): {e}"))?;
        let sample = h_spectrum(&draw.x, SampleMeta::new(ctx.m, cfg.n, seed))
            .map_err(|e| anyhow!("trial {t} (seed {seed}): {e}"))?;
        let ks = ks_distance(&sample.eigenvalues, &cdf)
            .map_err(|e| anyhow!("trial {t}: {e}"))?;
        let lam1 = sample.largest();
        let lam_min = *sample.eigenvalues.last().unwrap();
        Ok((ks, lam1, lam_min, sample.eigenvalues))
    })?;

    let mut body = ExperimentBody::new(vec!["trial", "ks", "lambda1", "lambda_min"]);
    let mut ks_values = Vec::with_capacity(cfg.trials);
    let mut pooled = Vec::new();
    for (t, (ks, lam1, lam_min, eigs)) in per_trial.into_iter().enumerate() {
        body.rows.push(vec![t as f64, ks, lam1, lam_min]);
        ks_values.push(ks);
        if pooled.len() < 200_000 {
            pooled.extend(eigs);
        }
    }
    let (mean_ks, se_ks) = mean_se(&ks_values);
    let tolerance = ctx.cfg.thresholds.ks_tolerance.unwrap_or(0.02);
    body.aggregate("mean_ks", mean_ks);
    body.aggregate("se_ks", se_ks);
    body.aggregate("ks_tolerance", tolerance);
    body.aggregate("ensemble", ctx.cfg.ensemble.label());
    body.verdicts.push(Verdict::le(
        "mean_ks_within_tolerance",
        mean_ks,
        tolerance,
        format!("mean KS over {} trials against the bulk law", cfg.trials),
    ));

    // density overlay for the pooled positive spectrum
    let overlay: Vec<(f64, f64)> = {
        let lo = ctx.model.lambda_minus();
        let hi = ctx.model.lambda_plus();
        (0..=200)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                (x, ctx.model.density(x, Law::One))
            })
            .collect()
    };
    body.plots.push(PlotSpec::Histogram {
        name: "spectrum_vs_bulk_density".into(),
        title: format!("spectral distribution vs bulk law (y = {:.3})", ctx.model.y()),
        values: pooled.into_iter().filter(|v| *v > 1e-12).collect(),
        bins: 60,
        overlay,
    });
    Ok(body)
}
