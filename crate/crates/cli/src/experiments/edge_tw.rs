//! Edge universality: rescaled largest eigenvalues against the GOE
//! Tracy–Widom reference table.

use anyhow::{anyhow, Result};

use lclab_core::ensemble::{h_spectrum, SampleMeta};
use lclab_core::sampling::assemble_x;
use lclab_core::stats::{edge_rescale, ks_distance};
use lclab_core::tw_dist::Tw1Table;

use super::{mean_se, par_trials, RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let sampler = ctx.sampler(ctx.m)?;
    let per_trial = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let draw = assemble_x(&sampler, cfg.n, seed)?;
        let sample = h_spectrum(&draw.x, SampleMeta::new(ctx.m, cfg.n, seed))?;
        Ok(sample.largest())
    })?;

    let table = Tw1Table::bundled();
    let mut body = ExperimentBody::new(vec!["trial", "lambda1", "rescaled"]);
    let mut rescaled = Vec::with_capacity(cfg.trials);
    for (t, lam1) in per_trial.into_iter().enumerate() {
        let s = edge_rescale(lam1, ctx.m, cfg.n);
        body.rows.push(vec![t as f64, lam1, s]);
        rescaled.push(s);
    }
    let ks = ks_distance(&rescaled, |s| table.cdf(s)).map_err(|e| anyhow!("{e}"))?;
    let tolerance = ctx.ks_tolerance(0.05, 0.07);
    let (mean, se) = mean_se(&rescaled);
    body.aggregate("ks", ks);
    body.aggregate("ks_tolerance", tolerance);
    body.aggregate("mean_rescaled", mean);
    body.aggregate("se_rescaled", se);
    body.aggregate("reference_mean", table.mean());
    body.aggregate("ensemble", cfg.ensemble.label());
    body.verdicts.push(Verdict::le(
        "edge_ks_within_tolerance",
        ks,
        tolerance,
        format!(
            "KS of {} rescaled extreme eigenvalues against the reference table",
            cfg.trials
        ),
    ));

    let overlay: Vec<(f64, f64)> = (0..=320)
        .map(|i| {
            let s = -6.0 + 10.0 * i as f64 / 320.0;
            (s, table.density(s))
        })
        .collect();
    body.plots.push(PlotSpec::Histogram {
        name: "edge_rescaled_vs_reference".into(),
        title: "rescaled largest eigenvalue vs reference density".into(),
        values: rescaled,
        bins: 48,
        overlay,
    });
    Ok(body)
}
