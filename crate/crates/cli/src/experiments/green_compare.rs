//! Smoothed edge statistic comparison between the configured ensemble and a
//! reference ensemble (Gaussian by default).

use anyhow::{anyhow, Result};

use lclab_core::ensemble::{h_spectrum, SampleMeta, SpectralSample};
use lclab_core::green::green_comparison_statistic;
use lclab_core::sampling::assemble_x;

use super::{par_trials, RunContext};
use crate::report::{ExperimentBody, Verdict};

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let n_f = cfg.n as f64;
    let epsilon = cfg.grid.epsilon;
    let eta0 = n_f.powf(-2.0 / 3.0 - epsilon);
    let e = ctx.model.lambda_plus();
    let sampler_a = ctx.sampler(ctx.m)?;
    let sampler_b = ctx.baseline_sampler(ctx.m)?;

    let samples: Vec<(SpectralSample, SpectralSample)> = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let xa = assemble_x(&sampler_a, cfg.n, seed)?.x;
        let sa = h_spectrum(&xa, SampleMeta::new(ctx.m, cfg.n, seed))?;
        let seed_b = lclab_core::seeding::derive(seed, 0xb);
        let xb = assemble_x(&sampler_b, cfg.n, seed_b)?.x;
        let sb = h_spectrum(&xb, SampleMeta::new(ctx.m, cfg.n, seed_b))?;
        Ok((sa, sb))
    })?;
    let (a_samples, b_samples): (Vec<_>, Vec<_>) = samples.into_iter().unzip();

    let report = green_comparison_statistic(&a_samples, &b_samples, e, eta0, |x| x)
        .map_err(|e| anyhow!("{e}"))?;
    let mut body = ExperimentBody::new(vec!["trial", "stat_a", "stat_b"]);
    {
        use lclab_core::green::m2n_of_h_sample;
        use lclab_core::Cplx;
        let z = Cplx::new(e, eta0);
        for (t, (sa, sb)) in a_samples.iter().zip(&b_samples).enumerate() {
            let ta = n_f * eta0 * m2n_of_h_sample(sa, z).map_err(|er| anyhow!("{er}"))?.im;
            let tb = n_f * eta0 * m2n_of_h_sample(sb, z).map_err(|er| anyhow!("{er}"))?.im;
            body.rows.push(vec![t as f64, ta, tb]);
        }
    }
    let budget = cfg.thresholds.mean_sigma * report.combined_se() + n_f.powf(-1.0 / 6.0 + 0.1);
    body.aggregate("mean_a", report.mean_a);
    body.aggregate("se_a", report.se_a);
    body.aggregate("mean_b", report.mean_b);
    body.aggregate("se_b", report.se_b);
    body.aggregate("diff", report.diff());
    body.aggregate("budget", budget);
    body.aggregate("eta0", eta0);
    body.aggregate("ensemble_a", ctx.cfg.ensemble.label());
    body.verdicts.push(Verdict::le(
        "edge_statistic_diff_within_budget",
        report.diff().abs(),
        budget,
        format!(
            "|E F - E F| between ensembles at the edge; se {:.5}",
            report.combined_se()
        ),
    ));
    Ok(body)
}
