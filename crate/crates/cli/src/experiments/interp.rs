//! Interpolation checks: endpoint exactness, isotropy preservation at the
//! midpoint, and the bulk law of the interpolated matrix.

use anyhow::Result;

use lclab_core::ensemble::{h_spectrum, SampleMeta};
use lclab_core::sampling::{assemble_x, interpolate};
use lclab_core::stats::ks_distance;

use super::{mean_se, mp_cdf_law1, par_trials, RunContext};
use crate::report::{ExperimentBody, Verdict};

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let sampler = ctx.sampler(ctx.m)?;
    let gaussian = lclab_core::sampling::Sampler::prepare(
        lclab_core::sampling::SamplerSpec::gaussian(ctx.m),
        ctx.cache,
    )
    .map_err(|e| anyhow::anyhow!("gaussian endpoint: {e}"))?;
    let cdf = mp_cdf_law1(&ctx.model);
    let target = ctx.m as f64 / cfg.n as f64;

    let per_trial = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let x = assemble_x(&sampler, cfg.n, seed)?.x;
        let xw = assemble_x(&gaussian, cfg.n, lclab_core::seeding::derive(seed, 0x3eed))?.x;
        let bit_exact = interpolate(&x, &xw, 0.0)? == x && interpolate(&x, &xw, 1.0)? == xw;
        let mid = interpolate(&x, &xw, 0.5)?;
        let second_moment = mid.iter().map(|v| v * v).sum::<f64>() / cfg.n as f64;
        let sample = h_spectrum(&mid, SampleMeta::new(ctx.m, cfg.n, seed))?;
        let ks = ks_distance(&sample.eigenvalues, &cdf)?;
        Ok((bit_exact, second_moment, ks))
    })?;

    let mut body = ExperimentBody::new(vec!["trial", "bit_exact", "mid_second_moment", "ks_mid"]);
    let mut all_bits = true;
    let mut moments = Vec::with_capacity(cfg.trials);
    let mut ks_values = Vec::with_capacity(cfg.trials);
    for (t, (bit, m2, ks)) in per_trial.into_iter().enumerate() {
        body.rows.push(vec![t as f64, bit as u8 as f64, m2, ks]);
        all_bits &= bit;
        moments.push(m2);
        ks_values.push(ks);
    }
    let (mean_m2, se_m2) = mean_se(&moments);
    let (mean_ks, _) = mean_se(&ks_values);
    body.aggregate("mean_mid_second_moment", mean_m2);
    body.aggregate("target_second_moment", target);
    body.aggregate("mean_ks_mid", mean_ks);
    body.verdicts.push(Verdict::flag(
        "endpoint_bit_exactness",
        all_bits,
        "t = 0 and t = 1 return the endpoints bit for bit",
    ));
    body.verdicts.push(Verdict::le(
        "midpoint_isotropy",
        (mean_m2 - target).abs(),
        (ctx.cfg.thresholds.mean_sigma * se_m2).max(0.005 * target),
        format!("per-column second moment at t = 1/2: {mean_m2:.6} vs {target:.6}"),
    ));
    body.verdicts.push(Verdict::le(
        "midpoint_bulk_law",
        mean_ks,
        ctx.cfg.thresholds.ks_tolerance.unwrap_or(0.05),
        "mean KS of the interpolated spectrum against the bulk law",
    ));
    Ok(body)
}
