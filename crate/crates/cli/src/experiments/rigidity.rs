//! Eigenvalue rigidity across a ladder of sizes: per-trial maximal
//! deviation/budget ratios plus the scaling exponent of the extreme
//! deviation.

use anyhow::{anyhow, Result};

use lclab_core::ensemble::{h_spectrum, SampleMeta};
use lclab_core::mp_model::classical_locations;
use lclab_core::sampling::assemble_x;
use lclab_core::stats::{rigidity_profile, scaling_exponent};

use super::{median, par_trials, RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

pub const DEFAULT_SIZES: [usize; 4] = [256, 512, 1024, 2048];

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let sizes: Vec<usize> = cfg.n_list.clone().unwrap_or_else(|| DEFAULT_SIZES.to_vec());
    let y = ctx.m as f64 / cfg.n as f64;
    let eps_test = cfg.thresholds.eps_test;

    let mut body = ExperimentBody::new(vec!["n", "trial", "max_ratio", "argmax_j", "dev1"]);
    let mut med_dev1 = Vec::new();
    let mut profile_plot: Option<(usize, Vec<f64>)> = None;

    for &n in &sizes {
        let m = ((y * n as f64).round() as usize).max(1);
        let gammas = classical_locations(m, n).map_err(|e| anyhow!("classical locations: {e}"))?;
        let sampler = ctx.sampler(m)?;
        let per_trial = par_trials(cfg.trials, |t| {
            let seed = lclab_core::seeding::derive(ctx.trial_seed(t), n as u64);
            let draw = assemble_x(&sampler, n, seed)?;
            let sample = h_spectrum(&draw.x, SampleMeta::new(m, n, seed))?;
            let prof = rigidity_profile(&sample, &gammas)?;
            Ok((prof.max_ratio, prof.argmax, prof.deviations[0], prof.ratios))
        })?;
        let mut max_ratios = Vec::with_capacity(cfg.trials);
        let mut dev1 = Vec::with_capacity(cfg.trials);
        let mut ratio_sum = vec![0.0f64; m.min(n)];
        for (t, (max_ratio, argmax, d1, ratios)) in per_trial.into_iter().enumerate() {
            body.rows
                .push(vec![n as f64, t as f64, max_ratio, argmax as f64, d1]);
            max_ratios.push(max_ratio);
            dev1.push(d1);
            for (acc, r) in ratio_sum.iter_mut().zip(&ratios) {
                *acc += r;
            }
        }
        let cap = (n as f64).powf(eps_test);
        let med = median(&max_ratios);
        body.aggregate(&format!("median_max_ratio_n{n}"), med);
        body.aggregate(&format!("cap_n{n}"), cap);
        body.verdicts.push(Verdict::le(
            format!("median_max_ratio_le_cap_n{n}"),
            med,
            cap,
            format!("median over {} trials of max_j deviation/budget at N = {n}", cfg.trials),
        ));
        med_dev1.push((n as f64, median(&dev1)));
        if Some(n) == sizes.iter().copied().max() {
            profile_plot = Some((
                n,
                ratio_sum.iter().map(|v| v / cfg.trials as f64).collect(),
            ));
        }
    }

    let fit = scaling_exponent(&med_dev1).map_err(|e| anyhow!("scaling regression: {e}"))?;
    body.aggregate("dev1_slope", fit.slope);
    body.aggregate("dev1_slope_ci", fit.ci_half_width);
    let (slope_lo, slope_hi) = (-0.8, -0.55);
    body.aggregate("slope_range", serde_json::json!([slope_lo, slope_hi]));
    body.verdicts.push(Verdict::flag(
        "dev1_slope_in_range",
        fit.slope >= slope_lo && fit.slope <= slope_hi,
        format!(
            "log-log slope of median |lambda_1 - gamma_1| = {:.4} (ci half width {:.4}), expected [{slope_lo}, {slope_hi}]",
            fit.slope, fit.ci_half_width
        ),
    ));

    if let Some((n, mean_profile)) = profile_plot {
        body.plots.push(PlotSpec::Lines {
            name: "rigidity_ratio_vs_index".into(),
            title: format!("mean deviation/budget ratio by index (N = {n})"),
            series: vec![(
                "mean ratio".into(),
                mean_profile
                    .iter()
                    .enumerate()
                    .map(|(j, r)| ((j + 1) as f64, *r))
                    .collect(),
            )],
            log_y: false,
        });
    }
    body.plots.push(PlotSpec::Lines {
        name: "dev1_scaling".into(),
        title: "median |lambda_1 - gamma_1| vs N".into(),
        series: vec![("median dev".into(), med_dev1.clone())],
        log_y: true,
    });
    Ok(body)
}
