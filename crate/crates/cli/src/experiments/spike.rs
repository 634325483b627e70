//! Outlier fluctuations of the spiked ensemble: location, studentized
//! fluctuation statistics, and their normality.

use anyhow::{anyhow, Result};

use lclab_core::ensemble::{spectrum_fast, SampleMeta, SpikeList};
use lclab_core::sampling::assemble_x;
use lclab_core::stats::{ks_distance, normal_cdf, phi_statistic, spike_prediction};

use super::{mean_se, par_trials, RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

/// Margin added to the detection threshold when validating spikes.
const SPIKE_EPS: f64 = 0.05;

/// Pilot size for moment estimation when the config leaves it unset.
const DEFAULT_PILOT: usize = 50_000;

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let strengths = if cfg.spikes.is_empty() { vec![2.0] } else { cfg.spikes.clone() };
    let spikes = SpikeList::new(strengths).map_err(|e| anyhow!("spikes: {e}"))?;
    spikes
        .validate_for_fluctuations(ctx.model.y(), cfg.n, SPIKE_EPS)
        .map_err(|e| anyhow!("spikes: {e}"))?;
    let r = spikes.len();
    let y = ctx.model.y();
    let sampler = ctx.sampler(ctx.m)?;
    let pilot = cfg.pilot.unwrap_or(DEFAULT_PILOT);

    // fresh pilot columns, independent of every trial draw
    let predictions: Vec<_> = spikes
        .strengths()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            spike_prediction(
                d,
                y,
                cfg.n,
                &sampler,
                pilot,
                lclab_core::seeding::derive(cfg.seed, 0x9170 ^ i as u64),
            )
        })
        .collect::<lclab_core::Result<_>>()
        .map_err(|e| anyhow!("pilot: {e}"))?;

    let per_trial = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let draw = assemble_x(&sampler, cfg.n, seed)?;
        let q = lclab_core::ensemble::assemble_spiked(&draw.x, &spikes)?;
        let sample = spectrum_fast(&q, SampleMeta::new(ctx.m, cfg.n, seed))?;
        Ok(sample.eigenvalues[..r].to_vec())
    })?;

    let mut columns: Vec<&'static str> = vec!["trial"];
    let col_names: Vec<String> = (1..=r)
        .flat_map(|i| [format!("lambda_q{i}"), format!("phi_{i}")])
        .collect();
    let leaked: Vec<&'static str> = col_names
        .iter()
        .map(|s| Box::leak(s.clone().into_boxed_str()) as &'static str)
        .collect();
    columns.extend(leaked);
    let mut body = ExperimentBody::new(columns);

    let mut phis: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.trials); r];
    let mut lambdas: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.trials); r];
    for (t, top) in per_trial.into_iter().enumerate() {
        let mut row = vec![t as f64];
        for i in 0..r {
            let d = spikes.strengths()[i];
            let phi = phi_statistic(top[i], &predictions[i], d, y, cfg.n);
            row.push(top[i]);
            row.push(phi);
            lambdas[i].push(top[i]);
            phis[i].push(phi);
        }
        body.rows.push(row);
    }

    let tol_primary = ctx.ks_tolerance(0.05, 0.07);
    for i in 0..r {
        let d = spikes.strengths()[i];
        let pred = &predictions[i];
        let (mean_lam, se_lam) = mean_se(&lambdas[i]);
        let predicted_mean = pred.theta + pred.a * ((d * d - y) / cfg.n as f64).sqrt();
        let ks = ks_distance(&phis[i], normal_cdf).map_err(|e| anyhow!("{e}"))?;
        let idx = i + 1;
        body.aggregate(&format!("theta_{idx}"), pred.theta);
        body.aggregate(&format!("a_{idx}"), pred.a);
        body.aggregate(&format!("a_se_{idx}"), pred.a_se);
        body.aggregate(&format!("b_{idx}"), pred.b);
        body.aggregate(&format!("kurtosis_{idx}"), pred.kurtosis);
        body.aggregate(&format!("mean_lambda_{idx}"), mean_lam);
        body.aggregate(&format!("predicted_mean_{idx}"), predicted_mean);
        body.aggregate(&format!("ks_phi_{idx}"), ks);
        let sigma_budget = cfg.thresholds.mean_sigma * se_lam;
        body.verdicts.push(Verdict::le(
            format!("outlier_mean_within_{}se_{idx}", cfg.thresholds.mean_sigma),
            (mean_lam - predicted_mean).abs(),
            sigma_budget,
            format!(
                "|mean lambda_{idx} - (theta + a correction)| = |{mean_lam:.6} - {predicted_mean:.6}| (se {se_lam:.6})"
            ),
        ));
        let tol = if i == 0 { tol_primary } else { tol_primary.max(0.06) };
        body.verdicts.push(Verdict::le(
            format!("phi_normality_ks_{idx}"),
            ks,
            tol,
            format!("KS of studentized fluctuation {idx} against the standard normal"),
        ));
        let overlay: Vec<(f64, f64)> = (0..=160)
            .map(|k| {
                let x = -4.0 + 8.0 * k as f64 / 160.0;
                let dens = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (x, dens)
            })
            .collect();
        body.plots.push(PlotSpec::Histogram {
            name: format!("phi_{idx}_vs_normal"),
            title: format!("studentized outlier fluctuation {idx} (d = {d})"),
            values: phis[i].clone(),
            bins: 40,
            overlay,
        });
    }
    body.aggregate("pilot_columns", pilot);
    body.aggregate("spikes", serde_json::json!(spikes.strengths()));
    Ok(body)
}
