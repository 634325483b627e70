//! Local-law scan: trace residual/budget ratios over the spectral domain
//! grid, entrywise deviations on a sampled index set, and the refined budget
//! beyond the right edge.

use anyhow::{anyhow, Result};

use lclab_core::green::{edge_refined_residual, local_law_scan, ResolventBasis, SpectralDomainGrid};
use lclab_core::sampling::assemble_x;

use super::{median, par_trials, RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

/// Energy offsets beyond the right edge probed by the refined-budget sweep.
pub const EDGE_KAPPAS: [f64; 3] = [0.1, 0.5, 1.0];

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let grid = SpectralDomainGrid::standard(
        &ctx.model,
        cfg.n,
        cfg.grid.epsilon,
        cfg.grid.n_energy,
        cfg.grid.n_eta,
    )
    .map_err(|e| anyhow!("grid: {e}"))?;
    let sampler = ctx.sampler(ctx.m)?;
    let n_f = cfg.n as f64;
    let cap = n_f.powf(cfg.thresholds.eps_test);
    let eta_refined = n_f.powf(-0.4);

    let per_trial = par_trials(cfg.trials, |t| {
        let seed = ctx.trial_seed(t);
        let draw = assemble_x(&sampler, cfg.n, seed)?;
        let basis = ResolventBasis::new(draw.x, seed)?;
        let probe = local_law_scan(&basis, &ctx.model, &grid, seed)?;
        let ratios: Vec<f64> = probe.points.iter().map(|p| p.residual / p.budget).collect();
        let entry_ratios: Vec<f64> = probe
            .points
            .iter()
            .map(|p| p.entrywise_max.unwrap_or(0.0) / p.entrywise_budget.unwrap_or(1.0))
            .collect();
        let mut refined = Vec::with_capacity(EDGE_KAPPAS.len());
        for &kappa in &EDGE_KAPPAS {
            let e = ctx.model.lambda_plus() + kappa;
            let (res, budget) = edge_refined_residual(basis.h_sample(), &ctx.model, e, eta_refined)?;
            refined.push(res / budget);
        }
        Ok((ratios, entry_ratios, refined))
    })?;

    let mut body = ExperimentBody::new(vec![
        "trial",
        "max_ratio",
        "pass_fraction",
        "entry_median_ratio",
        "refined_max_ratio",
    ]);
    let total_points = grid.points.len();
    let mut bulk_pass = 0usize;
    let mut bulk_total = 0usize;
    let mut refined_pass = 0usize;
    let mut refined_total = 0usize;
    let mut ratio_field = vec![0.0f64; total_points];
    for (t, (ratios, entry_ratios, refined)) in per_trial.iter().enumerate() {
        let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
        let pass = ratios.iter().filter(|&&r| r <= cap).count();
        bulk_pass += pass;
        bulk_total += ratios.len();
        for (acc, r) in ratio_field.iter_mut().zip(ratios) {
            *acc += r;
        }
        let rp = refined.iter().filter(|&&r| r <= cap).count();
        refined_pass += rp;
        refined_total += refined.len();
        let refined_max = refined.iter().cloned().fold(0.0f64, f64::max);
        body.rows.push(vec![
            t as f64,
            max_ratio,
            pass as f64 / ratios.len() as f64,
            median(entry_ratios),
            refined_max,
        ]);
    }
    let bulk_fraction = bulk_pass as f64 / bulk_total as f64;
    let refined_fraction = refined_pass as f64 / refined_total as f64;
    body.aggregate("grid_points", total_points);
    body.aggregate("cap", cap);
    body.aggregate("bulk_pass_fraction", bulk_fraction);
    body.aggregate("refined_pass_fraction", refined_fraction);
    body.aggregate("epsilon", cfg.grid.epsilon);
    body.verdicts.push(Verdict::ge(
        "bulk_ratio_pass_fraction",
        bulk_fraction,
        1.0 - 0.05f64.max(cfg.thresholds.delta_test / 2.0),
        format!("fraction of (point, trial) pairs with residual/budget <= N^{}", cfg.thresholds.eps_test),
    ));
    body.verdicts.push(Verdict::ge(
        "refined_edge_pass_fraction",
        refined_fraction,
        1.0 - cfg.thresholds.delta_test,
        "fraction of refined-budget evaluations beyond the edge within the cap".to_string(),
    ));

    // heatmap of mean ratios over the grid (energies x scales)
    let n_e = cfg.grid.n_energy;
    let n_eta = cfg.grid.n_eta;
    let xs: Vec<f64> = (0..n_e).map(|i| grid.points[i * n_eta].re).collect();
    let ys: Vec<f64> = (0..n_eta).map(|j| grid.points[j].im.log10()).collect();
    let mut values = vec![0.0f64; n_e * n_eta];
    for i in 0..n_e {
        for j in 0..n_eta {
            values[j * n_e + i] = ratio_field[i * n_eta + j] / per_trial.len() as f64;
        }
    }
    body.plots.push(PlotSpec::Heatmap {
        name: "local_law_ratio_heatmap".into(),
        title: "mean residual/budget over the spectral domain (log10 eta vertical)".into(),
        xs,
        ys,
        values,
    });
    Ok(body)
}
