//! Concentration battery: linear and quadratic tail ladders across
//! dimensions, the thin-shell constant, and the sign-resampling CLT for the
//! off-diagonal quadratic form at an outlier location.

use anyhow::{anyhow, Result};
use ndarray::Array2;

use lclab_core::green::ResolventBasis;
use lclab_core::sampling::assemble_x;
use lclab_core::seeding;
use lclab_core::stats::{
    hw_linear_test, hw_quadratic_test, rademacher_quadratic_clt, TAIL_EPSILONS,
};
use lclab_core::Cplx;

use super::{RunContext};
use crate::plot::PlotSpec;
use crate::report::{ExperimentBody, Verdict};

pub const DEFAULT_DIMENSIONS: [usize; 3] = [128, 256, 512];

/// Sections encoded in the per-row `section` column.
const SECTION_LINEAR: f64 = 0.0;
const SECTION_QUADRATIC: f64 = 1.0;
const SECTION_THIN_SHELL: f64 = 2.0;
const SECTION_RADEMACHER: f64 = 3.0;

pub fn run(ctx: &RunContext) -> Result<ExperimentBody> {
    let cfg = ctx.cfg;
    let dims: Vec<usize> = cfg.m_list.clone().unwrap_or_else(|| DEFAULT_DIMENSIONS.to_vec());
    let trials = cfg.trials.max(1);
    let mut body = ExperimentBody::new(vec!["section", "m", "param", "value", "reference"]);

    // --- linear forms: exceedance of <q, A> over m^eps |A| thresholds
    let mut linear_curves: Vec<(String, Vec<(f64, f64)>)> = TAIL_EPSILONS
        .iter()
        .map(|e| (format!("eps = {e}"), Vec::new()))
        .collect();
    for &m in &dims {
        let sampler = ctx.sampler(m)?;
        // unit-norm flat coefficient vector exercises the whole column
        let a = vec![1.0 / (m as f64).sqrt(); m];
        let report = hw_linear_test(&sampler, &a, trials, seeding::derive(cfg.seed, m as u64))
            .map_err(|e| anyhow!("linear tail: {e}"))?;
        for (k, (&eps, &p)) in report.epsilons.iter().zip(&report.exceedance).enumerate() {
            body.rows.push(vec![SECTION_LINEAR, m as f64, eps, p, report.thresholds[k]]);
            linear_curves[k].1.push((m as f64, p));
        }
    }
    for (k, &eps) in TAIL_EPSILONS.iter().enumerate() {
        let pass = monotone_nonincreasing(
            &linear_curves[k].1,
            trials,
        );
        body.verdicts.push(Verdict::flag(
            format!("linear_exceedance_decreasing_eps{eps}"),
            pass,
            format!(
                "exceedance by dimension: {:?}",
                linear_curves[k].1.iter().map(|p| p.1).collect::<Vec<_>>()
            ),
        ));
    }

    // --- quadratic forms: exceedance over the m^eps |B|_HS / N ladder with a
    // fixed sign-pattern matrix per dimension
    let mut quad_curves: Vec<(String, Vec<(f64, f64)>)> = TAIL_EPSILONS
        .iter()
        .map(|e| (format!("eps = {e}"), Vec::new()))
        .collect();
    for &m in &dims {
        let n_scale = 2 * m;
        let sampler = ctx.sampler(m)?;
        let b = sign_matrix(m, seeding::derive(cfg.seed, 0x0b0b ^ m as u64));
        let hs = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let t_grid: Vec<f64> = TAIL_EPSILONS
            .iter()
            .map(|&e| (m as f64).powf(e) * hs / n_scale as f64)
            .collect();
        let report = hw_quadratic_test(
            &sampler,
            &b,
            n_scale,
            trials,
            &t_grid,
            seeding::derive(cfg.seed, 0x09ad ^ m as u64),
        )
        .map_err(|e| anyhow!("quadratic tail: {e}"))?;
        for (k, (&t, &p)) in report.t_grid.iter().zip(&report.exceedance).enumerate() {
            body.rows.push(vec![SECTION_QUADRATIC, m as f64, t, p, report.shape[k]]);
            quad_curves[k].1.push((m as f64, p));
        }
    }
    for (k, &eps) in TAIL_EPSILONS.iter().enumerate() {
        let pass = monotone_nonincreasing(&quad_curves[k].1, trials);
        body.verdicts.push(Verdict::flag(
            format!("quadratic_exceedance_decreasing_eps{eps}"),
            pass,
            format!(
                "exceedance by dimension: {:?}",
                quad_curves[k].1.iter().map(|p| p.1).collect::<Vec<_>>()
            ),
        ));
    }

    // --- thin shell: Var(|q/sqrt(N)|^2) * N^2 / M with N = 2M
    let mut worst_c = 0.0f64;
    for &m in &dims {
        let n_scale = 2 * m;
        let sampler = ctx.sampler(m)?;
        let mut rng = seeding::rng_from(seeding::derive(cfg.seed, 0x7513 ^ m as u64));
        let draws = trials.max(10_000);
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for _ in 0..draws {
            let q = sampler.column(&mut rng);
            let y2: f64 = q.iter().map(|v| v * v).sum::<f64>() / n_scale as f64;
            s1 += y2;
            s2 += y2 * y2;
        }
        let mean = s1 / draws as f64;
        let var = (s2 / draws as f64 - mean * mean).max(0.0);
        let c = var * (n_scale * n_scale) as f64 / m as f64;
        body.rows.push(vec![SECTION_THIN_SHELL, m as f64, 0.0, c, 10.0]);
        worst_c = worst_c.max(c);
    }
    body.aggregate("thin_shell_worst_c", worst_c);
    body.verdicts.push(Verdict::le(
        "thin_shell_constant",
        worst_c,
        10.0,
        format!("fitted shell-variance constant across dimensions {dims:?}"),
    ));

    // --- sign-resampling CLT at the outlier location theta(d)
    let d = cfg.spikes.first().copied().unwrap_or(2.0);
    let theta = ctx.model.theta(d).map_err(|e| anyhow!("{e}"))?;
    let (m2, m2p) = {
        let (_, m2) = ctx.model.stieltjes_real(theta).map_err(|e| anyhow!("{e}"))?;
        (m2, ctx.model.m2_prime_real(theta, m2))
    };
    let sampler = ctx.sampler(ctx.m)?;
    let draw_seed = seeding::derive(cfg.seed, 0xc17);
    let draw = assemble_x(&sampler, cfg.n, draw_seed)?;
    // kurtosis of the scaled entries from a quick pilot
    let kurt = {
        let mut rng = seeding::rng_from(seeding::derive(cfg.seed, 0x4a4a));
        let pilot = 20_000usize;
        let mut acc = 0.0;
        for _ in 0..pilot {
            let q = sampler.column(&mut rng);
            acc += q.iter().map(|v| v.powi(4)).sum::<f64>() / ctx.m as f64;
        }
        acc / pilot as f64
    };
    let b1_sq = 2.0 * (m2p - m2 * m2);
    let b2_sq = m2 * m2 * (kurt - 1.0);
    let var_norm = b1_sq + b2_sq;
    // resolvent entries of the row-removed companion Gram matrix at theta
    let x_row: Vec<f64> = (0..cfg.n).map(|k| draw.x[[0, k]]).collect();
    let minor = {
        let mut minor = Array2::<f64>::zeros((ctx.m - 1, cfg.n));
        for i in 1..ctx.m {
            for k in 0..cfg.n {
                minor[[i - 1, k]] = draw.x[[i, k]];
            }
        }
        minor
    };
    let basis = ResolventBasis::new(minor, draw_seed)?;
    let all_indices: Vec<usize> = (0..cfg.n).collect();
    let g_complex = basis.companion_resolvent_entries(Cplx::new(theta, 0.0), &all_indices)?;
    let mut green = Array2::<f64>::zeros((cfg.n, cfg.n));
    for i in 0..cfg.n {
        for j in 0..cfg.n {
            green[[i, j]] = g_complex[[i, j]].re;
        }
    }
    let resamples = 5_000;
    let report = rademacher_quadratic_clt(
        &x_row,
        &green,
        var_norm,
        resamples,
        seeding::derive(cfg.seed, 0x515e),
    )
    .map_err(|e| anyhow!("sign-resampling CLT: {e}"))?;
    let d2_predicted = 2.0 * (m2p - m2 * m2);
    body.rows.push(vec![SECTION_RADEMACHER, ctx.m as f64, theta, report.ks, d2_predicted]);
    body.aggregate("rademacher_ks", report.ks);
    body.aggregate("rademacher_d2", report.d2);
    body.aggregate("rademacher_d2_predicted", d2_predicted);
    body.aggregate("rademacher_empirical_variance", report.empirical_variance);
    body.verdicts.push(Verdict::le(
        "rademacher_clt_ks",
        report.ks,
        0.06,
        format!("KS over {resamples} sign resamples against the conditional normal"),
    ));

    body.plots.push(PlotSpec::Lines {
        name: "linear_tail_ladder".into(),
        title: "linear-form exceedance vs dimension".into(),
        series: linear_curves,
        log_y: true,
    });
    body.plots.push(PlotSpec::Lines {
        name: "quadratic_tail_ladder".into(),
        title: "quadratic-form exceedance vs dimension".into(),
        series: quad_curves,
        log_y: true,
    });
    Ok(body)
}

/// Non-increasing within two combined binomial standard errors.
fn monotone_nonincreasing(points: &[(f64, f64)], trials: usize) -> bool {
    points.windows(2).all(|w| {
        let (p0, p1) = (w[0].1, w[1].1);
        let se0 = (p0 * (1.0 - p0) / trials as f64).sqrt();
        let se1 = (p1 * (1.0 - p1) / trials as f64).sqrt();
        p1 <= p0 + 2.0 * (se0 + se1) + 1e-12
    })
}

/// Symmetric dense ±1 matrix with a seeded sign pattern.
fn sign_matrix(m: usize, seed: u64) -> Array2<f64> {
    use rand::Rng;
    let mut rng = seeding::rng_from(seed);
    let mut b = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in 0..=i {
            let v = if rng.random::<bool>() { 1.0 } else { -1.0 };
            b[[i, j]] = v;
            b[[j, i]] = v;
        }
    }
    b
}
