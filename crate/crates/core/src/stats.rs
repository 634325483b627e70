//! Experiment statistics: rigidity profiles, edge rescaling, goodness of fit,
//! spike fluctuation predictions, concentration tail reports and
//! scaling-exponent regressions.

use ndarray::Array2;
use rand::Rng;

use crate::ensemble::SpectralSample;
use crate::error::{Error, Result};
use crate::mp_model::{self, MpModel};
use crate::sampling::Sampler;
use crate::seeding;

/// Per-index deviations |lambda_j - gamma_j| against the rigidity budget
/// `N^(-2/3) min(j, K+1-j)^(-1/3)` with `K = M /\ N`.
#[derive(Debug, Clone)]
pub struct RigidityProfile {
    pub deviations: Vec<f64>,
    pub budgets: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub argmax: usize,
}

/// Rigidity profile of one spectrum against precomputed classical locations.
pub fn rigidity_profile(sample: &SpectralSample, gammas: &[f64]) -> Result<RigidityProfile> {
    let k = sample.meta.m.min(sample.meta.n);
    if gammas.len() != k {
        return Err(Error::domain(format!(
            "expected {k} classical locations, got {}",
            gammas.len()
        )));
    }
    if sample.eigenvalues.len() < k {
        return Err(Error::domain("spectrum shorter than M /\\ N"));
    }
    let n = sample.meta.n as f64;
    let mut deviations = Vec::with_capacity(k);
    let mut budgets = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    let mut max_ratio = 0.0f64;
    let mut argmax = 0usize;
    for j in 1..=k {
        let dev = (sample.eigenvalues[j - 1] - gammas[j - 1]).abs();
        let order = j.min(k + 1 - j) as f64;
        let budget = n.powf(-2.0 / 3.0) * order.powf(-1.0 / 3.0);
        let ratio = dev / budget;
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax = j;
        }
        deviations.push(dev);
        budgets.push(budget);
        ratios.push(ratio);
    }
    Ok(RigidityProfile { deviations, budgets, ratios, max_ratio, argmax })
}

/// Convenience wrapper computing the classical locations from the model.
pub fn rigidity_profile_from_model(
    sample: &SpectralSample,
    model: &MpModel,
) -> Result<RigidityProfile> {
    let _ = model;
    let gammas = mp_model::classical_locations(sample.meta.m, sample.meta.n)?;
    rigidity_profile(sample, &gammas)
}

/// Studentized largest-eigenvalue statistic
/// `(N lambda_1 - (sqrt(M)+sqrt(N))^2) / ((sqrt(M)+sqrt(N)) (1/sqrt(M)+1/sqrt(N))^(1/3))`.
pub fn edge_rescale(lambda1: f64, m: usize, n: usize) -> f64 {
    let sm = (m as f64).sqrt();
    let sn = (n as f64).sqrt();
    let center = (sm + sn) * (sm + sn);
    let scale = (sm + sn) * (1.0 / sm + 1.0 / sn).powf(1.0 / 3.0);
    (n as f64 * lambda1 - center) / scale
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a fully
/// specified reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("KS distance needs a nonempty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(((i + 1) as f64 / n - f).abs());
        sup = sup.max((f - i as f64 / n).abs());
    }
    Ok(sup)
}

/// Standard normal CDF via the complementary error function (accurate to a
/// few ulps).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// All-positive-terms series erf(x) = 2/sqrt(pi) e^{-x^2} sum_k x^{2k+1} 2^k / (2k+1)!!.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut denom = 1.0;
    for _ in 1..200 {
        denom += 2.0;
        term *= 2.0 * x2 / denom;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * (-x2).exp() * sum
}

/// Modified Lentz evaluation of erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let mut c = f;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        let b = x;
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

/// Fluctuation law of an outlier eigenvalue: location `theta`, mean
/// correction `a`, scale `b`, plus the pilot moment estimates behind them.
#[derive(Debug, Clone)]
pub struct SpikePrediction {
    pub d: f64,
    pub y: f64,
    pub theta: f64,
    pub a: f64,
    /// Standard error of the Monte Carlo estimate of `a`.
    pub a_se: f64,
    pub b: f64,
    pub kurtosis: f64,
    /// E[sum_k x_ik^2 sum_{u != i}(x_uk^2 - 1/N)] from the pilot run.
    pub mixed_moment: f64,
    pub pilot_columns: usize,
}

/// Smallest admissible pilot size.
pub const MIN_PILOT_COLUMNS: usize = 10_000;

impl SpikePrediction {
    /// Analytic construction with externally supplied moments (no pilot);
    /// used when the kurtosis and mixed moment are known exactly.
    pub fn with_exact_moments(d: f64, y: f64, kurtosis: f64, mixed_moment: f64, n: usize) -> Result<Self> {
        let theta = mp_model::theta(d, y)?;
        let coef = (d + 1.0) * (n as f64).sqrt() * (d * d - y).sqrt() / d.powi(3);
        let a = coef * mixed_moment;
        let b_sq = b_squared(d, y, kurtosis);
        if b_sq <= 0.0 {
            return Err(Error::Numerical(format!("nonpositive fluctuation variance {b_sq}")));
        }
        Ok(SpikePrediction {
            d,
            y,
            theta,
            a,
            a_se: 0.0,
            b: b_sq.sqrt(),
            kurtosis,
            mixed_moment,
            pilot_columns: 0,
        })
    }
}

fn b_squared(d: f64, y: f64, kurtosis: f64) -> f64 {
    let base = 2.0 * (1.0 + 1.0 / d) * (1.0 + 1.0 / d);
    let correction = (d * d - y) * (d + 1.0) * (d + 1.0) / d.powi(4) * (kurtosis - 3.0);
    base + correction
}

/// Estimates the fluctuation law of the leading outlier from `pilot` fresh
/// columns of the sampler (never from the draw being studied).
pub fn spike_prediction(
    d: f64,
    y: f64,
    n: usize,
    sampler: &Sampler,
    pilot: usize,
    seed: u64,
) -> Result<SpikePrediction> {
    if pilot < MIN_PILOT_COLUMNS {
        return Err(Error::Sampler(format!(
            "pilot size {pilot} below the floor {MIN_PILOT_COLUMNS}"
        )));
    }
    let theta = mp_model::theta(d, y)?;
    let m = sampler.dimension();
    let n_f = n as f64;
    let m_f = m as f64;
    let mut rng = seeding::rng_from(seeding::derive(seed, 0x5b1ce));
    // per-column statistics, averaged over the (exchangeable) coordinates:
    // sum_i q_i^2 (S - q_i^2 - (M-1)) = S^2 - sum q^4 - (M-1) S
    let mut t_mean = 0.0f64;
    let mut t_sq = 0.0f64;
    let mut kurt = 0.0f64;
    for _ in 0..pilot {
        let q = sampler.column(&mut rng);
        let s: f64 = q.iter().map(|v| v * v).sum();
        let q4: f64 = q.iter().map(|v| v * v * v * v).sum();
        let t = (s * s - q4 - (m_f - 1.0) * s) / m_f;
        t_mean += t;
        t_sq += t * t;
        kurt += q4 / m_f;
    }
    let pilot_f = pilot as f64;
    t_mean /= pilot_f;
    kurt /= pilot_f;
    let t_var = (t_sq / pilot_f - t_mean * t_mean).max(0.0);
    // scaled columns put a 1/N^2 on the per-column statistic and the sum over
    // N columns multiplies by N
    let mixed_moment = t_mean / n_f;
    let mixed_se = (t_var / pilot_f).sqrt() / n_f;
    let coef = (d + 1.0) * n_f.sqrt() * (d * d - y).sqrt() / d.powi(3);
    let a = coef * mixed_moment;
    let a_se = coef * mixed_se;
    let b_sq = b_squared(d, y, kurt);
    if b_sq <= 0.0 {
        return Err(Error::Numerical(format!("nonpositive fluctuation variance {b_sq}")));
    }
    Ok(SpikePrediction {
        d,
        y,
        theta,
        a,
        a_se,
        b: b_sq.sqrt(),
        kurtosis: kurt,
        mixed_moment,
        pilot_columns: pilot,
    })
}

/// Studentized outlier fluctuation `(Phi - a)/b` with
/// `Phi = (lambda - theta(d)) sqrt(N/(d^2 - y))`.
pub fn phi_statistic(lambda_obs: f64, pred: &SpikePrediction, d: f64, y: f64, n: usize) -> f64 {
    let phi = (lambda_obs - pred.theta) * (n as f64 / (d * d - y)).sqrt();
    (phi - pred.a) / pred.b
}

/// Exceedance report for linear forms `<q, A>` at thresholds `m^eps |A|_2`.
#[derive(Debug, Clone)]
pub struct TailReport {
    pub epsilons: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub exceedance: Vec<f64>,
    pub trials: usize,
}

/// Standard exponent ladder probed by the tail reports.
pub const TAIL_EPSILONS: [f64; 3] = [0.05, 0.1, 0.2];

/// Empirical tail of the linear form of one sampled column against a fixed
/// coefficient vector.
pub fn hw_linear_test(sampler: &Sampler, a: &[f64], trials: usize, seed: u64) -> Result<TailReport> {
    let m = sampler.dimension();
    if a.len() != m {
        return Err(Error::domain(format!("coefficient vector length {} != {m}", a.len())));
    }
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let m_f = m as f64;
    let epsilons = TAIL_EPSILONS.to_vec();
    let thresholds: Vec<f64> = epsilons.iter().map(|&e| m_f.powf(e) * norm).collect();
    let mut counts = vec![0usize; thresholds.len()];
    let mut rng = seeding::rng_from(seeding::derive(seed, 0x11e4));
    for _ in 0..trials {
        let q = sampler.column(&mut rng);
        let s: f64 = q.iter().zip(a).map(|(qi, ai)| qi * ai).sum();
        for (c, &t) in counts.iter_mut().zip(&thresholds) {
            if s.abs() > t {
                *c += 1;
            }
        }
    }
    let exceedance = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    Ok(TailReport { epsilons, thresholds, exceedance, trials })
}

/// Tail report for centered quadratic forms, with the two-regime reference
/// shape `min(N t / |B|_HS, sqrt(N t / |B|_op))` evaluated on the same grid.
#[derive(Debug, Clone)]
pub struct QuadTailReport {
    pub t_grid: Vec<f64>,
    pub exceedance: Vec<f64>,
    pub shape: Vec<f64>,
    pub trials: usize,
    pub hs_norm: f64,
    pub op_norm: f64,
}

/// Empirical tail of `x^T B x - tr(B)/N` for scaled columns `x = q/sqrt(N)`.
pub fn hw_quadratic_test(
    sampler: &Sampler,
    b: &Array2<f64>,
    n_scale: usize,
    trials: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<QuadTailReport> {
    let m = sampler.dimension();
    if b.nrows() != m || b.ncols() != m {
        return Err(Error::domain(format!("matrix must be {m}x{m}")));
    }
    if trials == 0 || t_grid.is_empty() {
        return Err(Error::domain("need trials and a t grid"));
    }
    let n_f = n_scale as f64;
    let trace: f64 = (0..m).map(|i| b[[i, i]]).sum();
    let hs_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let op_norm = {
        let mut sym = b.clone();
        for i in 0..m {
            for j in 0..m {
                sym[[i, j]] = 0.5 * (b[[i, j]] + b[[j, i]]);
            }
        }
        let ev = crate::linalg::sym_eigenvalues(&sym, seed)?;
        ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    };
    let mut counts = vec![0usize; t_grid.len()];
    let mut rng = seeding::rng_from(seeding::derive(seed, 0x9944));
    for _ in 0..trials {
        let q = sampler.column(&mut rng);
        let mut quad = 0.0;
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                row += b[[i, j]] * q[j];
            }
            quad += q[i] * row;
        }
        let s = (quad - trace) / n_f;
        for (c, &t) in counts.iter_mut().zip(t_grid) {
            if s.abs() >= t {
                *c += 1;
            }
        }
    }
    let exceedance: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let shape: Vec<f64> = t_grid
        .iter()
        .map(|&t| (n_f * t / hs_norm).min((n_f * t / op_norm).sqrt()))
        .collect();
    Ok(QuadTailReport { t_grid: t_grid.to_vec(), exceedance, shape, trials, hs_norm, op_norm })
}

/// Sign-resampling CLT report for the off-diagonal quadratic form
/// `Q1 = sqrt(N) sum_{k != l} delta_k delta_l x_k x_l G_kl`.
#[derive(Debug, Clone)]
pub struct RademacherReport {
    /// Exact conditional variance `D2 = 2 N sum_{k != l} x_k^2 x_l^2 G_kl^2`.
    pub d2: f64,
    pub empirical_variance: f64,
    /// KS distance of `Q1/sqrt(var_norm)` from N(0, D2/var_norm).
    pub ks: f64,
    pub trials: usize,
}

/// Resamples Rademacher signs over fixed data `x_row` and symmetric entries
/// `green`, and compares the studentized quadratic form to its conditional
/// Gaussian limit. `var_norm` is the normalization `b1^2 + b2^2`.
pub fn rademacher_quadratic_clt(
    x_row: &[f64],
    green: &Array2<f64>,
    var_norm: f64,
    trials: usize,
    seed: u64,
) -> Result<RademacherReport> {
    let n = x_row.len();
    if green.nrows() != n || green.ncols() != n {
        return Err(Error::domain("entry matrix shape mismatch"));
    }
    if !(var_norm > 0.0) {
        return Err(Error::domain("normalization must be positive"));
    }
    if trials == 0 {
        return Err(Error::domain("need at least one sign resample"));
    }
    // c_kl = x_k x_l G_kl with zero diagonal
    let mut c = Array2::<f64>::zeros((n, n));
    let mut d2 = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                let v = x_row[k] * x_row[l] * green[[k, l]];
                c[[k, l]] = v;
                d2 += v * v;
            }
        }
    }
    let n_f = n as f64;
    let d2 = 2.0 * n_f * d2;
    let mut rng = seeding::rng_from(seeding::derive(seed, 0xade3));
    let mut stats = Vec::with_capacity(trials);
    let mut signs = vec![1.0f64; n];
    for _ in 0..trials {
        for s in signs.iter_mut() {
            *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        // delta^T C delta over off-diagonal pairs
        let mut acc = 0.0;
        for k in 0..n {
            let mut row = 0.0;
            for l in 0..n {
                row += c[[k, l]] * signs[l];
            }
            acc += signs[k] * row;
        }
        stats.push(n_f.sqrt() * acc / var_norm.sqrt());
    }
    let mean = stats.iter().sum::<f64>() / trials as f64;
    let var = stats.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (trials as f64 - 1.0);
    let sigma = (d2 / var_norm).sqrt();
    let ks = if sigma > 0.0 {
        ks_distance(&stats, |x| normal_cdf(x / sigma))?
    } else {
        // degenerate case: all mass at zero
        if stats.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            1.0
        }
    };
    Ok(RademacherReport {
        d2,
        empirical_variance: var * var_norm,
        ks,
        trials,
    })
}

/// Least-squares fit of `log(value)` against `log(n)`.
#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half width of an approximate 95% interval (two standard errors).
    pub ci_half_width: f64,
}

/// Scaling-exponent regression; needs at least three sizes.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "scaling regression needs >= 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, v)| n <= 0.0 || v <= 0.0) {
        return Err(Error::domain("sizes and values must be positive"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (n - 2.0).max(1.0);
    let se = (rss / dof / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, ci_half_width: 2.0 * se })
}
