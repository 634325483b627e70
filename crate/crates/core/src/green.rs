//! Resolvent (Green function) probes.
//!
//! Everything here measures how close one finite draw sits to the
//! deterministic reference law: trace-level residuals against the bulk and
//! refined edge budgets, an entrywise scan over a sampled index set, edge
//! regularity of the empirical Stieltjes transform, quadratic-form and entry
//! bounds for the column-removed resolvent at the edge, and the smoothed
//! edge statistic used to compare two ensembles.

use ndarray::{Array1, Array2};
use rand::seq::index::sample as index_sample;

use crate::ensemble::{SampleMeta, SpectralSample};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mp_model::MpModel;
use crate::seeding;
use crate::Cplx;

/// Grid of spectral parameters inside the admissible domain
/// `{E in [1_{y<1} lambda_minus/5, 5 lambda_plus], eta in [N^(-1+eps), 10(1+y)]}`.
#[derive(Debug, Clone)]
pub struct SpectralDomainGrid {
    pub epsilon: f64,
    pub n: usize,
    pub points: Vec<Cplx>,
}

impl SpectralDomainGrid {
    /// Rectangular grid: `n_e` energies linear across the domain crossed with
    /// `n_eta` scales log-spaced between the admissible extremes.
    pub fn standard(model: &MpModel, n: usize, epsilon: f64, n_e: usize, n_eta: usize) -> Result<Self> {
        if n_e < 2 || n_eta < 2 {
            return Err(Error::domain("grid needs at least 2x2 points"));
        }
        let (e_lo, e_hi) = Self::energy_range(model);
        let (eta_lo, eta_hi) = Self::eta_range(model, n, epsilon);
        if eta_lo >= eta_hi {
            return Err(Error::domain("empty scale range; epsilon too large for this N"));
        }
        let mut points = Vec::with_capacity(n_e * n_eta);
        for i in 0..n_e {
            let e = e_lo + (e_hi - e_lo) * i as f64 / (n_e - 1) as f64;
            for j in 0..n_eta {
                let t = j as f64 / (n_eta - 1) as f64;
                let eta = eta_lo * (eta_hi / eta_lo).powf(t);
                points.push(Cplx::new(e, eta));
            }
        }
        Ok(SpectralDomainGrid { epsilon, n, points })
    }

    pub fn energy_range(model: &MpModel) -> (f64, f64) {
        let lo = if model.y() < 1.0 { model.lambda_minus() / 5.0 } else { 0.0 };
        (lo, 5.0 * model.lambda_plus())
    }

    pub fn eta_range(model: &MpModel, n: usize, epsilon: f64) -> (f64, f64) {
        ((n as f64).powf(-1.0 + epsilon), 10.0 * (1.0 + model.y()))
    }

    pub fn contains(&self, model: &MpModel, z: Cplx) -> bool {
        let (e_lo, e_hi) = Self::energy_range(model);
        let (eta_lo, eta_hi) = Self::eta_range(model, self.n, self.epsilon);
        z.re >= e_lo && z.re <= e_hi && z.im >= eta_lo && z.im <= eta_hi
    }
}

/// Normalized-trace Stieltjes transform of the given spectrum at `z`.
pub fn empirical_stieltjes(sample: &SpectralSample, z: Cplx) -> Result<Cplx> {
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("Im z must be positive, got {}", z.im)));
    }
    let sum: Cplx = sample
        .eigenvalues
        .iter()
        .map(|&l| (Cplx::new(l, 0.0) - z).inv())
        .sum();
    Ok(sum / sample.eigenvalues.len() as f64)
}

/// `m_2N(z)` computed from an `H` spectrum with implicit zero padding (or
/// truncation) to the companion dimension `N`; no allocation.
pub fn m2n_of_h_sample(sample: &SpectralSample, z: Cplx) -> Result<Cplx> {
    if !(z.im > 0.0) {
        return Err(Error::domain(format!("Im z must be positive, got {}", z.im)));
    }
    let m = sample.meta.m;
    let n = sample.meta.n;
    debug_assert_eq!(sample.eigenvalues.len(), m);
    let sum: Cplx = if m <= n {
        let tail = (n - m) as f64 * (-z.inv());
        sample
            .eigenvalues
            .iter()
            .map(|&l| (Cplx::new(l, 0.0) - z).inv())
            .sum::<Cplx>()
            + tail
    } else {
        sample.eigenvalues[..n]
            .iter()
            .map(|&l| (Cplx::new(l, 0.0) - z).inv())
            .sum::<Cplx>()
    };
    Ok(sum / n as f64)
}

/// Eigen-factorization of one draw, prepared for resolvent entry evaluation
/// on the companion (`N`-dimensional) side.
pub struct ResolventBasis {
    /// Eigenvalues ascending, as factorized (smaller Gram side).
    lambdas: Vec<f64>,
    h_sample: SpectralSample,
    x: Array2<f64>,
    u: Array2<f64>,
    /// true if the factorized side is `H` (M <= N), false for the companion.
    via_h: bool,
}

impl ResolventBasis {
    pub fn new(x: Array2<f64>, seed: u64) -> Result<Self> {
        let (m, n) = x.dim();
        linalg::pin_blas_single_thread();
        let meta = SampleMeta::new(m, n, seed);
        if m <= n {
            let h = crate::ensemble::assemble_h(&x);
            let (lambdas, u) = linalg::sym_eigen(&h, seed)?;
            let mut desc = lambdas.clone();
            desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let h_sample = SpectralSample { eigenvalues: desc, meta };
            Ok(ResolventBasis { lambdas, h_sample, x, u, via_h: true })
        } else {
            let mut gram = x.t().dot(&x);
            linalg::symmetrize(&mut gram);
            let (lambdas, u) = linalg::sym_eigen(&gram, seed)?;
            let mut desc = lambdas.clone();
            desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
            desc.resize(m, 0.0);
            let h_sample = SpectralSample { eigenvalues: desc, meta };
            Ok(ResolventBasis { lambdas, h_sample, x, u, via_h: false })
        }
    }

    pub fn h_sample(&self) -> &SpectralSample {
        &self.h_sample
    }

    /// Entries `[G_2(z)]_{ij}` of the companion resolvent on `subset x subset`.
    pub fn companion_resolvent_entries(&self, z: Cplx, subset: &[usize]) -> Result<Array2<Cplx>> {
        let (m, n) = self.x.dim();
        let s = subset.len();
        if subset.iter().any(|&i| i >= n) {
            return Err(Error::Matrix("subset index out of range".into()));
        }
        // rows of the companion eigenvectors at the sampled indices
        let w = if self.via_h {
            // v_k = X^T u_k / sqrt(lambda_k) for the nonzero spectrum
            let mut xs = Array2::<f64>::zeros((s, m));
            for (row, &i) in subset.iter().enumerate() {
                for r in 0..m {
                    xs[[row, r]] = self.x[[r, i]];
                }
            }
            let mut w = xs.dot(&self.u); // s x m
            let lam_max = self.lambdas.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
            for (k, &l) in self.lambdas.iter().enumerate() {
                if l <= 1e-12 * lam_max {
                    return Err(Error::Numerical(format!(
                        "near-singular Gram factor (lambda = {l:e}); companion mapping unstable"
                    )));
                }
                let inv = 1.0 / l.sqrt();
                w.column_mut(k).mapv_inplace(|v| v * inv);
            }
            w
        } else {
            let mut w = Array2::<f64>::zeros((s, self.lambdas.len()));
            for (row, &i) in subset.iter().enumerate() {
                for k in 0..self.lambdas.len() {
                    w[[row, k]] = self.u[[i, k]];
                }
            }
            w
        };
        // G = W diag(1/(lambda - z)) W^T (+ kernel correction when via_h)
        let mut re_scaled = w.clone();
        let mut im_scaled = w.clone();
        for (k, &l) in self.lambdas.iter().enumerate() {
            let inv = (Cplx::new(l, 0.0) - z).inv();
            re_scaled.column_mut(k).mapv_inplace(|v| v * inv.re);
            im_scaled.column_mut(k).mapv_inplace(|v| v * inv.im);
        }
        let g_re = re_scaled.dot(&w.t());
        let g_im = im_scaled.dot(&w.t());
        let mut g = Array2::<Cplx>::zeros((s, s));
        for i in 0..s {
            for j in 0..s {
                g[[i, j]] = Cplx::new(g_re[[i, j]], g_im[[i, j]]);
            }
        }
        if self.via_h {
            // remaining N-M companion directions span the kernel: -1/z on the
            // orthogonal complement of the mapped eigenvectors
            let p = w.dot(&w.t());
            let minus_inv_z = -z.inv();
            for i in 0..s {
                for j in 0..s {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    g[[i, j]] += minus_inv_z * (delta - p[[i, j]]);
                }
            }
        }
        Ok(g)
    }
}

/// One grid point of a local-law scan.
#[derive(Debug, Clone)]
pub struct GreenProbePoint {
    pub z: Cplx,
    pub m2n: Cplx,
    pub m2: Cplx,
    pub residual: f64,
    pub budget: f64,
    pub entrywise_max: Option<f64>,
    pub entrywise_budget: Option<f64>,
}

/// Scan result over a full grid.
#[derive(Debug, Clone)]
pub struct GreenProbe {
    pub points: Vec<GreenProbePoint>,
    pub index_set: Vec<usize>,
}

impl GreenProbe {
    /// Largest residual/budget ratio over the grid.
    pub fn max_trace_ratio(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.residual / p.budget)
            .fold(0.0, f64::max)
    }

    /// Fraction of grid points whose residual/budget ratio stays below `cap`.
    pub fn trace_pass_fraction(&self, cap: f64) -> f64 {
        let ok = self
            .points
            .iter()
            .filter(|p| p.residual / p.budget <= cap)
            .count();
        ok as f64 / self.points.len() as f64
    }
}

/// Number of companion indices sampled for the entrywise part of a scan.
pub const ENTRYWISE_SUBSET: usize = 32;

/// Full trace + entrywise scan of one draw over a grid. The entrywise part
/// uses all indices when `N <= 128`, otherwise a seeded 32-index subset.
pub fn local_law_scan(
    basis: &ResolventBasis,
    model: &MpModel,
    grid: &SpectralDomainGrid,
    subset_seed: u64,
) -> Result<GreenProbe> {
    let sample = basis.h_sample();
    let n = sample.meta.n;
    let index_set: Vec<usize> = if n <= 128 {
        (0..n).collect()
    } else {
        let mut rng = seeding::rng_from(seeding::derive(subset_seed, 0x1dce5));
        let mut v = index_sample(&mut rng, n, ENTRYWISE_SUBSET).into_vec();
        v.sort_unstable();
        v
    };
    let mut points = Vec::with_capacity(grid.points.len());
    for &z in &grid.points {
        let m2n = m2n_of_h_sample(sample, z)?;
        let m2 = model.stieltjes(z)?.m2;
        let residual = (m2n - m2).norm();
        let budget = 1.0 / (n as f64 * z.im);
        let g = basis.companion_resolvent_entries(z, &index_set)?;
        let mut dev = 0.0f64;
        for i in 0..index_set.len() {
            for j in 0..index_set.len() {
                let reference = if i == j { m2 } else { Cplx::new(0.0, 0.0) };
                dev = dev.max((g[[i, j]] - reference).norm());
            }
        }
        let entry_budget = (m2.im / (n as f64 * z.im)).sqrt() + 1.0 / (n as f64 * z.im);
        points.push(GreenProbePoint {
            z,
            m2n,
            m2,
            residual,
            budget,
            entrywise_max: Some(dev),
            entrywise_budget: Some(entry_budget),
        });
    }
    Ok(GreenProbe { points, index_set })
}

/// Residual of `m_2N` against the refined edge budget
/// `1/(N(kappa+eta)) + 1/((N eta)^2 sqrt(kappa+eta))` at and beyond the edge.
pub fn edge_refined_residual(
    sample: &SpectralSample,
    model: &MpModel,
    e: f64,
    eta: f64,
) -> Result<(f64, f64)> {
    if e < model.lambda_plus() {
        return Err(Error::domain(format!(
            "refined edge budget needs E >= lambda_plus, got {e} < {}",
            model.lambda_plus()
        )));
    }
    let kappa = e - model.lambda_plus();
    let z = Cplx::new(e, eta);
    let m2n = m2n_of_h_sample(sample, z)?;
    let m2 = model.stieltjes(z)?.m2;
    let n = sample.meta.n as f64;
    let budget = 1.0 / (n * (kappa + eta)) + 1.0 / ((n * eta) * (n * eta) * (kappa + eta).sqrt());
    Ok(((m2n - m2).norm(), budget))
}

/// Outcome of the square-root edge regularity check.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub pass_below: bool,
    pub pass_above: bool,
    pub pass_scale: bool,
    /// Worst two-sided factor max(r, 1/r) against the square-root shape on
    /// the region below (resp. above) the edge.
    pub worst_below: f64,
    pub worst_above: f64,
    pub lambda_plus_v: f64,
}

impl RegularityReport {
    pub fn pass(&self) -> bool {
        self.pass_below && self.pass_above && self.pass_scale
    }
}

/// Largest scale probed by the regularity scan. The square-root shape of a
/// compactly supported law degenerates to `Im m ~ 1/eta` once `eta` exceeds
/// the support diameter, so scanning all the way to `eta = 10` would force
/// the constant `C_v` above 30 even for the exact reference law; the scan
/// stops where the shape comparison is informative.
pub const REGULARITY_ETA_MAX: f64 = 2.0;

/// Checks square-root edge behavior of a Stieltjes transform down to scale
/// `eta_star`, with constants `(c_v, big_c_v)`: below the edge
/// `Im m ~ sqrt(kappa+eta)`, above it `Im m ~ eta/sqrt(kappa+eta)`, and the
/// edge location itself sits at scale `2 c_v <= lambda_plus <= C_v / 2`.
/// Scales run from the region floor up to [`REGULARITY_ETA_MAX`].
pub fn eta_star_regularity<F: Fn(Cplx) -> Cplx>(
    m_v: F,
    lambda_plus_v: f64,
    eta_star: f64,
    c_v: f64,
    big_c_v: f64,
) -> RegularityReport {
    let grid_e = 12;
    let grid_eta = 12;
    let eta_max = REGULARITY_ETA_MAX;
    let mut worst_below = 1.0f64;
    for i in 0..grid_e {
        let kappa = c_v * i as f64 / (grid_e - 1) as f64;
        let e = lambda_plus_v - kappa;
        let eta_lo = eta_star + (eta_star * kappa).sqrt();
        if eta_lo >= eta_max {
            continue;
        }
        for j in 0..grid_eta {
            let t = j as f64 / (grid_eta - 1) as f64;
            let eta = eta_lo * (eta_max / eta_lo).powf(t);
            let shape = (kappa + eta).sqrt();
            let imv = m_v(Cplx::new(e, eta)).im;
            let r = (imv / shape).max(1e-300);
            worst_below = worst_below.max(r).max(1.0 / r);
        }
    }
    let mut worst_above = 1.0f64;
    for i in 0..grid_e {
        let kappa = c_v * i as f64 / (grid_e - 1) as f64;
        let e = lambda_plus_v + kappa;
        for j in 0..grid_eta {
            let t = j as f64 / (grid_eta - 1) as f64;
            let eta = eta_star * (eta_max / eta_star).powf(t);
            let shape = eta / (kappa + eta).sqrt();
            let imv = m_v(Cplx::new(e, eta)).im;
            let r = (imv / shape).max(1e-300);
            worst_above = worst_above.max(r).max(1.0 / r);
        }
    }
    let pass_scale = 2.0 * c_v <= lambda_plus_v && lambda_plus_v <= big_c_v / 2.0;
    RegularityReport {
        pass_below: worst_below <= big_c_v,
        pass_above: worst_above <= big_c_v,
        pass_scale,
        worst_below,
        worst_above,
        lambda_plus_v,
    }
}

/// Stieltjes transform of an explicit spectrum (the `M`-normalized trace).
pub fn sample_m_fn(sample: &SpectralSample) -> impl Fn(Cplx) -> Cplx + '_ {
    move |z| {
        sample
            .eigenvalues
            .iter()
            .map(|&l| (Cplx::new(l, 0.0) - z).inv())
            .sum::<Cplx>()
            / sample.eigenvalues.len() as f64
    }
}

/// Quadratic-form and entrywise magnitudes of the column-removed resolvent
/// at an edge parameter.
#[derive(Debug, Clone)]
pub struct EdgeGreenBounds {
    pub z: Cplx,
    /// |<x1, G^2 x1>| for the removed column x1.
    pub q_form: f64,
    /// max_i |G_ii - m1(z)|
    pub diag_dev: f64,
    /// max_{i != j} |G_ij|
    pub offdiag_max: f64,
    /// max_{ij} |[G^2]_{ij}|
    pub sq_entry_max: f64,
    /// max_{ij} |G_ij - G_ji| (resolvent symmetry)
    pub symmetry_defect: f64,
}

/// Evaluates the edge bounds for the draw `x` with its first column removed,
/// at `z = E + i N^(-2/3-eps)`.
pub fn edge_green_bounds(
    x: &Array2<f64>,
    model: &MpModel,
    e: f64,
    epsilon: f64,
    seed: u64,
) -> Result<EdgeGreenBounds> {
    let (m, n) = x.dim();
    if n < 2 {
        return Err(Error::Matrix("need at least two columns".into()));
    }
    let eta0 = (n as f64).powf(-2.0 / 3.0 - epsilon);
    let z = Cplx::new(e, eta0);
    // minor with column 0 removed
    let x1 = x.column(0).to_owned();
    let minor = x.slice(ndarray::s![.., 1..]).to_owned();
    let h1 = crate::ensemble::assemble_h(&minor);
    let (lambdas, u) = linalg::sym_eigen(&h1, seed)?;
    // coefficients <u_k, x1>
    let coeff: Array1<f64> = u.t().dot(&x1);
    let mut q = Cplx::new(0.0, 0.0);
    for (k, &l) in lambdas.iter().enumerate() {
        let d = (Cplx::new(l, 0.0) - z).inv();
        q += Cplx::new(coeff[k] * coeff[k], 0.0) * d * d;
    }
    let g = complex_congruence(&u, &lambdas, z, 1);
    let g2 = complex_congruence(&u, &lambdas, z, 2);
    let m1 = model.stieltjes(z)?.m1;
    let mut diag_dev = 0.0f64;
    let mut offdiag = 0.0f64;
    let mut sq_max = 0.0f64;
    let mut sym = 0.0f64;
    for i in 0..m {
        diag_dev = diag_dev.max((g[[i, i]] - m1).norm());
        for j in 0..m {
            if i != j {
                offdiag = offdiag.max(g[[i, j]].norm());
                sym = sym.max((g[[i, j]] - g[[j, i]]).norm());
            }
            sq_max = sq_max.max(g2[[i, j]].norm());
        }
    }
    Ok(EdgeGreenBounds {
        z,
        q_form: q.norm(),
        diag_dev,
        offdiag_max: offdiag,
        sq_entry_max: sq_max,
        symmetry_defect: sym,
    })
}

/// `U diag((lambda - z)^(-power)) U^T` in complex arithmetic via two real
/// matrix products.
fn complex_congruence(u: &Array2<f64>, lambdas: &[f64], z: Cplx, power: i32) -> Array2<Cplx> {
    let m = u.nrows();
    let mut re_scaled = u.to_owned();
    let mut im_scaled = u.to_owned();
    for (k, &l) in lambdas.iter().enumerate() {
        let d = (Cplx::new(l, 0.0) - z).inv().powi(power);
        re_scaled.column_mut(k).mapv_inplace(|v| v * d.re);
        im_scaled.column_mut(k).mapv_inplace(|v| v * d.im);
    }
    let g_re = re_scaled.dot(&u.t());
    let g_im = im_scaled.dot(&u.t());
    let mut g = Array2::<Cplx>::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            g[[i, j]] = Cplx::new(g_re[[i, j]], g_im[[i, j]]);
        }
    }
    g
}

/// Monte Carlo means of `F(N eta0 Im m_2N(E + i eta0))` under two ensembles.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub mean_a: f64,
    pub se_a: f64,
    pub mean_b: f64,
    pub se_b: f64,
}

impl ComparisonReport {
    pub fn diff(&self) -> f64 {
        self.mean_a - self.mean_b
    }

    pub fn combined_se(&self) -> f64 {
        (self.se_a * self.se_a + self.se_b * self.se_b).sqrt()
    }
}

/// Smoothed edge comparison statistic between two collections of draws.
pub fn green_comparison_statistic<F: Fn(f64) -> f64>(
    samples_a: &[SpectralSample],
    samples_b: &[SpectralSample],
    e: f64,
    eta0: f64,
    f: F,
) -> Result<ComparisonReport> {
    let stat = |s: &SpectralSample| -> Result<f64> {
        let z = Cplx::new(e, eta0);
        let m2n = m2n_of_h_sample(s, z)?;
        Ok(f(s.meta.n as f64 * eta0 * m2n.im))
    };
    let a: Result<Vec<f64>> = samples_a.iter().map(stat).collect();
    let b: Result<Vec<f64>> = samples_b.iter().map(stat).collect();
    let (a, b) = (a?, b?);
    let summarize = |v: &[f64]| -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    };
    let (mean_a, se_a) = summarize(&a);
    let (mean_b, se_b) = summarize(&b);
    Ok(ComparisonReport { mean_a, se_a, mean_b, se_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{companion_spectrum, h_spectrum};
    use crate::sampling::{assemble_x, CalibrationCache, Sampler, SamplerSpec};

    fn random_x(m: usize, n: usize, seed: u64) -> Array2<f64> {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::gaussian(m), &cache).unwrap();
        assemble_x(&sampler, n, seed).unwrap().x
    }

    /// Dense complex inversion by Gauss-Jordan; the small-instance oracle.
    fn invert_complex(a: &Array2<Cplx>) -> Array2<Cplx> {
        let n = a.nrows();
        let mut aug = Array2::<Cplx>::zeros((n, 2 * n));
        for i in 0..n {
            for j in 0..n {
                aug[[i, j]] = a[[i, j]];
            }
            aug[[i, n + i]] = Cplx::new(1.0, 0.0);
        }
        for col in 0..n {
            let mut piv = col;
            let mut best = aug[[col, col]].norm();
            for r in (col + 1)..n {
                if aug[[r, col]].norm() > best {
                    best = aug[[r, col]].norm();
                    piv = r;
                }
            }
            if piv != col {
                for j in 0..2 * n {
                    let tmp = aug[[col, j]];
                    aug[[col, j]] = aug[[piv, j]];
                    aug[[piv, j]] = tmp;
                }
            }
            let inv = aug[[col, col]].inv();
            for j in 0..2 * n {
                aug[[col, j]] *= inv;
            }
            for r in 0..n {
                if r != col {
                    let f = aug[[r, col]];
                    if f.norm() > 0.0 {
                        for j in 0..2 * n {
                            let v = aug[[col, j]];
                            aug[[r, j]] -= f * v;
                        }
                    }
                }
            }
        }
        let mut out = Array2::<Cplx>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = aug[[i, n + j]];
            }
        }
        out
    }

    fn complex_resolvent_of(mat: &Array2<f64>, z: Cplx) -> Array2<Cplx> {
        let n = mat.nrows();
        let mut a = Array2::<Cplx>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = Cplx::new(mat[[i, j]], 0.0);
            }
            a[[i, i]] -= z;
        }
        invert_complex(&a)
    }

    #[test]
    fn single_eigenvalue_closed_form() {
        let s = SpectralSample {
            eigenvalues: vec![1.0],
            meta: SampleMeta::new(1, 1, 0),
        };
        let v = empirical_stieltjes(&s, Cplx::new(0.0, 1.0)).unwrap();
        assert!((v - Cplx::new(0.5, 0.5)).norm() < 1e-15);
        assert!(empirical_stieltjes(&s, Cplx::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn zero_padding_contributes_inverse_z() {
        let h = SpectralSample { eigenvalues: vec![2.0, 1.0], meta: SampleMeta::new(2, 4, 0) };
        let z = Cplx::new(0.3, 0.7);
        let got = m2n_of_h_sample(&h, z).unwrap();
        let want = ((Cplx::new(2.0, 0.) - z).inv() + (Cplx::new(1.0, 0.) - z).inv()
            - 2.0 * z.inv())
            / 4.0;
        assert!((got - want).norm() < 1e-15);
        let c = companion_spectrum(&h, 4);
        let via_companion = empirical_stieltjes(&c, z).unwrap();
        assert!((got - via_companion).norm() < 1e-15);
    }

    #[test]
    fn trace_matches_dense_inversion_oracle() {
        for seed in 0..50 {
            let (m, n) = (3 + (seed as usize % 4), 6 + (seed as usize % 5));
            let x = random_x(m, n, 500 + seed);
            let basis = ResolventBasis::new(x.clone(), 500 + seed).unwrap();
            let z = Cplx::new(0.8 + 0.01 * seed as f64, 0.35);
            let m2n = m2n_of_h_sample(basis.h_sample(), z).unwrap();
            let mut gram = x.t().dot(&x);
            linalg::symmetrize(&mut gram);
            let res = complex_resolvent_of(&gram, z);
            let trace: Cplx = (0..n).map(|i| res[[i, i]]).sum();
            assert!(
                (m2n - trace / n as f64).norm() < 1e-11,
                "seed {seed}: {m2n} vs {}",
                trace / n as f64
            );
        }
    }

    #[test]
    fn resolvent_entries_match_dense_inversion() {
        let (m, n) = (4, 7);
        let x = random_x(m, n, 77);
        let basis = ResolventBasis::new(x.clone(), 77).unwrap();
        let z = Cplx::new(1.2, 0.4);
        let subset: Vec<usize> = (0..n).collect();
        let g = basis.companion_resolvent_entries(z, &subset).unwrap();
        let mut gram = x.t().dot(&x);
        linalg::symmetrize(&mut gram);
        let oracle = complex_resolvent_of(&gram, z);
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (g[[i, j]] - oracle[[i, j]]).norm() < 1e-11,
                    "({i},{j}): {} vs {}",
                    g[[i, j]],
                    oracle[[i, j]]
                );
            }
        }
    }

    #[test]
    fn wide_matrix_resolvent_entries() {
        let (m, n) = (7, 4);
        let x = random_x(m, n, 78);
        let basis = ResolventBasis::new(x.clone(), 78).unwrap();
        let z = Cplx::new(0.9, 0.3);
        let subset: Vec<usize> = (0..n).collect();
        let g = basis.companion_resolvent_entries(z, &subset).unwrap();
        let mut gram = x.t().dot(&x);
        linalg::symmetrize(&mut gram);
        let oracle = complex_resolvent_of(&gram, z);
        for i in 0..n {
            for j in 0..n {
                assert!((g[[i, j]] - oracle[[i, j]]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn degenerate_single_column() {
        // M = N = 1: the trace residual is |1/(lambda - z) - m2| exactly.
        let x = random_x(1, 1, 5);
        let basis = ResolventBasis::new(x.clone(), 5).unwrap();
        let lam = basis.h_sample().eigenvalues[0];
        let model = MpModel::from_ratio(0.9999).unwrap();
        let z = Cplx::new(1.0, 0.5);
        let m2n = m2n_of_h_sample(basis.h_sample(), z).unwrap();
        let direct = (Cplx::new(lam, 0.0) - z).inv();
        assert!((m2n - direct).norm() < 1e-15);
        let m2 = model.stieltjes(z).unwrap().m2;
        assert!(((m2n - m2).norm() - (direct - m2).norm()).abs() < 1e-15);
    }

    #[test]
    fn local_law_scan_small_ensemble() {
        let model = MpModel::from_ratio(0.5).unwrap();
        let n = 256;
        let grid = SpectralDomainGrid::standard(&model, n, 0.1, 8, 7).unwrap();
        let cap = (n as f64).powf(0.1);
        let mut total = 0usize;
        let mut pass = 0usize;
        let mut entry_ratios = Vec::new();
        for seed in 0..8 {
            let x = random_x(n / 2, n, 900 + seed);
            let basis = ResolventBasis::new(x, 900 + seed).unwrap();
            let probe = local_law_scan(&basis, &model, &grid, seed).unwrap();
            for p in &probe.points {
                assert!(p.m2n.im > 0.0);
                total += 1;
                if p.residual / p.budget <= cap {
                    pass += 1;
                }
                entry_ratios.push(p.entrywise_max.unwrap() / p.entrywise_budget.unwrap());
            }
        }
        assert!(pass as f64 >= 0.95 * total as f64, "pass {pass}/{total}");
        // entrywise deviations: the max over a 32x32 block inflates the
        // typical size, so check the distribution rather than every point
        entry_ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = entry_ratios[entry_ratios.len() / 2];
        let worst = *entry_ratios.last().unwrap();
        assert!(median <= cap, "median entrywise ratio {median}");
        assert!(worst <= (n as f64).powf(0.5), "worst entrywise ratio {worst}");
    }

    #[test]
    fn refined_edge_budget_formulas() {
        let model = MpModel::from_ratio(0.5).unwrap();
        let n = 512;
        let x = random_x(256, n, 31);
        let s = h_spectrum(&x, SampleMeta::new(256, n, 31)).unwrap();
        // kappa = 0 reduces to 1/(N eta) + 1/((N eta)^2 sqrt(eta))
        let eta = 0.05;
        let (_, b0) = edge_refined_residual(&s, &model, model.lambda_plus(), eta).unwrap();
        let n_f = n as f64;
        let expect = 1.0 / (n_f * eta) + 1.0 / ((n_f * eta).powi(2) * eta.sqrt());
        assert!((b0 - expect).abs() < 1e-15);
        // far from the edge the refined budget beats the bulk 1/(N eta)
        let eta = n_f.powf(-0.4);
        let (_, refined) = edge_refined_residual(&s, &model, model.lambda_plus() + 1.0, eta).unwrap();
        assert!(refined < 1.0 / (n_f * eta));
        assert!(edge_refined_residual(&s, &model, model.lambda_plus() - 0.5, eta).is_err());
    }

    #[test]
    fn regularity_of_exact_reference_law() {
        let model = MpModel::from_ratio(0.5).unwrap();
        let m_fn = |z: Cplx| model.stieltjes(z).unwrap().m1;
        let eta_star = 512f64.powf(-0.6);
        let report = eta_star_regularity(m_fn, model.lambda_plus(), eta_star, 0.05, 10.0);
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn regularity_fails_for_shifted_spectrum() {
        let x = random_x(128, 256, 41);
        let mut s = h_spectrum(&x, SampleMeta::new(128, 256, 41)).unwrap();
        for v in s.eigenvalues.iter_mut() {
            *v += 10.0;
        }
        let lam1 = s.largest();
        let m_fn = sample_m_fn(&s);
        let report = eta_star_regularity(m_fn, lam1, 256f64.powf(-0.6), 0.05, 10.0);
        assert!(!report.pass_scale, "{report:?}");
    }

    #[test]
    fn regularity_of_moderate_draw() {
        let n = 256;
        let mut passes = 0;
        let trials = 10;
        for seed in 0..trials {
            let x = random_x(n / 2, n, 1_300 + seed);
            let s = h_spectrum(&x, SampleMeta::new(n / 2, n, 1_300 + seed)).unwrap();
            let lam1 = s.largest();
            let m_fn = sample_m_fn(&s);
            let report = eta_star_regularity(m_fn, lam1, (n as f64).powf(-0.6), 0.05, 10.0);
            if report.pass() {
                passes += 1;
            }
        }
        assert!(passes >= trials - 1, "only {passes}/{trials} draws were edge-regular");
    }

    #[test]
    fn edge_bounds_match_two_by_two_inversion() {
        let x = random_x(2, 2, 51);
        let model = MpModel::from_ratio(0.999).unwrap();
        let e = model.lambda_plus();
        let b = edge_green_bounds(&x, &model, e, 0.1, 51).unwrap();
        // direct oracle on the 2x2 minor
        let minor = x.slice(ndarray::s![.., 1..]).to_owned();
        let h1 = crate::ensemble::assemble_h(&minor);
        let g = complex_resolvent_of(&h1, b.z);
        let g2 = {
            let mut out = Array2::<Cplx>::zeros((2, 2));
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = Cplx::new(0.0, 0.0);
                    for k in 0..2 {
                        acc += g[[i, k]] * g[[k, j]];
                    }
                    out[[i, j]] = acc;
                }
            }
            out
        };
        let x1 = x.column(0);
        let mut q = Cplx::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                q += Cplx::new(x1[i] * x1[j], 0.0) * g2[[i, j]];
            }
        }
        assert!((b.q_form - q.norm()).abs() < 1e-12);
        let m1 = model.stieltjes(b.z).unwrap().m1;
        let diag_dev = (g[[0, 0]] - m1).norm().max((g[[1, 1]] - m1).norm());
        assert!((b.diag_dev - diag_dev).abs() < 1e-12);
        assert!((b.offdiag_max - g[[0, 1]].norm().max(g[[1, 0]].norm())).abs() < 1e-12);
        let sq_max = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| g2[[i, j]].norm())
            .fold(0.0f64, f64::max);
        assert!((b.sq_entry_max - sq_max).abs() < 1e-11);
        assert!(b.symmetry_defect < 1e-12);
    }

    #[test]
    fn edge_bounds_scale_for_moderate_draw() {
        let n = 256;
        let model = MpModel::from_ratio(0.5).unwrap();
        let mut pass_q = 0;
        let trials = 10;
        for seed in 0..trials {
            let x = random_x(n / 2, n, 700 + seed);
            let b = edge_green_bounds(&x, &model, model.lambda_plus(), 0.1, 700 + seed).unwrap();
            let n_f = n as f64;
            if b.q_form / n_f.powf(1.0 / 3.0) <= n_f.powf(0.15) {
                pass_q += 1;
            }
            assert!(b.symmetry_defect < 1e-12);
        }
        assert!(pass_q >= 8, "q-form bound held in only {pass_q}/{trials} trials");
    }

    #[test]
    fn comparison_statistic_basics() {
        let model = MpModel::from_ratio(0.5).unwrap();
        let n = 128;
        let samples: Vec<SpectralSample> = (0..40)
            .map(|seed| {
                let x = random_x(n / 2, n, 2_000 + seed);
                h_spectrum(&x, SampleMeta::new(n / 2, n, 2_000 + seed)).unwrap()
            })
            .collect();
        let eta0 = (n as f64).powf(-2.0 / 3.0 - 0.1);
        let e = model.lambda_plus();
        // F identically one: difference is exactly zero
        let r = green_comparison_statistic(&samples, &samples, e, eta0, |_| 1.0).unwrap();
        assert_eq!(r.diff(), 0.0);
        assert_eq!(r.se_a, 0.0);
        // identical ensembles, F(x) = x: zero difference and positive spread
        let r = green_comparison_statistic(&samples, &samples, e, eta0, |x| x).unwrap();
        assert_eq!(r.diff(), 0.0);
        assert!(r.se_a > 0.0);
        // two disjoint gaussian batches agree within noise
        let other: Vec<SpectralSample> = (0..40)
            .map(|seed| {
                let x = random_x(n / 2, n, 9_000 + seed);
                h_spectrum(&x, SampleMeta::new(n / 2, n, 9_000 + seed)).unwrap()
            })
            .collect();
        let r = green_comparison_statistic(&samples, &other, e, eta0, |x| x).unwrap();
        assert!(r.diff().abs() <= 4.0 * r.combined_se(), "{r:?}");
    }

    #[test]
    fn grid_is_inside_domain() {
        let model = MpModel::from_ratio(0.5).unwrap();
        let grid = SpectralDomainGrid::standard(&model, 1024, 0.1, 16, 14).unwrap();
        assert!(grid.points.len() >= 200);
        for &z in &grid.points {
            assert!(grid.contains(&model, z));
        }
    }
}
