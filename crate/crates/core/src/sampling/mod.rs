//! Samplers for unconditional isotropic log-concave column vectors, matrix
//! assembly with per-column RNG substreams, and the Gaussian interpolation.

mod calibration;
mod hit_and_run;
mod lp_ball;

pub use calibration::{pilot_lp_constant, CalibrationCache, CalibrationRecord, DEFAULT_PILOT_COLUMNS};
pub use hit_and_run::HitAndRunChain;
pub use lp_ball::lp_ball_raw;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeding;

/// Validated ℓp exponent: finite `p ≥ 1` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpExponent(f64);

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Sampler(format!("lp exponent must satisfy p >= 1, got {p}")));
        }
        Ok(LpExponent(p))
    }

    pub const INFINITY: LpExponent = LpExponent(f64::INFINITY);

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Convex body for the MCMC sampler; origin-symmetric and unconditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodySpec {
    /// Unit ℓp ball; `p = ∞` is the cube `[-1, 1]^M`.
    LpBall { p: f64 },
}

/// The family a column is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerKind {
    /// Standard normal coordinates.
    Gaussian,
    /// i.i.d. symmetric exponential coordinates scaled to unit variance.
    LaplaceProduct,
    /// Uniform on the ℓp ball, rescaled to isotropy (finite `p ≥ 1`).
    LpBall { p: f64 },
    /// Hit-and-run chain on a convex body, sign-symmetrized and rescaled.
    ConvexBodyHitAndRun { body: BodySpec, burn_in: usize, thinning: usize },
}

/// Full description of a column law.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub dimension: usize,
}

/// Minimum admissible burn-in per dimension for the MCMC sampler.
pub const BURN_IN_FLOOR_FACTOR: usize = 10;

impl SamplerSpec {
    pub fn gaussian(dimension: usize) -> Self {
        SamplerSpec { kind: SamplerKind::Gaussian, dimension }
    }

    pub fn laplace(dimension: usize) -> Self {
        SamplerSpec { kind: SamplerKind::LaplaceProduct, dimension }
    }

    pub fn lp_ball(p: f64, dimension: usize) -> Self {
        SamplerSpec { kind: SamplerKind::LpBall { p }, dimension }
    }

    /// Hit-and-run with the standard mixing budget (burn-in `50·M`,
    /// thinning `10·M`).
    pub fn hit_and_run(body: BodySpec, dimension: usize) -> Self {
        SamplerSpec {
            kind: SamplerKind::ConvexBodyHitAndRun {
                body,
                burn_in: 50 * dimension,
                thinning: 10 * dimension,
            },
            dimension,
        }
    }

    /// Short label used in cache/report rows.
    pub fn label(&self) -> String {
        match &self.kind {
            SamplerKind::Gaussian => "gaussian".into(),
            SamplerKind::LaplaceProduct => "laplace_product".into(),
            SamplerKind::LpBall { p } => format!("lp_ball(p={p})"),
            SamplerKind::ConvexBodyHitAndRun { body: BodySpec::LpBall { p }, .. } => {
                format!("hit_and_run(lp={p})")
            }
        }
    }
}

/// A sampler with its isotropy constant resolved; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    scale: f64,
}

impl Sampler {
    /// Validates the spec and resolves the calibration constant.
    pub fn prepare(spec: SamplerSpec, cache: &CalibrationCache) -> Result<Self> {
        if spec.dimension == 0 {
            return Err(Error::Sampler("dimension must be positive".into()));
        }
        let scale = match &spec.kind {
            SamplerKind::Gaussian => 1.0,
            // Laplace(b) has variance 2b²
            SamplerKind::LaplaceProduct => std::f64::consts::FRAC_1_SQRT_2,
            SamplerKind::LpBall { p } => {
                LpExponent::new(*p)?;
                if !p.is_finite() {
                    return Err(Error::Sampler(
                        "lp_ball requires finite p; use a hit-and-run cube body for p = inf".into(),
                    ));
                }
                cache.lp_constant(*p, spec.dimension)?
            }
            SamplerKind::ConvexBodyHitAndRun { body, burn_in, .. } => {
                let BodySpec::LpBall { p } = *body;
                LpExponent::new(p)?;
                let floor = BURN_IN_FLOOR_FACTOR * spec.dimension;
                if *burn_in < floor {
                    return Err(Error::Sampler(format!(
                        "burn_in {burn_in} below the mixing floor {floor} for dimension {}",
                        spec.dimension
                    )));
                }
                cache.lp_constant(p, spec.dimension)?
            }
        };
        Ok(Sampler { spec, scale })
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// One unscaled isotropic draw `q` (unit covariance).
    pub fn column<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.spec.dimension;
        match &self.spec.kind {
            SamplerKind::Gaussian => (0..m).map(|_| StandardNormal.sample(rng)).collect(),
            SamplerKind::LaplaceProduct => (0..m)
                .map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    let signed = if rng.random::<bool>() { e } else { -e };
                    signed * self.scale
                })
                .collect(),
            SamplerKind::LpBall { p } => {
                let mut u = lp_ball_raw(*p, m, rng).expect("validated exponent");
                for v in &mut u {
                    *v *= self.scale;
                }
                u
            }
            SamplerKind::ConvexBodyHitAndRun { body, burn_in, .. } => {
                let mut chain = HitAndRunChain::new(*body, m);
                chain.run(*burn_in, rng);
                let mut q: Vec<f64> = chain.state().to_vec();
                // sign symmetrization enforces unconditionality exactly
                for v in &mut q {
                    if rng.random::<bool>() {
                        *v = -*v;
                    }
                    *v *= self.scale;
                }
                q
            }
        }
    }

    /// `count` chain samples spaced by the configured thinning, for moment
    /// diagnostics of the MCMC kind. Exact kinds just draw independently.
    pub fn chain_samples<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        match &self.spec.kind {
            SamplerKind::ConvexBodyHitAndRun { body, burn_in, thinning } => {
                let m = self.spec.dimension;
                let mut chain = HitAndRunChain::new(*body, m);
                chain.run(*burn_in, rng);
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    chain.run((*thinning).max(1), rng);
                    let mut q: Vec<f64> = chain.state().to_vec();
                    for v in &mut q {
                        if rng.random::<bool>() {
                            *v = -*v;
                        }
                        *v *= self.scale;
                    }
                    out.push(q);
                }
                out
            }
            _ => (0..count).map(|_| self.column(rng)).collect(),
        }
    }
}

/// An assembled data matrix `X` with columns `q_j/√N`.
#[derive(Debug, Clone)]
pub struct MatrixDraw {
    pub x: Array2<f64>,
    pub seed: u64,
    pub spec: SamplerSpec,
}

impl MatrixDraw {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn columns(&self) -> usize {
        self.x.ncols()
    }
}

/// Assembles the `M × N` matrix from `N` independent per-column substreams.
/// (spec, n, seed) determines the result bit-for-bit regardless of thread
/// count or scheduling.
pub fn assemble_x(sampler: &Sampler, n: usize, seed: u64) -> Result<MatrixDraw> {
    if n == 0 {
        return Err(Error::Sampler("column count must be positive".into()));
    }
    let m = sampler.dimension();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = seeding::column_rng(seed, j as u64);
            let mut q = sampler.column(&mut rng);
            for v in &mut q {
                *v *= inv_sqrt_n;
            }
            q
        })
        .collect();
    let mut x = Array2::<f64>::zeros((m, n));
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    Ok(MatrixDraw { x, seed, spec: sampler.spec().clone() })
}

/// Gaussian interpolation `√(1−t)·X + √t·X_w`. `t = 0` and `t = 1` return
/// exact copies of the endpoints.
pub fn interpolate(x: &Array2<f64>, xw: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
    if x.dim() != xw.dim() {
        return Err(Error::Matrix(format!(
            "shape mismatch: {:?} vs {:?}",
            x.dim(),
            xw.dim()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("interpolation time must lie in [0,1], got {t}")));
    }
    if t == 0.0 {
        return Ok(x.clone());
    }
    if t == 1.0 {
        return Ok(xw.clone());
    }
    let a = (1.0 - t).sqrt();
    let b = t.sqrt();
    Ok(a * x + b * xw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;

    fn mean_and_se(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn gaussian_covariance_is_identity() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::gaussian(3), &cache).unwrap();
        let mut rng = seeding::rng_from(21);
        let n = 1_000_000;
        let mut cov = [[0.0f64; 3]; 3];
        for _ in 0..n {
            let q = sampler.column(&mut rng);
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += q[i] * q[j];
                }
            }
        }
        for (i, row) in cov.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let v = v / n as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 0.01, "cov[{i}][{j}] = {v}");
            }
        }
    }

    #[test]
    fn laplace_unit_variance_and_heavy_kurtosis() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::laplace(1), &cache).unwrap();
        let mut rng = seeding::rng_from(22);
        let n = 400_000;
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for _ in 0..n {
            let q = sampler.column(&mut rng)[0];
            m2 += q * q;
            m4 += q * q * q * q;
        }
        m2 /= n as f64;
        m4 /= n as f64;
        assert!((m2 - 1.0).abs() < 0.01, "variance {m2}");
        assert!((m4 - 6.0).abs() < 0.25, "fourth moment {m4}");
    }

    #[test]
    fn l1_ball_calibrated_to_unit_variance() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::lp_ball(1.0, 2), &cache).unwrap();
        let mut rng = seeding::rng_from(23);
        let n = 300_000;
        let mut m2 = 0.0;
        for _ in 0..n {
            let q = sampler.column(&mut rng);
            m2 += q[0] * q[0];
        }
        m2 /= n as f64;
        assert!((0.99..=1.01).contains(&m2), "calibrated variance {m2}");
    }

    #[test]
    fn odd_moments_vanish_for_every_kind() {
        let cache = CalibrationCache::in_memory();
        let specs = [
            SamplerSpec::gaussian(4),
            SamplerSpec::laplace(4),
            SamplerSpec::lp_ball(1.0, 4),
            SamplerSpec::lp_ball(2.0, 4),
            SamplerSpec::hit_and_run(BodySpec::LpBall { p: f64::INFINITY }, 4),
        ];
        for spec in specs {
            let label = spec.label();
            let sampler = Sampler::prepare(spec, &cache).unwrap();
            let mut rng = seeding::rng_from(24);
            let count = if matches!(sampler.spec().kind, SamplerKind::ConvexBodyHitAndRun { .. }) {
                4_000
            } else {
                60_000
            };
            let draws = sampler.chain_samples(count, &mut rng);
            for (name, f) in [
                ("q1", (|q: &Vec<f64>| q[0]) as fn(&Vec<f64>) -> f64),
                ("q1^3", |q| q[0] * q[0] * q[0]),
                ("q1*q2^2", |q| q[0] * q[1] * q[1]),
            ] {
                let vals: Vec<f64> = draws.iter().map(f).collect();
                let (mean, se) = mean_and_se(&vals);
                assert!(
                    mean.abs() <= 4.0 * se.max(1e-9),
                    "{label}: odd moment {name} = {mean} (se {se})"
                );
            }
        }
    }

    #[test]
    fn hit_and_run_l2_body_is_isotropic() {
        let cache = CalibrationCache::in_memory();
        let spec = SamplerSpec::hit_and_run(BodySpec::LpBall { p: 2.0 }, 4);
        let sampler = Sampler::prepare(spec, &cache).unwrap();
        let mut rng = seeding::rng_from(25);
        let draws = sampler.chain_samples(4_000, &mut rng);
        let vals: Vec<f64> = draws.iter().map(|q| q[0] * q[0]).collect();
        let (mean, se) = mean_and_se(&vals);
        assert!((mean - 1.0).abs() < 5.0 * se + 0.02, "E q1^2 = {mean} (se {se})");
        let cross: Vec<f64> = draws.iter().map(|q| q[0] * q[1]).collect();
        let (mean_c, se_c) = mean_and_se(&cross);
        assert!(mean_c.abs() < 5.0 * se_c + 0.02);
    }

    #[test]
    fn mcmc_rejects_small_burn_in() {
        let cache = CalibrationCache::in_memory();
        let spec = SamplerSpec {
            kind: SamplerKind::ConvexBodyHitAndRun {
                body: BodySpec::LpBall { p: 2.0 },
                burn_in: 5,
                thinning: 1,
            },
            dimension: 8,
        };
        assert!(Sampler::prepare(spec, &cache).is_err());
    }

    #[test]
    fn assemble_is_deterministic_and_seed_sensitive() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::gaussian(6), &cache).unwrap();
        let a = assemble_x(&sampler, 9, 42).unwrap();
        let b = assemble_x(&sampler, 9, 42).unwrap();
        assert_eq!(a.x, b.x);
        let c = assemble_x(&sampler, 9, 43).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn assembled_entries_have_variance_one_over_n() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::gaussian(32), &cache).unwrap();
        let n = 64;
        let mut acc = 0.0;
        let mut count = 0usize;
        for seed in 0..40 {
            let draw = assemble_x(&sampler, n, seed).unwrap();
            acc += draw.x.iter().map(|v| v * v).sum::<f64>();
            count += draw.x.len();
        }
        let var = acc / count as f64;
        assert!((var - 1.0 / n as f64).abs() < 0.02 / n as f64, "entry variance {var}");
    }

    #[test]
    fn interpolation_endpoints_are_exact() {
        let cache = CalibrationCache::in_memory();
        let sampler = Sampler::prepare(SamplerSpec::laplace(5), &cache).unwrap();
        let x = assemble_x(&sampler, 7, 1).unwrap().x;
        let g = Sampler::prepare(SamplerSpec::gaussian(5), &cache).unwrap();
        let xw = assemble_x(&g, 7, 2).unwrap().x;
        assert_eq!(interpolate(&x, &xw, 0.0).unwrap(), x);
        assert_eq!(interpolate(&x, &xw, 1.0).unwrap(), xw);
        assert!(interpolate(&x, &xw, -0.1).is_err());
        assert!(interpolate(&x, &xw, 1.1).is_err());
        let mid = interpolate(&x, &xw, 0.5).unwrap();
        let expect = 0.5f64.sqrt() * &x + 0.5f64.sqrt() * &xw;
        assert_eq!(mid, expect);
    }

    #[test]
    fn interpolation_preserves_column_second_moment() {
        let cache = CalibrationCache::in_memory();
        let lap = Sampler::prepare(SamplerSpec::laplace(16), &cache).unwrap();
        let gauss = Sampler::prepare(SamplerSpec::gaussian(16), &cache).unwrap();
        let n = 256;
        let mut acc = 0.0;
        let trials = 60;
        for seed in 0..trials {
            let x = assemble_x(&lap, n, seed).unwrap().x;
            let xw = assemble_x(&gauss, n, 1_000 + seed).unwrap().x;
            let xt = interpolate(&x, &xw, 0.5).unwrap();
            // average squared column norm should stay M/N
            acc += xt.iter().map(|v| v * v).sum::<f64>() / n as f64;
        }
        let per_column = acc / trials as f64;
        let target = 16.0 / n as f64;
        assert!(
            (per_column - target).abs() < 0.03 * target,
            "column second moment {per_column} vs {target}"
        );
    }

    #[test]
    fn thin_shell_constant_is_small() {
        // Var(norm^2 of q/sqrt(N)) <= C*M/N^2 with C staying below 10.
        let cache = CalibrationCache::in_memory();
        for spec in [
            SamplerSpec::gaussian(64),
            SamplerSpec::laplace(64),
            SamplerSpec::lp_ball(1.0, 64),
            SamplerSpec::lp_ball(2.0, 64),
        ] {
            let label = spec.label();
            let m = spec.dimension;
            let n = 2 * m;
            let sampler = Sampler::prepare(spec, &cache).unwrap();
            let mut rng = seeding::rng_from(31);
            let draws = 40_000;
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for _ in 0..draws {
                let q = sampler.column(&mut rng);
                let y2: f64 = q.iter().map(|v| v * v).sum::<f64>() / n as f64;
                s1 += y2;
                s2 += y2 * y2;
            }
            let mean = s1 / draws as f64;
            let var = s2 / draws as f64 - mean * mean;
            let fitted_c = var * (n * n) as f64 / m as f64;
            assert!(fitted_c < 10.0, "{label}: thin shell constant {fitted_c}");
        }
    }
}
