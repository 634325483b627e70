//! Covariance-matrix assembly and dense spectra.
//!
//! `H = X Xᵀ` and its rank-`r` spiked deformation `Q = T X Xᵀ Tᵀ` with
//! `T = diag(√(1+d₁), …, √(1+d_r), 1, …)`. Spectra are computed from the
//! smaller of `X Xᵀ` and `Xᵀ X` and mapped to the other side, since the two
//! share their nonzero eigenvalues.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg;
use crate::seeding;

/// Largest admissible number of spikes.
pub const MAX_SPIKES: usize = 16;

/// Negative eigenvalues above this magnitude are hard errors; smaller ones
/// are clamped to zero and counted.
pub const PSD_CLAMP: f64 = 1e-10;

/// A validated list of spike strengths, sorted descending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpikeList {
    d: Vec<f64>,
}

impl SpikeList {
    pub fn new(mut d: Vec<f64>) -> Result<Self> {
        if d.len() > MAX_SPIKES {
            return Err(Error::domain(format!(
                "at most {MAX_SPIKES} spikes supported, got {}",
                d.len()
            )));
        }
        if d.iter().any(|v| !v.is_finite() || *v <= -1.0) {
            return Err(Error::domain(
                "spike strengths must be finite and > -1 so the population covariance stays PSD",
            ));
        }
        d.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(SpikeList { d })
    }

    pub fn empty() -> Self {
        SpikeList::default()
    }

    pub fn strengths(&self) -> &[f64] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Checks the conditions outlier-fluctuation experiments rely on:
    /// every spike clears the detection threshold by `eps` and consecutive
    /// spikes are separated by more than `N^{-1/2+eps}`.
    pub fn validate_for_fluctuations(&self, y: f64, n: usize, eps: f64) -> Result<()> {
        let threshold = y.sqrt() + eps;
        if let Some(&weakest) = self.d.last() {
            if weakest <= threshold {
                return Err(Error::domain(format!(
                    "spike {weakest} does not clear the detection threshold sqrt(y)+eps = {threshold}"
                )));
            }
        }
        let min_gap = (n as f64).powf(-0.5 + eps);
        for w in self.d.windows(2) {
            if w[0] - w[1] <= min_gap {
                return Err(Error::domain(format!(
                    "spike gap {} below the resolvable separation {min_gap}",
                    w[0] - w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Provenance of one spectrum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleMeta {
    pub m: usize,
    pub n: usize,
    pub t: Option<f64>,
    pub spikes: Vec<f64>,
    pub seed: u64,
    /// Number of tiny negative eigenvalues clamped to zero.
    pub clamped: usize,
}

impl SampleMeta {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        SampleMeta { m, n, seed, ..Default::default() }
    }
}

/// A full spectrum in descending order plus provenance.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub eigenvalues: Vec<f64>,
    pub meta: SampleMeta,
}

impl SpectralSample {
    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// `H = X Xᵀ`, exactly symmetrized after the product.
pub fn assemble_h(x: &Array2<f64>) -> Array2<f64> {
    linalg::pin_blas_single_thread();
    let mut h = x.dot(&x.t());
    linalg::symmetrize(&mut h);
    h
}

/// Spiked covariance `Q = T X Xᵀ Tᵀ` with diagonal `T = Σ^{1/2}`.
pub fn assemble_spiked(x: &Array2<f64>, spikes: &SpikeList) -> Result<Array2<f64>> {
    let m = x.nrows();
    if spikes.len() > m {
        return Err(Error::Matrix(format!(
            "{} spikes do not fit a {m}-dimensional population",
            spikes.len()
        )));
    }
    let mut q = assemble_h(x);
    let mut t = vec![1.0; m];
    for (i, &d) in spikes.strengths().iter().enumerate() {
        t[i] = (1.0 + d).sqrt();
    }
    for i in 0..m {
        for j in 0..m {
            q[[i, j]] *= t[i] * t[j];
        }
    }
    Ok(q)
}

/// All eigenvalues of a symmetric matrix, descending, with PSD clamping and
/// a residual spot check `‖Av − λv‖ ≤ 1e−9 ‖A‖` on five random eigenpairs.
pub fn spectrum(a: &Array2<f64>, mut meta: SampleMeta) -> Result<SpectralSample> {
    if a.nrows() != a.ncols() {
        return Err(Error::Matrix("spectrum needs a square matrix".into()));
    }
    let (ev, vectors) = linalg::sym_eigen(a, meta.seed)?;
    let scale = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let mut rng = seeding::rng_from(seeding::derive(meta.seed, 0x5bec));
    let dim = a.nrows();
    for _ in 0..5usize.min(dim) {
        use rand::Rng;
        let k = rng.random_range(0..dim);
        let v = vectors.column(k);
        let av = a.dot(&v);
        let res: f64 = av
            .iter()
            .zip(v.iter())
            .map(|(&avi, &vi)| {
                let r = avi - ev[k] * vi;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        if res > 1e-9 * scale {
            return Err(Error::Numerical(format!(
                "eigenpair residual {res:e} exceeds 1e-9 * {scale:e} (seed {})",
                meta.seed
            )));
        }
    }
    let eigenvalues = descending_clamped(ev, &mut meta)?;
    Ok(SpectralSample { eigenvalues, meta })
}

/// Eigenvalues only (no residual verification); the fast path for
/// high-trial-count experiments.
pub fn spectrum_fast(a: &Array2<f64>, mut meta: SampleMeta) -> Result<SpectralSample> {
    if a.nrows() != a.ncols() {
        return Err(Error::Matrix("spectrum needs a square matrix".into()));
    }
    let ev = linalg::sym_eigenvalues(a, meta.seed)?;
    let eigenvalues = descending_clamped(ev, &mut meta)?;
    Ok(SpectralSample { eigenvalues, meta })
}

fn descending_clamped(mut ev: Vec<f64>, meta: &mut SampleMeta) -> Result<Vec<f64>> {
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut clamped = 0usize;
    for v in ev.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_CLAMP {
                return Err(Error::Matrix(format!(
                    "eigenvalue {v} below the PSD tolerance -{PSD_CLAMP:e} (seed {})",
                    meta.seed
                )));
            }
            *v = 0.0;
            clamped += 1;
        }
    }
    meta.clamped += clamped;
    Ok(ev)
}

/// Spectrum of `H = X Xᵀ`, computed on the smaller of the two Gram matrices.
pub fn h_spectrum(x: &Array2<f64>, meta: SampleMeta) -> Result<SpectralSample> {
    let (m, n) = x.dim();
    if m <= n {
        spectrum_fast(&assemble_h(x), meta)
    } else {
        linalg::pin_blas_single_thread();
        let mut small = x.t().dot(x);
        linalg::symmetrize(&mut small);
        let companion = spectrum_fast(&small, meta)?;
        // nonzero spectrum shared; pad with M - N exact zeros
        let mut eigenvalues = companion.eigenvalues;
        eigenvalues.resize(m, 0.0);
        Ok(SpectralSample { eigenvalues, meta: companion.meta })
    }
}

/// Spectrum of the companion Gram matrix `Xᵀ X` (length `N`), derived from
/// the `H` spectrum: same nonzero eigenvalues, zero-padded or truncated.
pub fn companion_spectrum(sample: &SpectralSample, n: usize) -> SpectralSample {
    let mut eigenvalues = sample.eigenvalues.clone();
    eigenvalues.resize(n, 0.0);
    SpectralSample { eigenvalues, meta: sample.meta.clone() }
}
