//! Deterministic Marchenko–Pastur machinery.
//!
//! Everything here is a pure function of the aspect ratio `y = M/N`: spectral
//! edges, the two MP densities, their Stieltjes transforms `m₁`, `m₂` with
//! analytic derivatives, classical eigenvalue locations, and the
//! spiked-outlier location map `θ(d)`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::Cplx;

/// Which of the two MP laws: `One` is the law of the `M × M` spectrum,
/// `Two` the law of the `N × N` companion spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    One,
    Two,
}

/// Marchenko–Pastur reference model for a fixed aspect ratio.
#[derive(Debug, Clone)]
pub struct MpModel {
    y: f64,
    lambda_minus: f64,
    lambda_plus: f64,
    dims: Option<(usize, usize)>,
}

/// Spectral edges `((1−√y)², (1+√y)²)`.
pub fn edges(y: f64) -> Result<(f64, f64)> {
    if !y.is_finite() || y <= 0.0 {
        return Err(Error::domain(format!("aspect ratio y must be positive, got {y}")));
    }
    if y == 1.0 {
        return Err(Error::domain("aspect ratio y = 1 is excluded"));
    }
    let s = y.sqrt();
    Ok(((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)))
}

/// Outlier location `θ(d) = 1 + d + y + y/d`, defined for `d > √y`.
pub fn theta(d: f64, y: f64) -> Result<f64> {
    let (_, _) = edges(y)?;
    if d <= y.sqrt() {
        return Err(Error::domain(format!(
            "spike strength d = {d} must exceed the threshold sqrt(y) = {}",
            y.sqrt()
        )));
    }
    Ok(1.0 + d + y + y / d)
}

/// Evaluations of `m₁(z)`, `m₂(z)` at one spectral parameter.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesPair {
    pub z: Cplx,
    pub m1: Cplx,
    pub m2: Cplx,
}

impl MpModel {
    /// Model from an aspect ratio alone.
    pub fn from_ratio(y: f64) -> Result<Self> {
        let (lambda_minus, lambda_plus) = edges(y)?;
        Ok(MpModel { y, lambda_minus, lambda_plus, dims: None })
    }

    /// Model carrying the matrix dimensions, enabling classical locations.
    pub fn from_dims(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::domain("dimensions must be positive"));
        }
        let y = m as f64 / n as f64;
        let (lambda_minus, lambda_plus) = edges(y)?;
        Ok(MpModel { y, lambda_minus, lambda_plus, dims: Some((m, n)) })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.dims
    }

    /// Absolutely continuous density of the selected law at `x`. Zero outside
    /// `[λ₋, λ₊]`; the point mass at the origin is reported separately by
    /// [`MpModel::point_mass`], never folded in.
    pub fn density(&self, x: f64, law: Law) -> f64 {
        if x <= self.lambda_minus || x >= self.lambda_plus {
            return 0.0;
        }
        let root = ((self.lambda_plus - x) * (x - self.lambda_minus)).sqrt();
        match law {
            Law::One => root / (2.0 * std::f64::consts::PI * x * self.y),
            Law::Two => root / (2.0 * std::f64::consts::PI * x),
        }
    }

    /// Point mass at the origin: `(1 − 1/y)₊` for law one, `(1 − y)₊` for law two.
    pub fn point_mass(&self, law: Law) -> f64 {
        match law {
            Law::One => (1.0 - 1.0 / self.y).max(0.0),
            Law::Two => (1.0 - self.y).max(0.0),
        }
    }

    /// Stieltjes transforms at `z` in the upper half-plane.
    ///
    /// Both self-consistent quadratics are solved by the quadratic formula and
    /// the root with positive imaginary part is kept, which sidesteps any
    /// square-root branch convention.
    pub fn stieltjes(&self, z: Cplx) -> Result<StieltjesPair> {
        if !(z.im > 0.0) {
            return Err(Error::domain(format!("Im z must be positive, got {}", z.im)));
        }
        let y = self.y;
        let m1 = upper_half_root(z * y, z - (1.0 - y), Cplx::new(1.0, 0.0))?;
        let m2 = upper_half_root(z, z + (1.0 - y), Cplx::new(1.0, 0.0))?;
        Ok(StieltjesPair { z, m1, m2 })
    }

    /// Stieltjes transforms at a real spectral parameter strictly above the
    /// right edge, where both transforms are real.
    pub fn stieltjes_real(&self, x: f64) -> Result<(f64, f64)> {
        if x <= self.lambda_plus {
            return Err(Error::domain(format!(
                "real evaluation requires x > lambda_plus = {}, got {x}",
                self.lambda_plus
            )));
        }
        let y = self.y;
        let root = ((x - self.lambda_plus) * (x - self.lambda_minus)).sqrt();
        let m1 = (-(x - (1.0 - y)) + root) / (2.0 * x * y);
        let m2 = (-(x + (1.0 - y)) + root) / (2.0 * x);
        Ok((m1, m2))
    }

    /// Analytic derivative `m₁′(z)` by implicit differentiation of the
    /// defining quadratic.
    pub fn m1_prime(&self, z: Cplx, m1: Cplx) -> Cplx {
        let y = self.y;
        -(y * m1 * m1 + m1) / (2.0 * z * y * m1 + z - (1.0 - y))
    }

    /// Analytic derivative `m₂′(z)`.
    pub fn m2_prime(&self, z: Cplx, m2: Cplx) -> Cplx {
        let y = self.y;
        -(m2 * m2 + m2) / (2.0 * z * m2 + z + (1.0 - y))
    }

    /// Real-argument `m₂′(x)` above the right edge.
    pub fn m2_prime_real(&self, x: f64, m2: f64) -> f64 {
        let y = self.y;
        -(m2 * m2 + m2) / (2.0 * x * m2 + x + (1.0 - y))
    }

    /// Residuals of the two self-consistent quadratics at the given pair.
    pub fn self_consistent_residuals(&self, pair: &StieltjesPair) -> (f64, f64) {
        let y = self.y;
        let z = pair.z;
        let r1 = (z * y * pair.m1 * pair.m1 + (z - (1.0 - y)) * pair.m1 + 1.0).norm();
        let r2 = (z * pair.m2 * pair.m2 + (z + (1.0 - y)) * pair.m2 + 1.0).norm();
        (r1, r2)
    }

    /// Residuals of the three algebraic identities tying `m₁` and `m₂`
    /// together, derivatives taken analytically.
    pub fn identity_residuals(&self, pair: &StieltjesPair) -> [f64; 3] {
        let y = self.y;
        let z = pair.z;
        let m1 = pair.m1;
        let m2 = pair.m2;
        let r1 = (m1 + 1.0 / (z * (1.0 + m2))).norm();
        let r2 = ((1.0 + z * m1) - (1.0 + z * m2) / y).norm();
        let m1p = self.m1_prime(z, m1);
        let zm2p = m2 + z * self.m2_prime(z, m2);
        let r3 = (m1 * (zm2p + 1.0) - m1p / m1).norm();
        [r1, r2, r3]
    }

    /// Mass of the continuous part of law two on `[x, λ₊]`, by Gauss–Legendre
    /// after the edge-flattening substitution `x = λ₊ − (λ₊−λ₋) sin²θ`.
    pub fn tail_mass2(&self, x: f64) -> f64 {
        let (lm, lp) = (self.lambda_minus, self.lambda_plus);
        if x >= lp {
            return 0.0;
        }
        let x = x.max(lm);
        let width = lp - lm;
        let theta_max = ((lp - x) / width).sqrt().clamp(0.0, 1.0).asin();
        let gl = GaussLegendre::order(64);
        gl.integrate(0.0, theta_max, |t| {
            let (s, c) = t.sin_cos();
            let xv = lp - width * s * s;
            width * width * (s * c) * (s * c) / (std::f64::consts::PI * xv)
        })
    }

    /// Classical locations γ₁ > γ₂ > … > γ_{M∧N}: γ_j carries tail mass
    /// `(j − 1/2)/N` of law two on `[γ_j, λ₊]`. Bracketed bisection on the
    /// monotone tail-mass map.
    pub fn classical_locations(&self) -> Result<Vec<f64>> {
        let (m, n) = self
            .dims
            .ok_or_else(|| Error::domain("classical locations need explicit dimensions"))?;
        classical_locations(m, n)
    }

    /// Outlier location for a spike of strength `d`.
    pub fn theta(&self, d: f64) -> Result<f64> {
        theta(d, self.y)
    }

    /// The standard evaluation grid used by residual sweeps: 10 energies
    /// linear on `[λ₋/2, 2λ₊]` crossed with 10 scales log-spaced on
    /// `[1e−6, 10]`.
    pub fn standard_grid(&self) -> Vec<Cplx> {
        let n_e = 10;
        let n_eta = 10;
        let e_lo = self.lambda_minus / 2.0;
        let e_hi = 2.0 * self.lambda_plus;
        let mut out = Vec::with_capacity(n_e * n_eta);
        for i in 0..n_e {
            let e = e_lo + (e_hi - e_lo) * i as f64 / (n_e - 1) as f64;
            for j in 0..n_eta {
                let t = j as f64 / (n_eta - 1) as f64;
                let eta = 1e-6 * (10.0 / 1e-6_f64).powf(t);
                out.push(Cplx::new(e, eta));
            }
        }
        out
    }
}

/// Root of `a w² + b w + c = 0` with positive imaginary part.
fn upper_half_root(a: Cplx, b: Cplx, c: Cplx) -> Result<Cplx> {
    let disc = (b * b - 4.0 * a * c).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    let r = if r1.im >= r2.im { r1 } else { r2 };
    if r.im <= 0.0 {
        return Err(Error::Numerical(format!(
            "no upper-half-plane root (candidates {r1}, {r2})"
        )));
    }
    Ok(r)
}

/// Free-standing classical locations for dimensions `(M, N)`.
pub fn classical_locations(m: usize, n: usize) -> Result<Vec<f64>> {
    let model = MpModel::from_dims(m, n)?;
    let count = m.min(n);
    let continuous_mass = model.y().min(1.0);
    let (lm, lp) = (model.lambda_minus(), model.lambda_plus());
    let mut out = Vec::with_capacity(count);
    for j in 1..=count {
        let target = (j as f64 - 0.5) / n as f64;
        if target >= continuous_mass {
            return Err(Error::Numerical(format!(
                "requested tail mass {target} exceeds continuous mass {continuous_mass}"
            )));
        }
        // tail_mass2 decreases in gamma; bracket is the open bulk.
        let mut lo = lm;
        let mut hi = lp;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if model.tail_mass2(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * (1.0 + lp) {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    for w in out.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::Numerical("classical locations not strictly decreasing".into()));
        }
    }
    Ok(out)
}
