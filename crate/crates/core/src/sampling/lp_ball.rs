//! Uniform sampling on the unit ℓp ball.
//!
//! Standard representation: generalized-Gaussian coordinates (density
//! ∝ exp(−|t|^p)) normalized by (Σ|g_i|^p + w)^{1/p} with an independent
//! standard exponential w.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{Error, Result};

/// One draw uniform on `{u : ‖u‖_p ≤ 1}`. Isotropic rescaling is the
/// caller's business.
pub fn lp_ball_raw<R: Rng + ?Sized>(p: f64, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !p.is_finite() {
        return Err(Error::Sampler("lp ball sampling requires finite p (unit cube is a separate body)".into()));
    }
    if p < 1.0 {
        return Err(Error::Sampler(format!("lp ball requires p >= 1 for convexity, got {p}")));
    }
    if m == 0 {
        return Err(Error::Sampler("dimension must be positive".into()));
    }
    let mut g = generalized_gaussian_vector(p, m, rng);
    let w: f64 = Exp1.sample(rng);
    let norm_p = g.iter().map(|v| v.abs().powf(p)).sum::<f64>();
    let denom = (norm_p + w).powf(1.0 / p);
    for v in &mut g {
        *v /= denom;
    }
    Ok(g)
}

/// i.i.d. coordinates with density ∝ exp(−|t|^p): |t| = G^{1/p} for
/// G ~ Gamma(1/p, 1), random sign.
fn generalized_gaussian_vector<R: Rng + ?Sized>(p: f64, m: usize, rng: &mut R) -> Vec<f64> {
    if (p - 2.0).abs() < 1e-14 {
        // exp(-t^2) is a Gaussian with variance 1/2
        return (0..m)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
    }
    if (p - 1.0).abs() < 1e-14 {
        return (0..m)
            .map(|_| {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            })
            .collect();
    }
    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid gamma shape");
    (0..m)
        .map(|_| {
            let g: f64 = gamma.sample(rng);
            let mag = g.powf(1.0 / p);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;

    #[test]
    fn rejects_bad_exponents() {
        let mut rng = seeding::rng_from(1);
        assert!(lp_ball_raw(0.5, 3, &mut rng).is_err());
        assert!(lp_ball_raw(f64::INFINITY, 3, &mut rng).is_err());
        assert!(lp_ball_raw(2.0, 0, &mut rng).is_err());
    }

    #[test]
    fn draws_lie_in_the_ball() {
        let mut rng = seeding::rng_from(2);
        for &p in &[1.0, 1.5, 2.0, 4.0] {
            for _ in 0..200 {
                let u = lp_ball_raw(p, 6, &mut rng).unwrap();
                let norm = u.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
                assert!(norm <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn disk_radius_half_area() {
        // P(|u|_2 <= 1/sqrt(2)) is exactly 1/2 in the plane.
        let mut rng = seeding::rng_from(3);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let u = lp_ball_raw(2.0, 2, &mut rng).unwrap();
            if u[0] * u[0] + u[1] * u[1] <= 0.5 {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.002, "area fraction {frac}");
    }

    #[test]
    fn cross_polytope_quadrant_symmetry() {
        let mut rng = seeding::rng_from(4);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let u = lp_ball_raw(1.0, 2, &mut rng).unwrap();
            if u[0] > 0.0 && u[1] > 0.0 {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.25).abs() < 0.002, "quadrant fraction {frac}");
    }
}
