//! Hit-and-run chain for the uniform measure on a symmetric convex body.
//!
//! Each step draws a uniform direction, intersects the line with the body and
//! resamples uniformly on the chord. Bodies are origin-symmetric and
//! unconditional, so coordinatewise sign randomization of the chain output is
//! measure preserving.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::BodySpec;

pub struct HitAndRunChain {
    body: BodySpec,
    state: Vec<f64>,
}

impl HitAndRunChain {
    /// Fresh chain started at the center of the body.
    pub fn new(body: BodySpec, dimension: usize) -> Self {
        HitAndRunChain { body, state: vec![0.0; dimension] }
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let m = self.state.len();
        let mut dir = vec![0.0; m];
        loop {
            for d in dir.iter_mut() {
                *d = StandardNormal.sample(rng);
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-300 {
                for d in dir.iter_mut() {
                    *d /= norm;
                }
                break;
            }
        }
        let t_plus = self.boundary_distance(&dir);
        let neg: Vec<f64> = dir.iter().map(|v| -v).collect();
        let t_minus = -self.boundary_distance(&neg);
        let t = rng.random_range(t_minus..t_plus);
        for (x, d) in self.state.iter_mut().zip(&dir) {
            *x += t * d;
        }
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: usize, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// Largest t >= 0 with `state + t * dir` inside the body.
    fn boundary_distance(&self, dir: &[f64]) -> f64 {
        match self.body {
            BodySpec::LpBall { p } if p.is_infinite() => {
                let mut t = f64::INFINITY;
                for (&x, &d) in self.state.iter().zip(dir) {
                    if d > 0.0 {
                        t = t.min((1.0 - x) / d);
                    } else if d < 0.0 {
                        t = t.min((-1.0 - x) / d);
                    }
                }
                t
            }
            BodySpec::LpBall { p } => {
                let norm_p = |t: f64| -> f64 {
                    self.state
                        .iter()
                        .zip(dir)
                        .map(|(&x, &d)| (x + t * d).abs().powf(p))
                        .sum::<f64>()
                };
                let state_norm = norm_p(0.0).powf(1.0 / p);
                debug_assert!(state_norm < 1.0 + 1e-12);
                let dir_norm = dir.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
                // beyond this cap the triangle inequality puts the point outside
                let mut hi = (1.0 + state_norm) / dir_norm;
                let mut lo = 0.0;
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if norm_p(mid) <= 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }
}
