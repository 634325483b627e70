//! Fredholm-determinant oracle for the GOE Tracy–Widom CDF.
//!
//! `F₁(s) = det(I − K_s)` on `L²(s, ∞)` with the rank-symmetrized kernel
//! `K_s(x, y) = Ai((x+y)/2) / 2`, discretized by Nyström quadrature: a
//! Gauss–Legendre panel on `[s, max(s,1)]` resolving the oscillatory region
//! plus an exponentially mapped Gauss–Legendre panel covering the tail.

use ndarray::Array2;

use super::airy::airy_ai;
use crate::quadrature::GaussLegendre;

/// Domain of validity of the oracle.
pub const ORACLE_RANGE: (f64, f64) = (-10.0, 6.0);

/// Oracle output; `clamped` flags an out-of-range argument that was clamped
/// to the supported interval before evaluation.
#[derive(Debug, Clone, Copy)]
pub struct OracleCdf {
    pub value: f64,
    pub clamped: bool,
}

/// Number of Gauss–Legendre nodes per panel used by the shipped oracle.
pub const DEFAULT_PANEL_NODES: usize = 64;

/// Tail map length scale of the exponential change of variables.
const TAIL_SCALE: f64 = 3.0;

/// `F₁(s)` to absolute accuracy well below 1e−6 inside [`ORACLE_RANGE`].
pub fn tw1_oracle_cdf(s: f64) -> OracleCdf {
    let (lo, hi) = ORACLE_RANGE;
    let clamped = s < lo || s > hi;
    let s = s.clamp(lo, hi);
    OracleCdf { value: tw1_cdf_with_nodes(s, DEFAULT_PANEL_NODES), clamped }
}

/// Determinant evaluation with an explicit per-panel node count; exposed so
/// stability checks can double the quadrature order.
pub fn tw1_cdf_with_nodes(s: f64, nodes_per_panel: usize) -> f64 {
    let (xs, ws) = nystrom_nodes(s, nodes_per_panel);
    let n = xs.len();
    let sqrt_w: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let mut a = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let k = 0.5 * airy_ai(0.5 * (xs[i] + xs[j]));
            let v = sqrt_w[i] * k * sqrt_w[j];
            a[[i, j]] = -v;
            a[[j, i]] = -v;
        }
        a[[i, i]] += 1.0;
    }
    // I - K is well conditioned on this range; LU determinant suffices.
    lu_determinant(a)
}

/// Determinant via in-place LU with partial pivoting. The Nystrom matrices
/// are small (a few hundred rows), so no BLAS is involved.
fn lu_determinant(mut a: Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[[k, k]].abs();
        for i in (k + 1)..n {
            let v = a[[i, k]].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[[k, j]];
                a[[k, j]] = a[[piv, j]];
                a[[piv, j]] = tmp;
            }
            det = -det;
        }
        let pivot = a[[k, k]];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[[i, k]] / pivot;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[[i, j]] -= factor * a[[k, j]];
                }
            }
        }
    }
    det
}

fn nystrom_nodes(s: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::order(n);
    let anchor = s.max(1.0);
    let mut xs = Vec::with_capacity(2 * n);
    let mut ws = Vec::with_capacity(2 * n);
    if s < anchor {
        let half = 0.5 * (anchor - s);
        let mid = 0.5 * (anchor + s);
        for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
            xs.push(mid + half * u);
            ws.push(half * w);
        }
    }
    for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
        let t = 0.5 * (u + 1.0); // map to (0, 1)
        xs.push(anchor - TAIL_SCALE * (-t).ln_1p());
        ws.push(0.5 * w * TAIL_SCALE / (1.0 - t));
    }
    (xs, ws)
}
