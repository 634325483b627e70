//! Thin wrappers over the dense symmetric eigensolver.
//!
//! BLAS is pinned to a single thread on first use: parallelism in this crate
//! lives at the trial level, and per-call determinism requires a fixed
//! single-threaded reduction order inside LAPACK.

use ndarray::Array2;
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use std::sync::Once;

use crate::error::{Error, Result};

unsafe extern "C" {
    fn openblas_set_num_threads(n: i32);
}

static BLAS_INIT: Once = Once::new();

/// Forces OpenBLAS to run single-threaded. Idempotent and cheap after the
/// first call; every eigensolver entry point routes through it.
pub fn pin_blas_single_thread() {
    BLAS_INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

/// Eigenvalues of a symmetric matrix, ascending. `seed` is carried into the
/// error on convergence failure so the draw can be replayed.
pub fn sym_eigenvalues(a: &Array2<f64>, seed: u64) -> Result<Vec<f64>> {
    pin_blas_single_thread();
    let ev = a
        .eigvalsh(UPLO::Lower)
        .map_err(|source| Error::Eigen { seed, source })?;
    Ok(ev.to_vec())
}

/// Full eigendecomposition of a symmetric matrix; eigenvalues ascending,
/// eigenvector `k` in column `k`.
pub fn sym_eigen(a: &Array2<f64>, seed: u64) -> Result<(Vec<f64>, Array2<f64>)> {
    pin_blas_single_thread();
    let (ev, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|source| Error::Eigen { seed, source })?;
    Ok((ev.to_vec(), vecs))
}

/// Exact symmetrization `(A + Aᵀ)/2`.
pub fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}
