//! Numerical toolkit for covariance-type random matrices `H = X Xᵀ` whose
//! columns are isotropic log-concave random vectors.
//!
//! The crate is organized around the pieces of a desk-scale Monte Carlo
//! verification pipeline:
//!
//! * [`mp_model`] — the deterministic Marchenko–Pastur reference law:
//!   spectral edges, densities, Stieltjes transforms, classical eigenvalue
//!   locations and the spiked-outlier map.
//! * [`sampling`] — exact and MCMC samplers for unconditional isotropic
//!   log-concave columns, column scaling and the Gaussian interpolation.
//! * [`ensemble`] — matrix assembly (`H`, spiked `Q`) and dense symmetric
//!   spectra.
//! * [`green`] — resolvent probes: empirical Stieltjes transforms, local-law
//!   residuals, edge regularity checks and comparison statistics.
//! * [`tw_dist`] — the Tracy–Widom GOE distribution used as the edge
//!   reference law.
//! * [`stats`] — experiment statistics: rigidity profiles, edge rescaling,
//!   goodness of fit, spike fluctuation predictions, concentration tests.
//!
//! All randomness flows through explicit 64-bit seeds and per-column/per-trial
//! substreams, so every result is reproducible independent of thread count.

// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod green;
pub mod linalg;
pub mod mp_model;
pub mod quadrature;
pub mod sampling;
pub mod seeding;
pub mod stats;
pub mod tw_dist;

pub use error::{Error, Result};

/// Complex scalar used throughout the spectral machinery.
pub type Cplx = num_complex::Complex64;
