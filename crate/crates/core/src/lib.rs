//! Kriging with low-rank and pseudo-inverse covariance representations.
//!
//! Covariance matrices of smooth kernels on dense designs are numerically
//! singular: their eigenvalues decay so fast that a plain solve is meaningless.
//! This crate provides the pieces to study and work around that:
//!
//! * [`kernels`]: covariance families and the local-continuity function `c(delta)`.
//! * [`design`]: sampling designs and rasterized Voronoi regularity diagnostics.
//! * [`spectral`]: dense and randomized eigendecompositions, Nystrom spectra,
//!   tail sums and condition numbers.
//! * [`kriging`]: exact, pseudo-inverse and perturbed predictors, with the
//!   closed-form perturbation MSE and its brute-force oracle.
//! * [`optimality`]: numerical checks that eigen-truncation is optimal.

pub mod design;
mod error;
pub mod kernels;
pub mod kriging;
pub mod linalg;
pub mod optimality;
pub mod report;
pub mod spectral;

pub use design::{grid_design, random_design, Design, Domain};
pub use error::{Error, Result};
pub use faer::{Mat, MatRef};
pub use kernels::{Family, KernelSpec};
pub use kriging::{fit, FitMode, KrigingModel, Prediction};
pub use spectral::{dense_eigen, truncated_eigen, EigenSystem, TruncatedParams};
