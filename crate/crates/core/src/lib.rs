//! Two-sided Gaussian heat-kernel bounds on manifolds with non-negative
//! Ricci curvature, evaluated against exact reference kernels on a catalog
//! of model manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the model-manifold catalog (distances, ball volumes).
//! * [`kernels`]: exact and spectral heat kernels plus a PDE oracle.
//! * [`bounds`]: lower/upper bound families and the δ optimiser.
//! * [`estimates`]: gradient and Laplacian estimates, classical inequalities.
//! * [`verify`]: sweep harness and reports.
//! * [`cli`]: the `heatbound` command-line front end.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod kernels;
pub mod report;
pub mod special;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ModelManifold, Point};
pub use tolerance::ToleranceConfig;
