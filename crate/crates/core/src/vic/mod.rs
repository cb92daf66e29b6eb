//! Virtual image correlation: the measurement engine.
//!
//! A band of half-width `R` straddling the current curve is mapped to the
//! virtual frame `(x1, x2) ∈ [0, 1] × [-1, 1]`, where the ideal gray level is
//! the ramp `g(x2) = (1 + x2)/2`. Shape parameters are found by damped
//! Gauss-Newton minimization of the mean square mismatch.

pub mod eval;
pub mod grid;
pub mod init;
pub mod one_d;
pub mod solver;

pub use eval::{cost_psi, grad_psi, hessian_full, hessian_gn, BandSamples, Evaluation, GradientMode};
pub use grid::{g_level, map_to_image, VirtualGrid, DEFAULT_HALF_WIDTH, MIN_HALF_WIDTH};
pub use init::{init_bspline, init_circle, init_constrained_segment, init_segment};
pub use one_d::{pixel_integrated_step, solve_1d, Profile1d};
pub use solver::{solve, IterationRecord, MeasurementResult, SolveOptions};

use crate::curve::CurveError;
use crate::raster::RasterError;

#[derive(Debug, thiserror::Error)]
pub enum VicError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("Gauss-Newton system is singular (condition number {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("every damped step left the image at iteration {iteration}")]
    DivergedOutOfBounds { iteration: usize },
    #[error("not converged after {} iterations", .0.iterations)]
    NotConverged(Box<MeasurementResult>),
    #[error("no usable edge: {0}")]
    NoEdge(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
