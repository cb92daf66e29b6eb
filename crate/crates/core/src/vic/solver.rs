use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::eval::{BandSamples, Evaluation, GradientMode};
use super::grid::{VirtualGrid, DEFAULT_HALF_WIDTH};
use super::VicError;
use crate::curve::{AdmissibilityIssue, Curve, CurveError};
use crate::raster::{AffineGrayCorrection, RasterImage};

/// Relative diagonal floor added to the Gauss-Newton matrix.
const TIKHONOV: f64 = 1e-12;
/// Largest accepted condition number of the regularized system.
pub const MAX_CONDITION: f64 = 1e12;
/// With [`GradientMode::Interpolated`] the Newton fixed point is not exactly
/// the minimizer of the sampled cost, so in-bounds steps moving the curve by
/// less than this are taken without the cost test.
pub const TRUSTED_STEP_PX: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Virtual image half-width `R`, pixels.
    pub half_width: f64,
    /// Stop when no curve point moves more than this, pixels.
    pub tol_px: f64,
    pub max_iter: usize,
    /// Refit the affine gray correction before every cost evaluation.
    pub correction: bool,
    /// Fixed `(n1, n2)`; `None` follows the 1/3-pixel rule for the current length.
    pub grid: Option<(usize, usize)>,
    /// Start with this wider half-width and shrink towards `half_width`.
    pub init_half_width: Option<f64>,
    pub max_halvings: usize,
    pub gradient: GradientMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            half_width: DEFAULT_HALF_WIDTH,
            tol_px: 1e-6,
            max_iter: 100,
            correction: true,
            grid: None,
            init_half_width: None,
            max_halvings: 8,
            gradient: GradientMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Cost after the accepted step.
    pub psi: f64,
    pub step_norm: f64,
    /// Largest curve point displacement of the accepted step, pixels.
    pub max_displacement_px: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementResult {
    pub curve: Curve,
    pub psi: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    pub correction: AffineGrayCorrection,
    pub grid: VirtualGrid,
}

impl MeasurementResult {
    pub fn params(&self) -> &[f64] {
        self.curve.params().as_slice()
    }
}

struct State {
    curve: Curve,
    samples: BandSamples,
    correction: AffineGrayCorrection,
    cost: f64,
}

fn grid_for(curve: &Curve, half_width: f64, fixed: Option<(usize, usize)>) -> Result<VirtualGrid, VicError> {
    Ok(match fixed {
        Some((n1, n2)) => VirtualGrid::new(half_width, n1, n2),
        None => VirtualGrid::for_length(half_width, curve.arc_length()?),
    })
}

fn prepare(img: &RasterImage, curve: Curve, grid: &VirtualGrid, opts: &SolveOptions) -> Result<State, VicError> {
    let samples = BandSamples::collect(img, &curve, grid, opts.gradient)?;
    let correction = if opts.correction {
        samples.fit_correction()?
    } else {
        AffineGrayCorrection::IDENTITY
    };
    let cost = samples.cost(&correction);
    Ok(State {
        curve,
        samples,
        correction,
        cost,
    })
}

/// Solves `(H + εI) Δ = -∇ψ` and returns `Δ`.
fn newton_step(e: &Evaluation) -> Result<DVector<f64>, VicError> {
    let n = e.gradient.len();
    let trace = e.hessian.trace();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(VicError::SingularSystem { condition: f64::INFINITY });
    }
    let h: DMatrix<f64> = &e.hessian + DMatrix::identity(n, n) * (TIKHONOV * trace / n as f64);
    let eig = SymmetricEigen::new(h.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(VicError::SingularSystem { condition });
    }
    let rhs = -&e.gradient;
    match h.cholesky() {
        Some(ch) => Ok(ch.solve(&rhs)),
        None => Err(VicError::SingularSystem { condition }),
    }
}

/// Largest normal displacement `|Σ Δp ∂X^c/∂λp · e_r|` over the grid columns.
fn max_displacement(samples: &BandSamples, step: &DVector<f64>) -> f64 {
    samples
        .columns
        .iter()
        .map(|c| {
            c.d_point
                .iter()
                .zip(step.iter())
                .map(|(d, s)| d.dot(&c.frame.e_r) * s)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

fn stationary_error(curve: &Curve, half_width: f64) -> Option<VicError> {
    let report = curve.check_admissibility(half_width);
    report.errors.iter().find_map(|e| match *e {
        AdmissibilityIssue::StationaryPoint { x1, speed } => Some(VicError::Curve(CurveError::StationaryPoint { x1, speed })),
        _ => None,
    })
}

/// Damped Gauss-Newton iterations at a fixed half-width.
fn iterate(
    img: &RasterImage,
    curve: Curve,
    opts: &SolveOptions,
    half_width: f64,
    tol_px: f64,
    max_iter: usize,
) -> Result<MeasurementResult, VicError> {
    let mut grid = grid_for(&curve, half_width, opts.grid)?;
    let mut state = prepare(img, curve, &grid, opts)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let eval = state.samples.evaluate(&state.correction);
        let step = newton_step(&eval)?;
        let full_move = max_displacement(&state.samples, &step);
        let params = DVector::from_column_slice(state.curve.params().as_slice());

        let trusted = opts.gradient == GradientMode::Interpolated && full_move <= TRUSTED_STEP_PX;
        let mut scale = 1.0;
        let mut accepted = None;
        let mut out_of_bounds = 0;
        for halvings in 0..=opts.max_halvings {
            let trial = &params + &step * scale;
            let candidate = state
                .curve
                .with_params(trial.as_slice().to_vec())
                .map_err(VicError::from)
                .and_then(|c| prepare(img, c, &grid, opts));
            match candidate {
                Ok(next) if trusted || next.cost <= state.cost => {
                    accepted = Some((next, halvings));
                    break;
                }
                Ok(_) => {}
                Err(VicError::Raster(crate::raster::RasterError::OutOfBounds { .. })) => out_of_bounds += 1,
                Err(_) => {}
            }
            scale *= 0.5;
        }

        match accepted {
            Some((next, halvings)) => {
                trace.push(IterationRecord {
                    psi: next.cost,
                    step_norm: step.norm() * scale,
                    max_displacement_px: full_move * scale,
                    halvings,
                });
                state = next;
            }
            None => {
                trace.push(IterationRecord {
                    psi: state.cost,
                    step_norm: 0.0,
                    max_displacement_px: 0.0,
                    halvings: opts.max_halvings + 1,
                });
                if full_move < tol_px {
                    converged = true;
                    break;
                }
                if out_of_bounds == opts.max_halvings + 1 {
                    return Err(VicError::DivergedOutOfBounds { iteration: iterations });
                }
                break;
            }
        }

        if full_move < tol_px {
            if opts.grid.is_none() {
                let needed = VirtualGrid::for_length(half_width, state.curve.arc_length()?);
                if needed.n1 > grid.n1 {
                    grid = needed;
                    state = prepare(img, state.curve, &grid, opts)?;
                    continue;
                }
            }
            converged = true;
            break;
        }
    }

    Ok(MeasurementResult {
        curve: state.curve,
        psi: state.cost,
        iterations,
        converged,
        trace,
        correction: state.correction,
        grid,
    })
}

/// Measures the silhouette boundary starting from `initial`.
///
/// Returns [`VicError::NotConverged`] (carrying the last iterate) when the
/// displacement tolerance is not reached within `max_iter` iterations.
pub fn solve(img: &RasterImage, initial: &Curve, opts: &SolveOptions) -> Result<MeasurementResult, VicError> {
    if !(opts.half_width > 0.0) || !opts.half_width.is_finite() {
        return Err(VicError::InvalidOption(format!("half-width must be positive, got {}", opts.half_width)));
    }
    if !(opts.tol_px > 0.0) {
        return Err(VicError::InvalidOption(format!("tolerance must be positive, got {}", opts.tol_px)));
    }
    if let Some(e) = stationary_error(initial, opts.half_width) {
        return Err(e);
    }

    let mut curve = initial.clone();
    let mut spent = Vec::new();
    if let Some(wide) = opts.init_half_width.filter(|&w| w > opts.half_width) {
        const STAGES: usize = 3;
        for k in 0..STAGES {
            let r = wide * (opts.half_width / wide).powf(k as f64 / STAGES as f64);
            let staged = iterate(img, curve.clone(), opts, r, 1e-2, 30)?;
            spent.extend(staged.trace);
            curve = staged.curve;
        }
    }

    let mut result = iterate(img, curve, opts, opts.half_width, opts.tol_px, opts.max_iter)?;
    if !spent.is_empty() {
        let staged_iterations = spent.len();
        spent.append(&mut result.trace);
        result.trace = spent;
        result.iterations += staged_iterations;
    }
    if result.converged {
        Ok(result)
    } else {
        Err(VicError::NotConverged(Box::new(result)))
    }
}
