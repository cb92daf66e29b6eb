//! One-dimensional measurement of a single dark-to-light step.
//!
//! The image is the linear interpolation of a pixel sequence and the virtual
//! image maps `X = λ + R·x2`. Cost, gradient and Gauss-Newton curvature are
//! integrated exactly cell by cell, so the only error left is the iteration
//! tolerance.

use super::VicError;

const MAX_ITER: usize = 5000;
const STEP_TOL: f64 = 1e-14;

/// Gray levels at the integer positions `origin, origin + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1d {
    pub origin: f64,
    pub values: Vec<f64>,
}

impl Profile1d {
    pub fn new(origin: f64, values: Vec<f64>) -> Self {
        Profile1d { origin, values }
    }

    pub fn position(&self, i: usize) -> f64 {
        self.origin + i as f64
    }

    pub fn last_position(&self) -> f64 {
        self.position(self.values.len().saturating_sub(1))
    }

    fn check_edge(&self) -> Result<(), VicError> {
        if self.values.len() < 2 {
            return Err(VicError::NoEdge("profile needs at least two samples".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(VicError::NoEdge("profile has non-finite values".into()));
        }
        if self.values.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(VicError::NoEdge("profile is not monotone non-decreasing".into()));
        }
        let (first, last) = (self.values[0], self.values[self.values.len() - 1]);
        if !(first < 0.5 && last > 0.5) {
            return Err(VicError::NoEdge("profile does not cross the mid gray level".into()));
        }
        Ok(())
    }
}

/// Pixel means of a unit step at `x0` (black below, white above) at positions
/// `-half_len ..= half_len`.
pub fn pixel_integrated_step(x0: f64, half_len: usize) -> Profile1d {
    let n = half_len as i64;
    let values = (-n..=n).map(|i| (i as f64 + 0.5 - x0).clamp(0.0, 1.0)).collect();
    Profile1d::new(-(half_len as f64), values)
}

/// `(∫ F'(F - g) dX, ∫ F'² dX)` over `[λ - R, λ + R]`.
fn moments(profile: &Profile1d, r: f64, lambda: f64) -> (f64, f64) {
    let (a, b) = (lambda - r, lambda + r);
    let g = |x: f64| 0.5 * (1.0 + (x - lambda) / r);
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, w) in profile.values.windows(2).enumerate() {
        let x0 = profile.position(i);
        let (u, v) = (a.max(x0), b.min(x0 + 1.0));
        if v <= u {
            continue;
        }
        let slope = w[1] - w[0];
        if slope == 0.0 {
            continue;
        }
        let f = |x: f64| w[0] + slope * (x - x0);
        let mean_residual = 0.5 * ((f(u) - g(u)) + (f(v) - g(v)));
        first += slope * mean_residual * (v - u);
        second += slope * slope * (v - u);
    }
    (first, second)
}

/// Gauss-Newton iterations on `λ`; returns the measured edge position.
pub fn solve_1d(profile: &Profile1d, half_width: f64, initial: f64) -> Result<f64, VicError> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(VicError::InvalidOption(format!("half-width must be positive, got {half_width}")));
    }
    profile.check_edge()?;
    let (lo, hi) = (profile.origin, profile.last_position());
    let mut lambda = initial;
    for _ in 0..MAX_ITER {
        if lambda - half_width < lo || lambda + half_width > hi {
            return Err(VicError::DivergedOutOfBounds { iteration: 0 });
        }
        let (grad, hess) = moments(profile, half_width, lambda);
        if !(hess > 0.0) {
            return Err(VicError::NoEdge("virtual band sees no gray-level variation".into()));
        }
        let step = -grad / hess;
        lambda += step;
        if step.abs() < STEP_TOL {
            return Ok(lambda);
        }
    }
    Ok(lambda)
}
