use serde::{Deserialize, Serialize};

use crate::curve::FrameAtPoint;
use crate::Vec2;

/// Smallest half-width for which the 1D measurement is exact.
pub const MIN_HALF_WIDTH: f64 = 1.5;
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;
/// Largest allowed distance between neighbouring mapped samples, pixels.
pub const MAX_SAMPLE_SPACING: f64 = 1.0 / 3.0;

/// Regular midpoint lattice over the virtual frame `x1 ∈ [0, 1]`, `x2 ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualGrid {
    /// Half-width `R` of the virtual image, pixels.
    pub half_width: f64,
    pub n1: usize,
    pub n2: usize,
}

impl VirtualGrid {
    pub fn new(half_width: f64, n1: usize, n2: usize) -> Self {
        assert!(half_width > 0.0 && n1 > 0 && n2 > 0, "degenerate virtual grid");
        VirtualGrid { half_width, n1, n2 }
    }

    /// Coarsest grid keeping mapped samples at most 1/3 pixel apart along a
    /// curve of length `length`: `n1 = ⌈3L⌉`, `n2 = ⌈6R⌉`.
    pub fn for_length(half_width: f64, length: f64) -> Self {
        let n1 = ((length / MAX_SAMPLE_SPACING - 1e-9).ceil() as usize).max(8);
        let n2 = ((2.0 * half_width / MAX_SAMPLE_SPACING - 1e-9).ceil() as usize).max(2);
        VirtualGrid::new(half_width, n1, n2)
    }

    /// Both counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        VirtualGrid::new(self.half_width, self.n1 * factor, self.n2 * factor)
    }

    #[inline]
    pub fn x1(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.n1 as f64
    }

    #[inline]
    pub fn x2(&self, m: usize) -> f64 {
        -1.0 + (2 * m + 1) as f64 / self.n2 as f64
    }

    /// Midpoint-rule cell area in the virtual frame.
    #[inline]
    pub fn weight(&self) -> f64 {
        2.0 / (self.n1 * self.n2) as f64
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn satisfies_spacing(&self, length: f64) -> bool {
        length / self.n1 as f64 <= MAX_SAMPLE_SPACING + 1e-12
            && 2.0 * self.half_width / self.n2 as f64 <= MAX_SAMPLE_SPACING + 1e-12
    }
}

/// Virtual gray level `g(x2) = (1 + x2)/2`.
#[inline]
pub fn g_level(x2: f64) -> f64 {
    0.5 * (1.0 + x2)
}

/// `X = X^c + R·x2·e_r`
#[inline]
pub fn map_to_image(frame: &FrameAtPoint, half_width: f64, x2: f64) -> Vec2 {
    frame.point + (half_width * x2) * frame.e_r
}
