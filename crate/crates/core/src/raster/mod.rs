//! Grayscale rasters and sub-pixel sampling.
//!
//! Pixel `(i, j)` (column `i`, row `j`) holds the gray level of the point with
//! integer coordinates `(i, j)`; sampling interpolates bilinearly between these
//! pixel centers and never extrapolates past `[0, w-1] × [0, h-1]`.

mod pgm;

pub use pgm::{load_pgm, read_pgm, save_pgm, write_pgm, PgmEncoding};

use serde::{Deserialize, Serialize};

use crate::Vec2;

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("sample point ({x}, {y}) is outside the {width}x{height} image")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated PGM payload: expected {expected} samples, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("unsupported PGM maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),
    #[error("invalid image: {0}")]
    Invalid(String),
    #[error("no discernible edge: white level minus black level is {0:.4}")]
    DegenerateContrast(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
    bit_depth: Option<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, RasterError> {
        if width < 2 || height < 2 {
            return Err(RasterError::Invalid(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(RasterError::Invalid(format!(
                "{} values for a {width}x{height} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(RasterError::Invalid("non-finite gray level".into()));
        }
        Ok(RasterImage {
            width,
            height,
            data,
            bit_depth: None,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, RasterError> {
        RasterImage::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self, RasterError> {
        let mut data = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                data.push(f(i, j));
            }
        }
        RasterImage::new(width, height, data)
    }

    pub fn with_bit_depth(mut self, bits: Option<u8>) -> Self {
        self.bit_depth = bits;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> Option<u8> {
        self.bit_depth
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.width + i]
    }

    /// Pointwise gray map, keeping shape and bit depth.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<RasterImage, RasterError> {
        let mut out = RasterImage::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())?;
        out.bit_depth = self.bit_depth;
        Ok(out)
    }

    /// Rescales so the darkest pixel maps to 0 and the brightest to 1.
    pub fn normalized(&self) -> Result<RasterImage, RasterError> {
        let lo = self.data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 0.0 {
            return Err(RasterError::DegenerateContrast(hi - lo));
        }
        self.map(|v| (v - lo) / (hi - lo))
    }

    #[inline]
    fn cell(&self, p: Vec2) -> Result<(usize, usize, f64, f64), RasterError> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(p.x >= 0.0 && p.x <= max_x && p.y >= 0.0 && p.y <= max_y) {
            return Err(RasterError::OutOfBounds {
                x: p.x,
                y: p.y,
                width: self.width,
                height: self.height,
            });
        }
        let i = (p.x.floor() as usize).min(self.width - 2);
        let j = (p.y.floor() as usize).min(self.height - 2);
        Ok((i, j, p.x - i as f64, p.y - j as f64))
    }

    #[inline]
    fn corners(&self, i: usize, j: usize) -> [f64; 4] {
        let k = j * self.width + i;
        [self.data[k], self.data[k + 1], self.data[k + self.width], self.data[k + self.width + 1]]
    }

    /// Bilinear interpolation between the four surrounding pixel centers.
    pub fn sample_bilinear(&self, p: Vec2) -> Result<f64, RasterError> {
        let (i, j, u, v) = self.cell(p)?;
        let [f00, f10, f01, f11] = self.corners(i, j);
        Ok((1.0 - v) * ((1.0 - u) * f00 + u * f10) + v * ((1.0 - u) * f01 + u * f11))
    }

    /// Exact gradient of the bilinear interpolant inside the cell containing `p`.
    pub fn gradient_bilinear(&self, p: Vec2) -> Result<Vec2, RasterError> {
        self.sample_with_gradient(p).map(|(_, g)| g)
    }

    /// Value and gradient in one lookup.
    #[inline]
    pub fn sample_with_gradient(&self, p: Vec2) -> Result<(f64, Vec2), RasterError> {
        let (i, j, u, v) = self.cell(p)?;
        let [f00, f10, f01, f11] = self.corners(i, j);
        let value = (1.0 - v) * ((1.0 - u) * f00 + u * f10) + v * ((1.0 - u) * f01 + u * f11);
        let gx = (1.0 - v) * (f10 - f00) + v * (f11 - f01);
        let gy = (1.0 - u) * (f01 - f00) + u * (f11 - f10);
        Ok((value, Vec2::new(gx, gy)))
    }

    /// Central-difference gradient at pixel `(i, j)`, one-sided on the border.
    #[inline]
    pub fn pixel_gradient(&self, i: usize, j: usize) -> Vec2 {
        let (w, h) = (self.width, self.height);
        let (il, ih) = (i.saturating_sub(1), (i + 1).min(w - 1));
        let (jl, jh) = (j.saturating_sub(1), (j + 1).min(h - 1));
        let gx = if ih > il { (self.get(ih, j) - self.get(il, j)) / (ih - il) as f64 } else { 0.0 };
        let gy = if jh > jl { (self.get(i, jh) - self.get(i, jl)) / (jh - jl) as f64 } else { 0.0 };
        Vec2::new(gx, gy)
    }

    /// Bilinear value together with the bilinear interpolation of the
    /// central-difference pixel gradients. Unlike [`Self::gradient_bilinear`]
    /// this gradient is continuous across cell borders.
    pub fn sample_with_smooth_gradient(&self, p: Vec2) -> Result<(f64, Vec2), RasterError> {
        let (i, j, u, v) = self.cell(p)?;
        let [f00, f10, f01, f11] = self.corners(i, j);
        let value = (1.0 - v) * ((1.0 - u) * f00 + u * f10) + v * ((1.0 - u) * f01 + u * f11);
        let g = (1.0 - v) * ((1.0 - u) * self.pixel_gradient(i, j) + u * self.pixel_gradient(i + 1, j))
            + v * ((1.0 - u) * self.pixel_gradient(i, j + 1) + u * self.pixel_gradient(i + 1, j + 1));
        Ok((value, g))
    }

    pub fn gradient_interpolated(&self, p: Vec2) -> Result<Vec2, RasterError> {
        self.sample_with_smooth_gradient(p).map(|(_, g)| g)
    }

    /// Second derivatives by central differencing of the bilinear gradient one
    /// pixel apart (one-sided at the borders), symmetrized.
    pub fn hessian_differenced(&self, p: Vec2) -> Result<[[f64; 2]; 2], RasterError> {
        let max = Vec2::new((self.width - 1) as f64, (self.height - 1) as f64);
        let mut rows = [[0.0; 2]; 2];
        for axis in 0..2 {
            let mut lo = p;
            let mut hi = p;
            lo[axis] = (p[axis] - 1.0).max(0.0);
            hi[axis] = (p[axis] + 1.0).min(max[axis]);
            let span = hi[axis] - lo[axis];
            let g_hi = self.gradient_bilinear(hi)?;
            let g_lo = self.gradient_bilinear(lo)?;
            let d = (g_hi - g_lo) / span;
            rows[axis] = [d.x, d.y];
        }
        let cross = 0.5 * (rows[0][1] + rows[1][0]);
        Ok([[rows[0][0], cross], [cross, rows[1][1]]])
    }
}

/// Affine gray-level model `f = a·(F - ½) + ½ + b` fitted on the outer bands of
/// the virtual image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineGrayCorrection {
    /// Contrast `a` (white level minus black level).
    pub amplitude: f64,
    /// Luminance bias `b`.
    pub bias: f64,
}

/// Outer band width (in `x2`) used on each side to estimate the pure levels.
pub const CORRECTION_BAND: f64 = 0.25;

/// Below this white-minus-black difference there is no usable edge.
pub const MIN_CONTRAST: f64 = 0.05;

impl Default for AffineGrayCorrection {
    fn default() -> Self {
        AffineGrayCorrection::IDENTITY
    }
}

impl AffineGrayCorrection {
    pub const IDENTITY: AffineGrayCorrection = AffineGrayCorrection {
        amplitude: 1.0,
        bias: 0.0,
    };

    /// Fits from `(x2, f)` samples: black level is the mean over
    /// `x2 ∈ [-1, -0.75]`, white level the mean over `x2 ∈ [0.75, 1]`.
    pub fn fit(samples: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, RasterError> {
        let edge = 1.0 - CORRECTION_BAND + 1e-12;
        let (mut black, mut nb, mut white, mut nw) = (0.0, 0usize, 0.0, 0usize);
        for (x2, f) in samples {
            if x2 <= -edge {
                black += f;
                nb += 1;
            } else if x2 >= edge {
                white += f;
                nw += 1;
            }
        }
        if nb == 0 || nw == 0 {
            return Err(RasterError::Invalid("no samples in the correction bands".into()));
        }
        let k = black / nb as f64;
        let w = white / nw as f64;
        if !(w - k >= MIN_CONTRAST) {
            return Err(RasterError::DegenerateContrast(w - k));
        }
        Ok(AffineGrayCorrection {
            amplitude: w - k,
            bias: 0.5 * (w + k - 1.0),
        })
    }

    pub fn black_level(&self) -> f64 {
        self.bias + 0.5 * (1.0 - self.amplitude)
    }

    pub fn white_level(&self) -> f64 {
        self.bias + 0.5 * (1.0 + self.amplitude)
    }

    /// Multiplier applied to gray levels and gradients: `1/(w - k)`.
    pub fn gain(&self) -> f64 {
        1.0 / self.amplitude
    }

    /// `f ↦ (f - k)/(w - k)`
    #[inline]
    pub fn apply(&self, f: f64) -> f64 {
        (f - self.black_level()) / self.amplitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(width: usize, height: usize) -> RasterImage {
        RasterImage::from_fn(width, height, |i, _| i as f64 / (width - 1) as f64).unwrap()
    }

    #[test]
    fn integer_points_are_exact() {
        let img = RasterImage::from_fn(5, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 / 4.0).unwrap();
        for j in 0..4 {
            for i in 0..5 {
                let v = img.sample_bilinear(Vec2::new(i as f64, j as f64)).unwrap();
                assert_eq!(v, img.get(i, j));
            }
        }
    }

    #[test]
    fn cell_midpoint_is_corner_mean() {
        let img = RasterImage::new(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(img.sample_bilinear(Vec2::new(0.5, 0.5)).unwrap(), 0.5);
        let img = RasterImage::new(2, 2, vec![0.0, 0.2, 0.6, 1.0]).unwrap();
        assert!((img.sample_bilinear(Vec2::new(0.5, 0.5)).unwrap() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn smooth_gradient_is_exact_on_ramps_and_continuous() {
        let img = RasterImage::from_fn(9, 7, |i, j| 0.05 * i as f64 - 0.02 * j as f64 + 0.3).unwrap();
        for p in [Vec2::new(0.0, 0.0), Vec2::new(3.37, 1.2), Vec2::new(8.0, 6.0)] {
            let g = img.gradient_interpolated(p).unwrap();
            assert!((g - Vec2::new(0.05, -0.02)).norm() < 1e-15);
        }
        let img = RasterImage::from_fn(6, 6, |i, j| ((i * 5 + j * 3) % 7) as f64 / 6.0).unwrap();
        let a = img.gradient_interpolated(Vec2::new(2.0 - 1e-9, 2.5)).unwrap();
        let b = img.gradient_interpolated(Vec2::new(2.0 + 1e-9, 2.5)).unwrap();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn ramp_sampling_and_gradient() {
        let img = ramp(11, 4);
        let v = img.sample_bilinear(Vec2::new(3.37, 1.2)).unwrap();
        assert!((v - 3.37 / 10.0).abs() < 1e-15);
        for p in [Vec2::new(0.0, 0.0), Vec2::new(3.37, 1.2), Vec2::new(10.0, 3.0)] {
            let g = img.gradient_bilinear(p).unwrap();
            assert!((g - Vec2::new(0.1, 0.0)).norm() < 1e-15);
        }
        let flat = RasterImage::filled(4, 4, 0.3).unwrap();
        assert_eq!(flat.gradient_bilinear(Vec2::new(1.5, 2.5)).unwrap(), Vec2::zeros());
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let img = ramp(5, 5);
        assert!(img.sample_bilinear(Vec2::new(4.0, 4.0)).is_ok());
        for p in [Vec2::new(-1e-9, 1.0), Vec2::new(4.0 + 1e-9, 1.0), Vec2::new(1.0, f64::NAN)] {
            assert!(matches!(img.sample_bilinear(p), Err(RasterError::OutOfBounds { .. })));
        }
    }

    #[test]
    fn differenced_hessian_of_quadratic() {
        let img = RasterImage::from_fn(9, 9, |i, j| {
            let (x, y) = (i as f64, j as f64);
            0.01 * x * x + 0.02 * x * y
        })
        .unwrap();
        let h = img.hessian_differenced(Vec2::new(4.0, 4.0)).unwrap();
        assert!((h[0][0] - 0.02).abs() < 1e-12);
        assert!((h[0][1] - 0.02).abs() < 1e-12);
        assert!(h[1][1].abs() < 1e-12);
    }

    /// Samples of the piecewise-linear gray model with contrast `a`, bias `b`
    /// and edge offset `delta` on a regular x2 grid.
    fn model_profile(a: f64, b: f64, delta: f64, r: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|m| {
                let x2 = -1.0 + (2 * m + 1) as f64 / n as f64;
                let lo = (delta - 1.0) / r;
                let hi = (delta + 1.0) / r;
                let f = if x2 < lo {
                    b + 0.5 * (1.0 - a)
                } else if x2 < hi {
                    a * (r * x2 - delta) / 2.0 + b + 0.5
                } else {
                    b + 0.5 * (1.0 + a)
                };
                (x2, f)
            })
            .collect()
    }

    #[test]
    fn affine_fit_recovers_model() {
        let c = AffineGrayCorrection::fit(model_profile(0.8, 0.1, 0.0, 2.0, 48)).unwrap();
        assert!((c.amplitude - 0.8).abs() < 1e-6);
        assert!((c.bias - 0.1).abs() < 1e-6);
        let id = AffineGrayCorrection::fit(model_profile(1.0, 0.0, 0.0, 2.0, 48)).unwrap();
        assert!((id.amplitude - 1.0).abs() < 1e-6 && id.bias.abs() < 1e-6);
    }

    #[test]
    fn affine_fit_is_idempotent() {
        let samples = model_profile(0.6, -0.07, 0.2, 2.0, 60);
        let c = AffineGrayCorrection::fit(samples.iter().copied()).unwrap();
        let again = AffineGrayCorrection::fit(samples.iter().map(|&(x, f)| (x, c.apply(f)))).unwrap();
        assert!((again.amplitude - 1.0).abs() < 1e-9);
        assert!(again.bias.abs() < 1e-9);
    }

    #[test]
    fn flat_profile_has_no_edge() {
        let flat = (0..24).map(|m| (-1.0 + (2 * m + 1) as f64 / 24.0, 0.5));
        assert!(matches!(
            AffineGrayCorrection::fit(flat),
            Err(RasterError::DegenerateContrast(_))
        ));
    }
}
