//! Ground-truth silhouette images.
//!
//! Every pixel carries the exact fraction of its unit square (centered on the
//! pixel's integer coordinates) that lies in the white background; the
//! silhouette is black. Noise and quantization are applied afterwards, in that
//! order.

pub mod geometry;
pub mod rng;

use serde::{Deserialize, Serialize};

use crate::raster::{RasterError, RasterImage};
use crate::Vec2;
pub use rng::CounterRng;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Silhouette geometry in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disc { center: [f64; 2], radius: f64 },
    /// Straight edge through `point` with direction `(cos θ, sin θ)`. The
    /// silhouette is the side opposite the normal `(sin θ, -cos θ)`, which is
    /// the `e_r` of a segment running along the edge direction.
    HalfPlaneEdge { point: [f64; 2], angle: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub shape: Shape,
    pub width: usize,
    pub height: usize,
}

impl Scene {
    pub fn disc(center: Vec2, radius: f64, width: usize, height: usize) -> Self {
        Scene {
            shape: Shape::Disc {
                center: [center.x, center.y],
                radius,
            },
            width,
            height,
        }
    }

    pub fn half_plane(point: Vec2, angle: f64, width: usize, height: usize) -> Self {
        Scene {
            shape: Shape::HalfPlaneEdge {
                point: [point.x, point.y],
                angle,
            },
            width,
            height,
        }
    }

    pub fn polygon(vertices: &[Vec2], width: usize, height: usize) -> Self {
        Scene {
            shape: Shape::Polygon {
                vertices: vertices.iter().map(|v| [v.x, v.y]).collect(),
            },
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width < 2 || self.height < 2 {
            return Err(SynthError::InvalidScene(format!(
                "image must be at least 2x2, got {}x{}",
                self.width, self.height
            )));
        }
        match &self.shape {
            Shape::Disc { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(SynthError::InvalidScene(format!("disc radius must be positive, got {radius}")));
                }
            }
            Shape::HalfPlaneEdge { point, angle } => {
                if !angle.is_finite() || !point.iter().all(|c| c.is_finite()) {
                    return Err(SynthError::InvalidScene("non-finite half-plane edge".into()));
                }
            }
            Shape::Polygon { vertices } => {
                let v: Vec<Vec2> = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                if !v.iter().all(|p| p.x.is_finite() && p.y.is_finite()) || !geometry::is_simple(&v) {
                    return Err(SynthError::InvalidScene("polygon must be simple".into()));
                }
            }
        }
        Ok(())
    }

    /// Exact silhouette area clipped to nothing (the full shape), when bounded.
    pub fn silhouette_area(&self) -> Option<f64> {
        match &self.shape {
            Shape::Disc { radius, .. } => Some(std::f64::consts::PI * radius * radius),
            Shape::Polygon { vertices } => {
                let v: Vec<Vec2> = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                Some(geometry::polygon_area(&v).abs())
            }
            Shape::HalfPlaneEdge { .. } => None,
        }
    }

    /// Silhouette fraction of the pixel square centered at `(i, j)`.
    fn coverage(&self, i: f64, j: f64, polygon: &[Vec2]) -> f64 {
        match &self.shape {
            Shape::Disc { center, radius } => {
                geometry::disc_pixel_area(Vec2::new(center[0], center[1]), *radius, i, j)
            }
            Shape::HalfPlaneEdge { point, angle } => {
                let origin = Vec2::new(point[0], point[1]);
                let normal = Vec2::new(angle.sin(), -angle.cos());
                let d = normal.dot(&(Vec2::new(i, j) - origin));
                // |d| beyond half the diagonal: the square is on one side
                if d >= std::f64::consts::FRAC_1_SQRT_2 {
                    0.0
                } else if d <= -std::f64::consts::FRAC_1_SQRT_2 {
                    1.0
                } else {
                    let part = geometry::clip_half_plane(&geometry::pixel_square(i, j), origin, normal);
                    geometry::polygon_area(&part).abs()
                }
            }
            Shape::Polygon { .. } => geometry::polygon_pixel_area(polygon, i, j),
        }
    }
}

/// Renders `1 - silhouette fraction` for every pixel.
pub fn render(scene: &Scene) -> Result<RasterImage, SynthError> {
    scene.validate()?;
    let polygon: Vec<Vec2> = match &scene.shape {
        Shape::Polygon { vertices } => vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect(),
        _ => Vec::new(),
    };
    let bbox = if polygon.is_empty() {
        None
    } else {
        let lo = polygon.iter().fold(Vec2::repeat(f64::INFINITY), |a, p| a.inf(p));
        let hi = polygon.iter().fold(Vec2::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
        Some((lo, hi))
    };
    let img = RasterImage::from_fn(scene.width, scene.height, |i, j| {
        let (x, y) = (i as f64, j as f64);
        if let Some((lo, hi)) = bbox {
            if x + 0.5 <= lo.x || x - 0.5 >= hi.x || y + 0.5 <= lo.y || y - 0.5 >= hi.y {
                return 1.0;
            }
        }
        (1.0 - scene.coverage(x, y, &polygon)).clamp(0.0, 1.0)
    })?;
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation as a fraction of the dynamic range.
    pub sigma: f64,
    pub seed: u64,
    pub quantize_bits: Option<u8>,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            sigma: 0.0,
            seed: 0,
            quantize_bits: None,
        }
    }
}

/// Adds i.i.d. Gaussian noise in row-major order, then optionally rounds to
/// `2^bits` levels and clamps to `[0, 1]`.
pub fn apply_noise(img: &RasterImage, spec: &NoiseSpec) -> Result<RasterImage, SynthError> {
    if !(spec.sigma >= 0.0) {
        return Err(SynthError::InvalidScene(format!("noise sigma must be non-negative, got {}", spec.sigma)));
    }
    if let Some(bits) = spec.quantize_bits {
        if bits == 0 || bits > 32 {
            return Err(SynthError::InvalidScene(format!("unsupported bit depth {bits}")));
        }
    }
    let mut rng = CounterRng::new(spec.seed);
    let mut data = img.data().to_vec();
    if spec.sigma > 0.0 {
        for v in &mut data {
            *v += spec.sigma * rng.normal();
        }
    }
    let mut bit_depth = img.bit_depth();
    if let Some(bits) = spec.quantize_bits {
        let levels = ((1u64 << bits) - 1) as f64;
        for v in &mut data {
            *v = (v.clamp(0.0, 1.0) * levels).round() / levels;
        }
        bit_depth = Some(bits);
    }
    Ok(RasterImage::new(img.width(), img.height(), data)?.with_bit_depth(bit_depth))
}

/// Quantization noise of a `bits`-deep image, `(2^bits·√12)⁻¹`.
pub fn quantization_sigma(bits: u8) -> f64 {
    1.0 / (2f64.powi(bits as i32) * 12f64.sqrt())
}

/// Disc scene with center and radius each shifted by a uniform draw from
/// `[-0.5, 0.5)` pixel around `base_radius`, on an image leaving at least
/// `half_width + 2` pixels of margin around the widest virtual band.
pub fn disc_trial_scene(base_radius: f64, half_width: f64, rng: &mut CounterRng) -> Scene {
    let dx = rng.uniform_in(-0.5, 0.5);
    let dy = rng.uniform_in(-0.5, 0.5);
    let dr = rng.uniform_in(-0.5, 0.5);
    let half = (base_radius + 1.5 + half_width + 2.0).ceil();
    let size = 2 * half as usize + 1;
    Scene::disc(Vec2::new(half + dx, half + dy), base_radius + dr, size, size)
}
