//! Starting curves from a 0.5 threshold of the image.

use super::VicError;
use crate::curve::{Curve, SplineDegree};
use crate::raster::RasterImage;
use crate::Vec2;

const THRESHOLD: f64 = 0.5;

fn dark_pixels(img: &RasterImage) -> impl Iterator<Item = Vec2> + '_ {
    (0..img.height()).flat_map(move |j| {
        (0..img.width())
            .filter(move |&i| img.get(i, j) < THRESHOLD)
            .map(move |i| Vec2::new(i as f64, j as f64))
    })
}

/// Centroid and equivalent-area radius of the thresholded silhouette.
pub fn init_circle(img: &RasterImage) -> Result<Curve, VicError> {
    let (mut sum, mut count) = (Vec2::zeros(), 0usize);
    for p in dark_pixels(img) {
        sum += p;
        count += 1;
    }
    if count == 0 {
        return Err(VicError::NoEdge("no pixel below the 0.5 threshold".into()));
    }
    let center = sum / count as f64;
    let radius = (count as f64 / std::f64::consts::PI).sqrt();
    Ok(Curve::circle(center, radius))
}

/// Closed B-spline on the equivalent circle of the thresholded silhouette.
pub fn init_bspline(img: &RasterImage, control_points: usize, degree: SplineDegree) -> Result<Curve, VicError> {
    let circle = init_circle(img)?;
    let p = circle.params().as_slice();
    Ok(Curve::bspline_circle(Vec2::new(p[0], p[1]), p[2], control_points, degree)?)
}

/// Pixels whose thresholded class differs from a 4-neighbour.
fn boundary_pixels(img: &RasterImage) -> Vec<Vec2> {
    let (w, h) = (img.width(), img.height());
    let dark = |i: usize, j: usize| img.get(i, j) < THRESHOLD;
    let mut out = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let d = dark(i, j);
            let differs = (i + 1 < w && dark(i + 1, j) != d) || (j + 1 < h && dark(i, j + 1) != d);
            if differs {
                out.push(Vec2::new(i as f64 + 0.5, j as f64 + 0.5));
            }
        }
    }
    out
}

/// Principal axis of the threshold boundary: `(mean point, unit direction, half extent)`.
/// The direction is chosen so that `e_r` points towards the bright side.
fn principal_line(img: &RasterImage) -> Result<(Vec2, Vec2, f64), VicError> {
    let pts = boundary_pixels(img);
    if pts.len() < 2 {
        return Err(VicError::NoEdge("no threshold boundary found".into()));
    }
    let mean = pts.iter().sum::<Vec2>() / pts.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut dir = Vec2::new(angle.cos(), angle.sin());
    let mut along = pts.iter().map(|p| (p - mean).dot(&dir)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    let normal = Vec2::new(dir.y, -dir.x);
    let probe = |s: f64| {
        let q = mean + normal * s;
        img.sample_bilinear(q).unwrap_or(f64::NAN)
    };
    let (outside, inside) = (probe(2.0), probe(-2.0));
    if outside.is_nan() || inside.is_nan() {
        return Err(VicError::NoEdge("edge too close to the image border".into()));
    }
    if outside < inside {
        dir = -dir;
        along = (-along.1, -along.0);
    }
    let half = 0.5 * (along.1 - along.0);
    let center = mean + dir * (0.5 * (along.0 + along.1));
    Ok((center, dir, half))
}

/// Segment along the principal axis of the threshold boundary, shortened by
/// `margin` pixels at each end.
pub fn init_segment(img: &RasterImage, margin: f64) -> Result<Curve, VicError> {
    let (center, dir, half) = principal_line(img)?;
    let half = half - margin;
    if !(half > 0.5) {
        return Err(VicError::NoEdge("threshold boundary shorter than the margins".into()));
    }
    Ok(Curve::segment(center - dir * half, center + dir * half))
}

/// Constrained segment of fixed `length` centered at abscissa `mid_x`.
pub fn init_constrained_segment(img: &RasterImage, length: f64, mid_x: f64) -> Result<Curve, VicError> {
    let (center, dir, _) = principal_line(img)?;
    if dir.x.abs() < 1e-6 {
        return Err(VicError::NoEdge("edge is vertical; ordinate parametrization undefined".into()));
    }
    let y_mid = center.y + (mid_x - center.x) * dir.y / dir.x;
    Ok(Curve::constrained_segment(length, mid_x, y_mid, dir.y.atan2(dir.x))?)
}
