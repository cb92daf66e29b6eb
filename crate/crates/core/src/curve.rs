//! Parametric plane curves and their differential geometry.
//!
//! A [`Curve`] couples a [`CurveFamily`] with its shape parameters and maps the
//! curve abscissa `x1 ∈ [0, 1]` to a point of the pixel frame. The local frame
//! follows `e_s = X'/|X'|` and `e_r = e_s × e_z = (e_s.y, -e_s.x)`, so a closed
//! curve with positive signed (shoelace) area has `e_r` pointing outward.
//!
//! Families:
//!
//! - [`CurveFamily::Segment`]: `[xa, ya, xb, yb]`, the two endpoints.
//! - [`CurveFamily::ConstrainedSegment`]: `[y_mid, angle]` at frozen length and
//!   midpoint abscissa.
//! - [`CurveFamily::Circle`]: `[cx, cy, r]`.
//! - [`CurveFamily::ClosedBSpline`]: uniform periodic B-spline,
//!   `[x0, y0, x1, y1, ...]` for the control points, `x1` mapped linearly onto
//!   the knot spans.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Vec2;

/// Speeds at or below this value (pixels per unit abscissa) make a point stationary.
pub const STATIONARY_EPS: f64 = 1e-9;

/// Sweep points with `speed <= STATIONARY_RELATIVE * mean_speed` fail admissibility.
const STATIONARY_RELATIVE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("curve has a stationary point at x1 = {x1} (speed {speed:e})")]
    StationaryPoint { x1: f64, speed: f64 },
    #[error("{family} expects {expected} parameters, got {got}")]
    ParamCount {
        family: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite shape parameter at index {0}")]
    NonFinite(usize),
    #[error("invalid curve family: {0}")]
    InvalidFamily(String),
}

/// Polynomial degree of a uniform periodic B-spline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplineDegree {
    Quadratic,
    Cubic,
}

impl SplineDegree {
    pub fn order(self) -> usize {
        match self {
            SplineDegree::Quadratic => 3,
            SplineDegree::Cubic => 4,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            SplineDegree::Quadratic => 2,
            SplineDegree::Cubic => 3,
        }
    }

    pub fn from_u8(d: u8) -> Option<Self> {
        match d {
            2 => Some(SplineDegree::Quadratic),
            3 => Some(SplineDegree::Cubic),
            _ => None,
        }
    }

    /// Basis values and first/second derivatives (in the span-local `u`).
    fn basis(self, u: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
        match self {
            SplineDegree::Quadratic => {
                let v = 1.0 - u;
                (
                    [0.5 * v * v, 0.5 * (-2.0 * u * u + 2.0 * u + 1.0), 0.5 * u * u, 0.0],
                    [-v, 1.0 - 2.0 * u, u, 0.0],
                    [1.0, -2.0, 1.0, 0.0],
                )
            }
            SplineDegree::Cubic => {
                let v = 1.0 - u;
                let u2 = u * u;
                let u3 = u2 * u;
                (
                    [
                        v * v * v / 6.0,
                        (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
                        (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0,
                        u3 / 6.0,
                    ],
                    [
                        -0.5 * v * v,
                        0.5 * (3.0 * u2 - 4.0 * u),
                        0.5 * (-3.0 * u2 + 2.0 * u + 1.0),
                        0.5 * u2,
                    ],
                    [v, 3.0 * u - 2.0, 1.0 - 3.0 * u, u],
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveFamily {
    Segment,
    ConstrainedSegment { length: f64, mid_x: f64 },
    Circle,
    ClosedBSpline {
        control_points: usize,
        degree: SplineDegree,
    },
}

impl CurveFamily {
    pub fn param_count(&self) -> usize {
        match self {
            CurveFamily::Segment => 4,
            CurveFamily::ConstrainedSegment { .. } => 2,
            CurveFamily::Circle => 3,
            CurveFamily::ClosedBSpline { control_points, .. } => 2 * control_points,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, CurveFamily::Circle | CurveFamily::ClosedBSpline { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurveFamily::Segment | CurveFamily::ConstrainedSegment { .. } => "segment",
            CurveFamily::Circle => "circle",
            CurveFamily::ClosedBSpline { .. } => "bspline",
        }
    }
}

/// Ordered list of shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurveParams(pub Vec<f64>);

impl CurveParams {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for CurveParams {
    fn from(v: Vec<f64>) -> Self {
        CurveParams(v)
    }
}

/// Position and abscissa derivatives of a curve point.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub point: Vec2,
    /// ∂X/∂x1
    pub d1: Vec2,
    /// ∂²X/∂x1²
    pub d2: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAtPoint {
    pub point: Vec2,
    pub e_s: Vec2,
    pub e_r: Vec2,
    pub speed: f64,
    /// Signed curvature, 1/pixels; positive for a convex positively oriented curve.
    pub curvature: f64,
}

/// `∂X/∂λp` and `∂²X/∂λp∂x1` for every parameter `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDerivatives {
    pub point: Vec<Vec2>,
    pub tangent: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AdmissibilityIssue {
    StationaryPoint { x1: f64, speed: f64 },
    Overlap { x1: f64, rho_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub errors: Vec<AdmissibilityIssue>,
    pub warnings: Vec<AdmissibilityIssue>,
    /// Largest `|ρ|·R` over the sweep and where it occurs.
    pub worst_rho_r: f64,
    pub worst_rho_r_x1: f64,
    pub min_speed: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.errors.is_empty()
    }
}

/// A curve family together with a concrete parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    family: CurveFamily,
    params: CurveParams,
}

impl Curve {
    pub fn new(family: CurveFamily, params: impl Into<CurveParams>) -> Result<Self, CurveError> {
        let params = params.into();
        if let CurveFamily::ClosedBSpline { control_points, .. } = family {
            if control_points < 3 {
                return Err(CurveError::InvalidFamily(format!(
                    "a closed B-spline needs at least 3 control points, got {control_points}"
                )));
            }
        }
        if let CurveFamily::ConstrainedSegment { length, mid_x } = family {
            if !(length.is_finite() && length > 0.0 && mid_x.is_finite()) {
                return Err(CurveError::InvalidFamily(format!(
                    "constrained segment needs a positive finite length, got {length}"
                )));
            }
        }
        if params.len() != family.param_count() {
            return Err(CurveError::ParamCount {
                family: family.name(),
                expected: family.param_count(),
                got: params.len(),
            });
        }
        if let Some(i) = params.0.iter().position(|v| !v.is_finite()) {
            return Err(CurveError::NonFinite(i));
        }
        Ok(Curve { family, params })
    }

    pub fn circle(center: Vec2, radius: f64) -> Self {
        Curve::new(CurveFamily::Circle, vec![center.x, center.y, radius])
            .expect("circle parameters must be finite")
    }

    pub fn segment(a: Vec2, b: Vec2) -> Self {
        Curve::new(CurveFamily::Segment, vec![a.x, a.y, b.x, b.y])
            .expect("segment endpoints must be finite")
    }

    pub fn constrained_segment(length: f64, mid_x: f64, y_mid: f64, angle: f64) -> Result<Self, CurveError> {
        Curve::new(CurveFamily::ConstrainedSegment { length, mid_x }, vec![y_mid, angle])
    }

    pub fn bspline(control: &[Vec2], degree: SplineDegree) -> Result<Self, CurveError> {
        let params: Vec<f64> = control.iter().flat_map(|c| [c.x, c.y]).collect();
        Curve::new(
            CurveFamily::ClosedBSpline {
                control_points: control.len(),
                degree,
            },
            params,
        )
    }

    /// Closed B-spline approximating a circle: control points on a regular
    /// polygon, counterclockwise, scaled so the mean radius of the curve is `radius`.
    pub fn bspline_circle(center: Vec2, radius: f64, control_points: usize, degree: SplineDegree) -> Result<Self, CurveError> {
        let polygon = |scale: f64| -> Vec<Vec2> {
            (0..control_points)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / control_points as f64;
                    center + scale * Vec2::new(a.cos(), a.sin())
                })
                .collect()
        };
        let unit = Curve::bspline(&polygon(1.0), degree)?;
        let m = 64 * control_points;
        let mean: f64 = (0..m)
            .map(|i| (unit.jet((i as f64 + 0.5) / m as f64).point - center).norm())
            .sum::<f64>()
            / m as f64;
        Curve::bspline(&polygon(radius / mean), degree)
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    pub fn params(&self) -> &CurveParams {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Same family, new parameters.
    pub fn with_params(&self, params: impl Into<CurveParams>) -> Result<Self, CurveError> {
        Curve::new(self.family.clone(), params)
    }

    pub fn control_points(&self) -> Option<Vec<Vec2>> {
        match self.family {
            CurveFamily::ClosedBSpline { .. } => Some(
                self.params
                    .0
                    .chunks_exact(2)
                    .map(|c| Vec2::new(c[0], c[1]))
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn jet(&self, x1: f64) -> CurveJet {
        let p = &self.params.0;
        match self.family {
            CurveFamily::Segment => {
                let a = Vec2::new(p[0], p[1]);
                let b = Vec2::new(p[2], p[3]);
                CurveJet {
                    point: a + x1 * (b - a),
                    d1: b - a,
                    d2: Vec2::zeros(),
                }
            }
            CurveFamily::ConstrainedSegment { length, mid_x } => {
                let dir = Vec2::new(p[1].cos(), p[1].sin());
                CurveJet {
                    point: Vec2::new(mid_x, p[0]) + (x1 - 0.5) * length * dir,
                    d1: length * dir,
                    d2: Vec2::zeros(),
                }
            }
            CurveFamily::Circle => {
                let w = 2.0 * PI;
                let (s, c) = (w * x1).sin_cos();
                let r = p[2];
                CurveJet {
                    point: Vec2::new(p[0] + r * c, p[1] + r * s),
                    d1: w * r * Vec2::new(-s, c),
                    d2: -w * w * r * Vec2::new(c, s),
                }
            }
            CurveFamily::ClosedBSpline {
                control_points,
                degree,
            } => {
                let (span, u) = span_of(x1, control_points);
                let (b, db, ddb) = degree.basis(u);
                let scale = control_points as f64;
                let mut jet = CurveJet {
                    point: Vec2::zeros(),
                    d1: Vec2::zeros(),
                    d2: Vec2::zeros(),
                };
                for j in 0..degree.order() {
                    let idx = (span + j) % control_points;
                    let c = Vec2::new(p[2 * idx], p[2 * idx + 1]);
                    jet.point += b[j] * c;
                    jet.d1 += (db[j] * scale) * c;
                    jet.d2 += (ddb[j] * scale * scale) * c;
                }
                jet
            }
        }
    }

    pub fn point(&self, x1: f64) -> Vec2 {
        self.jet(x1).point
    }

    pub fn frame(&self, x1: f64) -> Result<FrameAtPoint, CurveError> {
        frame_from_jet(&self.jet(x1), x1)
    }

    /// Fills `d_point[p] = ∂X/∂λp` and `d_tangent[p] = ∂²X/∂λp∂x1`.
    pub fn shape_derivatives_into(&self, x1: f64, d_point: &mut [Vec2], d_tangent: &mut [Vec2]) {
        let n = self.param_count();
        assert!(d_point.len() >= n && d_tangent.len() >= n);
        let p = &self.params.0;
        match self.family {
            CurveFamily::Segment => {
                d_point[0] = Vec2::new(1.0 - x1, 0.0);
                d_point[1] = Vec2::new(0.0, 1.0 - x1);
                d_point[2] = Vec2::new(x1, 0.0);
                d_point[3] = Vec2::new(0.0, x1);
                d_tangent[0] = Vec2::new(-1.0, 0.0);
                d_tangent[1] = Vec2::new(0.0, -1.0);
                d_tangent[2] = Vec2::new(1.0, 0.0);
                d_tangent[3] = Vec2::new(0.0, 1.0);
            }
            CurveFamily::ConstrainedSegment { length, .. } => {
                let normal_dir = Vec2::new(-p[1].sin(), p[1].cos());
                d_point[0] = Vec2::new(0.0, 1.0);
                d_point[1] = (x1 - 0.5) * length * normal_dir;
                d_tangent[0] = Vec2::zeros();
                d_tangent[1] = length * normal_dir;
            }
            CurveFamily::Circle => {
                let w = 2.0 * PI;
                let (s, c) = (w * x1).sin_cos();
                d_point[0] = Vec2::new(1.0, 0.0);
                d_point[1] = Vec2::new(0.0, 1.0);
                d_point[2] = Vec2::new(c, s);
                d_tangent[0] = Vec2::zeros();
                d_tangent[1] = Vec2::zeros();
                d_tangent[2] = w * Vec2::new(-s, c);
            }
            CurveFamily::ClosedBSpline {
                control_points,
                degree,
            } => {
                d_point[..n].fill(Vec2::zeros());
                d_tangent[..n].fill(Vec2::zeros());
                let (span, u) = span_of(x1, control_points);
                let (b, db, _) = degree.basis(u);
                let scale = control_points as f64;
                for j in 0..degree.order() {
                    let idx = (span + j) % control_points;
                    d_point[2 * idx] += Vec2::new(b[j], 0.0);
                    d_point[2 * idx + 1] += Vec2::new(0.0, b[j]);
                    d_tangent[2 * idx] += Vec2::new(db[j] * scale, 0.0);
                    d_tangent[2 * idx + 1] += Vec2::new(0.0, db[j] * scale);
                }
            }
        }
    }

    pub fn shape_derivatives(&self, x1: f64) -> ShapeDerivatives {
        let n = self.param_count();
        let mut point = vec![Vec2::zeros(); n];
        let mut tangent = vec![Vec2::zeros(); n];
        self.shape_derivatives_into(x1, &mut point, &mut tangent);
        ShapeDerivatives { point, tangent }
    }

    /// Curve length by composite Simpson quadrature of the speed.
    pub fn arc_length(&self) -> Result<f64, CurveError> {
        self.arc_length_to(1.0)
    }

    /// Curvilinear abscissa `s(x1)`.
    pub fn arc_length_to(&self, x1: f64) -> Result<f64, CurveError> {
        if x1 <= 0.0 {
            return Ok(0.0);
        }
        let speed = |t: f64| -> Result<f64, CurveError> {
            let s = self.jet(t).d1.norm();
            if s <= STATIONARY_EPS {
                Err(CurveError::StationaryPoint { x1: t, speed: s })
            } else {
                Ok(s)
            }
        };
        let knots = match self.family {
            CurveFamily::ClosedBSpline { control_points, .. } => control_points,
            _ => 1,
        };
        let polyline: f64 = (0..64)
            .map(|i| {
                let a = x1 * i as f64 / 64.0;
                let b = x1 * (i + 1) as f64 / 64.0;
                (self.point(b) - self.point(a)).norm()
            })
            .sum();
        let mut panels = (4.0 * polyline).ceil().max(64.0) as usize;
        panels = panels.div_ceil(knots) * knots;
        let simpson = |n: usize| -> Result<f64, CurveError> {
            let h = x1 / n as f64;
            let mut acc = 0.0;
            let mut left = speed(0.0)?;
            for i in 0..n {
                let a = i as f64 * h;
                let mid = speed(a + 0.5 * h)?;
                let right = speed(a + h)?;
                acc += h / 6.0 * (left + 4.0 * mid + right);
                left = right;
            }
            Ok(acc)
        };
        let mut prev = simpson(panels)?;
        for _ in 0..12 {
            panels *= 2;
            let next = simpson(panels)?;
            if (next - prev).abs() <= 1e-7 * next.abs() {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }

    /// Shoelace area of a dense polygonal sampling; positive for positive orientation.
    pub fn signed_area(&self) -> f64 {
        let m = match self.family {
            CurveFamily::ClosedBSpline { control_points, .. } => 64 * control_points,
            _ => 2048,
        };
        let pts: Vec<Vec2> = (0..m).map(|i| self.point(i as f64 / m as f64)).collect();
        let mut area = 0.0;
        for i in 0..m {
            let a = pts[i];
            let b = pts[(i + 1) % m];
            area += a.x * b.y - a.y * b.x;
        }
        0.5 * area
    }

    /// Returns a copy with positive orientation (closed families only).
    pub fn oriented_positive(&self) -> Curve {
        match self.family {
            CurveFamily::Circle if self.params.0[2] < 0.0 => {
                let mut p = self.params.0.clone();
                p[2] = -p[2];
                Curve::new(self.family.clone(), p).expect("same shape")
            }
            CurveFamily::ClosedBSpline { degree, .. } if self.signed_area() < 0.0 => {
                let mut ctrl = self.control_points().expect("bspline");
                ctrl.reverse();
                Curve::bspline(&ctrl, degree).expect("same shape")
            }
            _ => self.clone(),
        }
    }

    /// Applies `X ↦ rot(angle)·X + t` to the parameters, where the family allows it.
    pub fn rigid_transform(&self, angle: f64, t: Vec2) -> Option<Curve> {
        let (s, c) = angle.sin_cos();
        let map = |v: Vec2| Vec2::new(c * v.x - s * v.y + t.x, s * v.x + c * v.y + t.y);
        let p = &self.params.0;
        let params = match self.family {
            CurveFamily::Circle => {
                let m = map(Vec2::new(p[0], p[1]));
                vec![m.x, m.y, p[2]]
            }
            CurveFamily::Segment | CurveFamily::ClosedBSpline { .. } => p
                .chunks_exact(2)
                .flat_map(|q| {
                    let m = map(Vec2::new(q[0], q[1]));
                    [m.x, m.y]
                })
                .collect(),
            CurveFamily::ConstrainedSegment { .. } if angle == 0.0 && t.x == 0.0 => {
                vec![p[0] + t.y, p[1]]
            }
            CurveFamily::ConstrainedSegment { .. } => return None,
        };
        Some(Curve::new(self.family.clone(), params).expect("finite"))
    }

    /// Sweeps `x1` for stationary points (error) and `|ρ|R ≥ 1` overlap (warning).
    pub fn check_admissibility(&self, half_width: f64) -> AdmissibilityReport {
        let m = match self.family {
            CurveFamily::ClosedBSpline { control_points, .. } => 64 * control_points,
            _ => 1024,
        };
        let closed = self.family.is_closed();
        let count = if closed { m } else { m + 1 };
        let jets: Vec<(f64, CurveJet)> = (0..count)
            .map(|i| {
                let x1 = i as f64 / m as f64;
                (x1, self.jet(x1))
            })
            .collect();
        let mean_speed = jets.iter().map(|(_, j)| j.d1.norm()).sum::<f64>() / count as f64;
        let threshold = (STATIONARY_RELATIVE * mean_speed).max(STATIONARY_EPS);

        let mut report = AdmissibilityReport {
            errors: Vec::new(),
            warnings: Vec::new(),
            worst_rho_r: 0.0,
            worst_rho_r_x1: 0.0,
            min_speed: f64::INFINITY,
        };
        let mut min_at = 0.0;
        for (x1, jet) in &jets {
            let speed = jet.d1.norm();
            if speed < report.min_speed {
                report.min_speed = speed;
                min_at = *x1;
            }
            if speed <= threshold {
                continue;
            }
            if let Ok(frame) = frame_from_jet(jet, *x1) {
                let rho_r = frame.curvature.abs() * half_width;
                if rho_r > report.worst_rho_r {
                    report.worst_rho_r = rho_r;
                    report.worst_rho_r_x1 = *x1;
                }
            }
        }
        if report.min_speed <= threshold {
            report.errors.push(AdmissibilityIssue::StationaryPoint {
                x1: min_at,
                speed: report.min_speed,
            });
        }
        if report.worst_rho_r >= 1.0 {
            report.warnings.push(AdmissibilityIssue::Overlap {
                x1: report.worst_rho_r_x1,
                rho_r: report.worst_rho_r,
            });
        }
        report
    }
}

fn span_of(x1: f64, control_points: usize) -> (usize, f64) {
    let t = x1.rem_euclid(1.0) * control_points as f64;
    let k = t.floor();
    let span = (k as usize).min(control_points - 1);
    (span, t - span as f64)
}

pub fn frame_from_jet(jet: &CurveJet, x1: f64) -> Result<FrameAtPoint, CurveError> {
    let speed = jet.d1.norm();
    if speed <= STATIONARY_EPS || !speed.is_finite() {
        return Err(CurveError::StationaryPoint { x1, speed });
    }
    let e_s = jet.d1 / speed;
    let e_r = Vec2::new(e_s.y, -e_s.x);
    let curvature = -jet.d2.dot(&e_r) / (speed * speed);
    Ok(FrameAtPoint {
        point: jet.point,
        e_s,
        e_r,
        speed,
        curvature,
    })
}

#[derive(Serialize, Deserialize)]
struct CurveDocument {
    family: String,
    params: Vec<f64>,
    #[serde(default)]
    meta: Map<String, Value>,
}

impl Serialize for Curve {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut meta = Map::new();
        match self.family {
            CurveFamily::ConstrainedSegment { length, mid_x } => {
                meta.insert("length".into(), length.into());
                meta.insert("mid_x".into(), mid_x.into());
            }
            CurveFamily::ClosedBSpline {
                control_points,
                degree,
            } => {
                meta.insert("control_points".into(), control_points.into());
                meta.insert("degree".into(), degree.as_u8().into());
            }
            _ => {}
        }
        CurveDocument {
            family: self.family.name().to_string(),
            params: self.params.0.clone(),
            meta,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = CurveDocument::deserialize(deserializer)?;
        let num = |key: &str| doc.meta.get(key).and_then(Value::as_f64);
        let family = match doc.family.as_str() {
            "circle" => CurveFamily::Circle,
            "segment" => match (num("length"), num("mid_x")) {
                (Some(length), Some(mid_x)) => CurveFamily::ConstrainedSegment { length, mid_x },
                _ => CurveFamily::Segment,
            },
            "bspline" => {
                let control_points = doc
                    .meta
                    .get("control_points")
                    .and_then(Value::as_u64)
                    .map(|v| v as usize)
                    .unwrap_or(doc.params.len() / 2);
                let degree = match doc.meta.get("degree").and_then(Value::as_u64) {
                    None => SplineDegree::Cubic,
                    Some(d) => SplineDegree::from_u8(d as u8)
                        .ok_or_else(|| D::Error::custom(format!("unsupported B-spline degree {d}")))?,
                };
                CurveFamily::ClosedBSpline {
                    control_points,
                    degree,
                }
            }
            other => return Err(D::Error::custom(format!("unknown curve family {other:?}"))),
        };
        Curve::new(family, doc.params).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decagon(radius: f64) -> Vec<Vec2> {
        (0..10)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 10.0;
                Vec2::new(radius * a.cos(), radius * a.sin())
            })
            .collect()
    }

    #[test]
    fn circle_frame_at_origin() {
        let c = Curve::circle(Vec2::zeros(), 100.0);
        let f = c.frame(0.0).unwrap();
        assert!((f.point - Vec2::new(100.0, 0.0)).norm() < 1e-12);
        assert!((f.e_s - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((f.e_r - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((f.curvature - 0.01).abs() < 1e-14);
    }

    #[test]
    fn segment_frame_is_flat() {
        let s = Curve::segment(Vec2::zeros(), Vec2::new(10.0, 0.0));
        for x1 in [0.0, 0.3, 1.0] {
            let f = s.frame(x1).unwrap();
            assert_eq!(f.e_s, Vec2::new(1.0, 0.0));
            assert_eq!(f.e_r, Vec2::new(0.0, -1.0));
            assert_eq!(f.curvature, 0.0);
        }
    }

    #[test]
    fn cubic_decagon_is_convex() {
        let b = Curve::bspline(&decagon(100.0), SplineDegree::Cubic).unwrap();
        for i in 0..1000 {
            let f = b.frame(i as f64 / 1000.0).unwrap();
            assert!(f.curvature > 0.0, "x1 = {}", i as f64 / 1000.0);
        }
    }

    #[test]
    fn closed_families_wrap_around() {
        let b = Curve::bspline(&decagon(50.0), SplineDegree::Cubic).unwrap();
        let j0 = b.jet(0.0);
        let j1 = b.jet(1.0);
        assert!((j0.point - j1.point).norm() < 1e-12);
        assert!((j0.d1 - j1.d1).norm() < 1e-9);
        let q = Curve::bspline(&decagon(50.0), SplineDegree::Quadratic).unwrap();
        assert!((q.jet(0.0).point - q.jet(1.0 - 1e-15).point).norm() < 1e-9);
    }

    #[test]
    fn arc_lengths() {
        let c = Curve::circle(Vec2::new(5.0, -3.0), 100.0);
        assert!((c.arc_length().unwrap() - 2.0 * PI * 100.0).abs() < 0.01);
        let s = Curve::segment(Vec2::zeros(), Vec2::new(100.0, 0.0));
        assert_eq!(s.arc_length().unwrap(), 100.0);
        let small = Curve::circle(Vec2::zeros(), 3.0);
        assert!((small.arc_length().unwrap() - 18.85).abs() < 0.01);
    }

    #[test]
    fn circle_shape_derivatives() {
        let c = Curve::circle(Vec2::new(1.0, 2.0), 7.0);
        let d = c.shape_derivatives(0.0);
        assert!((d.point[2] - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        for x1 in [0.0, 0.2, 0.7] {
            let d = c.shape_derivatives(x1);
            assert_eq!(d.point[0], Vec2::new(1.0, 0.0));
        }
    }

    #[test]
    fn admissibility_overlap_warnings() {
        let big = Curve::circle(Vec2::zeros(), 100.0).check_admissibility(2.0);
        assert!(big.is_admissible());
        assert!(big.warnings.is_empty());
        assert!((big.worst_rho_r - 0.02).abs() < 1e-12);

        let small = Curve::circle(Vec2::zeros(), 1.5).check_admissibility(2.0);
        assert!(small.is_admissible());
        assert_eq!(small.warnings.len(), 1);
        assert!((small.worst_rho_r - 2.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn coincident_control_points_are_stationary() {
        // Three coincident points collapse the derivative at the knot between them.
        let mut ctrl = decagon(100.0);
        ctrl[4] = ctrl[3];
        ctrl[5] = ctrl[3];
        let b = Curve::bspline(&ctrl, SplineDegree::Cubic).unwrap();
        let report = b.check_admissibility(2.0);
        assert!(!report.is_admissible());
        assert!(matches!(report.errors[0], AdmissibilityIssue::StationaryPoint { .. }));
        assert!(report.min_speed < 1e-9);
        assert!(matches!(b.arc_length(), Err(CurveError::StationaryPoint { .. })));
    }

    #[test]
    fn orientation_helper_reverses_clockwise_splines() {
        let mut ctrl = decagon(20.0);
        ctrl.reverse();
        let cw = Curve::bspline(&ctrl, SplineDegree::Cubic).unwrap();
        assert!(cw.signed_area() < 0.0);
        let ccw = cw.oriented_positive();
        assert!(ccw.signed_area() > 0.0);
        let f = ccw.frame(0.1).unwrap();
        // outward normal points away from the centroid
        assert!(f.point.dot(&f.e_r) > 0.0);
    }

    #[test]
    fn bspline_circle_has_requested_mean_radius() {
        for degree in [SplineDegree::Quadratic, SplineDegree::Cubic] {
            let b = Curve::bspline_circle(Vec2::new(3.0, 4.0), 100.0, 10, degree).unwrap();
            let m = 5000;
            let mean = (0..m)
                .map(|i| (b.point((i as f64 + 0.5) / m as f64) - Vec2::new(3.0, 4.0)).norm())
                .sum::<f64>()
                / m as f64;
            assert!((mean - 100.0).abs() < 1e-3);
        }
    }

    #[test]
    fn bad_parameter_counts_are_rejected() {
        assert!(matches!(
            Curve::new(CurveFamily::Circle, vec![1.0, 2.0]),
            Err(CurveError::ParamCount { expected: 3, got: 2, .. })
        ));
        assert!(matches!(
            Curve::new(CurveFamily::Circle, vec![1.0, f64::NAN, 2.0]),
            Err(CurveError::NonFinite(1))
        ));
    }

    #[test]
    fn json_documents() {
        let c = Curve::circle(Vec2::new(1.0, 2.0), 3.0);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"family":"circle","params":[1.0,2.0,3.0],"meta":{}}"#);
        let back: Curve = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);

        let seg = Curve::constrained_segment(100.0, 50.0, 40.0, 0.1).unwrap();
        let back: Curve = serde_json::from_str(&serde_json::to_string(&seg).unwrap()).unwrap();
        assert_eq!(back, seg);

        let b: Curve = serde_json::from_str(
            r#"{"family":"bspline","params":[0,0, 10,0, 10,10, 0,10],"meta":{"degree":2}}"#,
        )
        .unwrap();
        assert_eq!(
            b.family(),
            &CurveFamily::ClosedBSpline {
                control_points: 4,
                degree: SplineDegree::Quadratic
            }
        );
        assert!(serde_json::from_str::<Curve>(r#"{"family":"ellipse","params":[]}"#).is_err());
    }
}
