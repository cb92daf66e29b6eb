//! Cost, gradient and Hessians of the virtual-frame mismatch
//! `ψ = ½ ∬ (f - g)² dx1 dx2` evaluated by the midpoint rule on a [`VirtualGrid`].
//!
//! With `∂X/∂λp = ∂X^c/∂λp - R·x2·|∂X^c/∂x1|⁻¹ (∂²X^c/∂λp∂x1 · e_r) e_s` and
//! `J_p = ∇f · ∂X/∂λp`, the gradient is `∬ J_p (f - g)` and the Gauss-Newton
//! Hessian is `∬ J_p J_q`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::grid::{g_level, map_to_image, VirtualGrid};
use super::VicError;
use crate::curve::{Curve, FrameAtPoint};
use crate::raster::{AffineGrayCorrection, RasterImage};
use crate::Vec2;

/// Which image gradient enters the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Bilinear interpolation of central-difference pixel gradients. Continuous
    /// across cells, which keeps the midpoint rule accurate on the 1/3-pixel grid.
    #[default]
    Interpolated,
    /// Exact derivative of the bilinear sampler; piecewise constant per cell.
    /// The gradient is then the true derivative of the discrete cost.
    Bilinear,
}

/// Geometry of one `x1` column of the grid.
#[derive(Debug, Clone)]
pub struct Column {
    pub x1: f64,
    pub frame: FrameAtPoint,
    /// `∂X^c/∂λp`
    pub d_point: Vec<Vec2>,
    /// `-(∂²X^c/∂λp∂x1 · e_r)/|∂X^c/∂x1|`, the `R·x2·e_s` coefficient of `∂X/∂λp`.
    pub normal_rate: Vec<f64>,
}

impl Column {
    fn new(curve: &Curve, x1: f64) -> Result<Self, VicError> {
        let frame = curve.frame(x1)?;
        let d = curve.shape_derivatives(x1);
        let normal_rate = d.tangent.iter().map(|t| -t.dot(&frame.e_r) / frame.speed).collect();
        Ok(Column {
            x1,
            frame,
            d_point: d.point,
            normal_rate,
        })
    }

    /// `∂X/∂λp` at normal offset `x2`.
    #[inline]
    pub fn d_position(&self, p: usize, half_width: f64, x2: f64) -> Vec2 {
        self.d_point[p] + (half_width * x2 * self.normal_rate[p]) * self.frame.e_s
    }
}

/// Raw image samples over the virtual band of one curve.
#[derive(Debug, Clone)]
pub struct BandSamples {
    pub grid: VirtualGrid,
    pub columns: Vec<Column>,
    /// Gray level `F(X)` at sample `k·n2 + m`.
    pub values: Vec<f64>,
    /// `∂F/∂X` at the same samples.
    pub gradients: Vec<Vec2>,
    pub positions: Vec<Vec2>,
    params: usize,
}

impl BandSamples {
    pub fn collect(img: &RasterImage, curve: &Curve, grid: &VirtualGrid, mode: GradientMode) -> Result<Self, VicError> {
        let mut columns = Vec::with_capacity(grid.n1);
        let mut values = Vec::with_capacity(grid.len());
        let mut gradients = Vec::with_capacity(grid.len());
        let mut positions = Vec::with_capacity(grid.len());
        for k in 0..grid.n1 {
            let col = Column::new(curve, grid.x1(k))?;
            for m in 0..grid.n2 {
                let x = map_to_image(&col.frame, grid.half_width, grid.x2(m));
                let (v, g) = match mode {
                    GradientMode::Bilinear => img.sample_with_gradient(x)?,
                    GradientMode::Interpolated => img.sample_with_smooth_gradient(x)?,
                };
                values.push(v);
                gradients.push(g);
                positions.push(x);
            }
            columns.push(col);
        }
        Ok(BandSamples {
            grid: *grid,
            columns,
            values,
            gradients,
            positions,
            params: curve.param_count(),
        })
    }

    pub fn param_count(&self) -> usize {
        self.params
    }

    /// `(x2, F)` pairs for fitting a gray correction.
    pub fn profile_samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n2 = self.grid.n2;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.grid.x2(i % n2), v))
    }

    pub fn fit_correction(&self) -> Result<AffineGrayCorrection, VicError> {
        Ok(AffineGrayCorrection::fit(self.profile_samples())?)
    }

    /// Corrected residual `f - g` and Jacobian row for sample `(k, m)`.
    #[inline]
    fn residual_and_jacobian(&self, k: usize, m: usize, corr: &AffineGrayCorrection, jac: &mut [f64]) -> f64 {
        let idx = k * self.grid.n2 + m;
        let x2 = self.grid.x2(m);
        let grad = self.gradients[idx] * corr.gain();
        let col = &self.columns[k];
        for (p, j) in jac.iter_mut().enumerate() {
            *j = grad.dot(&col.d_position(p, self.grid.half_width, x2));
        }
        corr.apply(self.values[idx]) - g_level(x2)
    }

    pub fn cost(&self, corr: &AffineGrayCorrection) -> f64 {
        let w = self.grid.weight();
        let n2 = self.grid.n2;
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let r = corr.apply(v) - g_level(self.grid.x2(i % n2));
            acc += r * r;
        }
        0.5 * w * acc
    }

    pub fn evaluate(&self, corr: &AffineGrayCorrection) -> Evaluation {
        let n = self.params;
        let w = self.grid.weight();
        let mut gradient = DVector::zeros(n);
        let mut hessian = DMatrix::zeros(n, n);
        let mut cost = 0.0;
        let mut jac = vec![0.0; n];
        for k in 0..self.grid.n1 {
            for m in 0..self.grid.n2 {
                let r = self.residual_and_jacobian(k, m, corr, &mut jac);
                cost += r * r;
                for p in 0..n {
                    if jac[p] == 0.0 {
                        continue;
                    }
                    gradient[p] += jac[p] * r;
                    for q in p..n {
                        hessian[(p, q)] += jac[p] * jac[q];
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..p {
                hessian[(p, q)] = hessian[(q, p)];
            }
        }
        Evaluation {
            cost: 0.5 * w * cost,
            gradient: gradient * w,
            hessian: hessian * w,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub cost: f64,
    pub gradient: DVector<f64>,
    /// Gauss-Newton approximation.
    pub hessian: DMatrix<f64>,
}

pub fn cost_psi(img: &RasterImage, curve: &Curve, grid: &VirtualGrid, corr: &AffineGrayCorrection) -> Result<f64, VicError> {
    Ok(BandSamples::collect(img, curve, grid, GradientMode::Bilinear)?.cost(corr))
}

pub fn grad_psi(
    img: &RasterImage,
    curve: &Curve,
    grid: &VirtualGrid,
    corr: &AffineGrayCorrection,
) -> Result<DVector<f64>, VicError> {
    Ok(BandSamples::collect(img, curve, grid, GradientMode::Bilinear)?.evaluate(corr).gradient)
}

pub fn hessian_gn(
    img: &RasterImage,
    curve: &Curve,
    grid: &VirtualGrid,
    corr: &AffineGrayCorrection,
) -> Result<DMatrix<f64>, VicError> {
    Ok(BandSamples::collect(img, curve, grid, GradientMode::Bilinear)?.evaluate(corr).hessian)
}

/// Full second derivative including the residual-weighted terms
/// `∬ (∂X/∂λp · ∇²f · ∂X/∂λq + ∇f · ∂²X/∂λp∂λq)(f - g)`.
///
/// `∇²F` comes from differencing the bilinear gradient one pixel apart and
/// `∂²X/∂λp∂λq` from central differences of the analytic `∂X/∂λq`. Only meant
/// for checking how much the Gauss-Newton approximation drops.
pub fn hessian_full(
    img: &RasterImage,
    curve: &Curve,
    grid: &VirtualGrid,
    corr: &AffineGrayCorrection,
) -> Result<DMatrix<f64>, VicError> {
    let samples = BandSamples::collect(img, curve, grid, GradientMode::Bilinear)?;
    let n = curve.param_count();
    let w = grid.weight();
    let gain = corr.gain();
    let params = curve.params().as_slice();

    let steps: Vec<f64> = params.iter().map(|v| 1e-5 * v.abs().max(1.0)).collect();
    let shifted = |p: usize, sign: f64| -> Result<Curve, VicError> {
        let mut v = params.to_vec();
        v[p] += sign * steps[p];
        Ok(curve.with_params(v)?)
    };
    let plus: Vec<Curve> = (0..n).map(|p| shifted(p, 1.0)).collect::<Result<_, _>>()?;
    let minus: Vec<Curve> = (0..n).map(|p| shifted(p, -1.0)).collect::<Result<_, _>>()?;

    let mut h = samples.evaluate(corr).hessian;
    let mut extra = DMatrix::<f64>::zeros(n, n);
    for k in 0..grid.n1 {
        let x1 = grid.x1(k);
        let col = &samples.columns[k];
        let cols_plus: Vec<Column> = plus.iter().map(|c| Column::new(c, x1)).collect::<Result<_, _>>()?;
        let cols_minus: Vec<Column> = minus.iter().map(|c| Column::new(c, x1)).collect::<Result<_, _>>()?;
        for m in 0..grid.n2 {
            let idx = k * grid.n2 + m;
            let x2 = grid.x2(m);
            let r = corr.apply(samples.values[idx]) - g_level(x2);
            let grad = samples.gradients[idx] * gain;
            let hf = img.hessian_differenced(samples.positions[idx])?;
            let dx: Vec<Vec2> = (0..n).map(|p| col.d_position(p, grid.half_width, x2)).collect();
            for p in 0..n {
                let hdp = Vec2::new(
                    hf[0][0] * dx[p].x + hf[0][1] * dx[p].y,
                    hf[1][0] * dx[p].x + hf[1][1] * dx[p].y,
                ) * gain;
                for q in 0..n {
                    let second = (cols_plus[p].d_position(q, grid.half_width, x2)
                        - cols_minus[p].d_position(q, grid.half_width, x2))
                        / (2.0 * steps[p]);
                    extra[(p, q)] += (dx[q].dot(&hdp) + grad.dot(&second)) * r;
                }
            }
        }
    }
    let extra = 0.5 * (&extra + extra.transpose());
    h += extra * w;
    Ok(h)
}
