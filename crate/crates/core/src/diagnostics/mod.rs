//! Quality indicators of a converged measurement and analytic uncertainty
//! predictors.

mod predict;
mod spectrum;

pub use predict::{
    predict_brightness_bias, predict_sigma_d, predict_sigma_n, quantization_noise, report, NoiseEstimate,
    ReportInputs, UncertaintyReport,
};
pub use spectrum::{mu_spectrum, Spectrum, SpectrumPeak};

use std::io::Write;

use serde::Serialize;

use crate::curve::Curve;
use crate::raster::{AffineGrayCorrection, RasterImage};
use crate::vic::grid::{map_to_image, VirtualGrid};
use crate::vic::VicError;

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("x1 samples are not uniformly spaced (sample {index})")]
    NonUniformSampling { index: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error(transparent)]
    Vic(#[from] VicError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Signed distance indicator along the curve.
///
/// `mu > 0` means the boundary seen in the image lies on the `+e_r` side of the
/// curve (outside a positively oriented closed curve), `mu < 0` on the inner side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuProfile {
    pub x1: Vec<f64>,
    /// Arc length from `x1 = 0`, pixels.
    pub s_px: Vec<f64>,
    pub mu: Vec<f64>,
    /// `R·mu`, pixels.
    pub r_mu: Vec<f64>,
    pub half_width: f64,
    /// Total curve length, pixels.
    pub length: f64,
}

impl MuProfile {
    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    pub fn mean_r_mu(&self) -> f64 {
        self.r_mu.iter().sum::<f64>() / self.r_mu.len() as f64
    }
}

/// `mu(x1) = ∫ (½ - f) dx2` by the midpoint rule over each grid column, with the
/// gray correction applied to the sampled values.
pub fn mu_profile(
    img: &RasterImage,
    curve: &Curve,
    grid: &VirtualGrid,
    correction: &AffineGrayCorrection,
) -> Result<MuProfile, DiagnosticsError> {
    let dx2 = 2.0 / grid.n2 as f64;
    let mut out = MuProfile {
        x1: Vec::with_capacity(grid.n1),
        s_px: Vec::with_capacity(grid.n1),
        mu: Vec::with_capacity(grid.n1),
        r_mu: Vec::with_capacity(grid.n1),
        half_width: grid.half_width,
        length: curve.arc_length().map_err(VicError::from)?,
    };
    for k in 0..grid.n1 {
        let x1 = grid.x1(k);
        let frame = curve.frame(x1).map_err(VicError::from)?;
        let mut mu = 0.0;
        for m in 0..grid.n2 {
            let x = map_to_image(&frame, grid.half_width, grid.x2(m));
            let f = correction.apply(img.sample_bilinear(x).map_err(VicError::from)?);
            mu += (0.5 - f) * dx2;
        }
        out.x1.push(x1);
        out.s_px.push(curve.arc_length_to(x1).map_err(VicError::from)?);
        out.mu.push(mu);
        out.r_mu.push(grid.half_width * mu);
    }
    Ok(out)
}

pub fn write_mu_csv<W: Write>(profile: &MuProfile, out: W) -> Result<(), DiagnosticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "s_px", "mu", "R_mu"])?;
    for k in 0..profile.len() {
        w.write_record(&[
            profile.x1[k].to_string(),
            profile.s_px[k].to_string(),
            profile.mu[k].to_string(),
            profile.r_mu[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, out: W) -> Result<(), DiagnosticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["wavelength_px", "amplitude_px"])?;
    for (l, a) in spectrum.wavelengths.iter().zip(&spectrum.amplitudes) {
        w.write_record(&[l.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
