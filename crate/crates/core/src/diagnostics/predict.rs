use serde::{Deserialize, Serialize};

use super::{mu_profile, mu_spectrum, DiagnosticsError, SpectrumPeak};
use crate::curve::Curve;
use crate::raster::{AffineGrayCorrection, RasterImage};
use crate::synth::quantization_sigma;
use crate::vic::grid::VirtualGrid;
use crate::vic::{BandSamples, GradientMode, VicError};

/// Discretization-limited standard deviation `N/(20L)`, pixels.
pub fn predict_sigma_d(n_params: usize, length: f64) -> f64 {
    n_params as f64 / (20.0 * length)
}

/// Rounding noise of a `bits`-deep image, `(2^bits·√12)⁻¹`.
pub fn quantization_noise(bits: Option<u8>) -> f64 {
    bits.map_or(0.0, quantization_sigma)
}

/// Noise-limited standard deviation `σ_eff·√(2N/(RL))`, with the quantization
/// noise of `bits` added in quadrature to `sigma0`.
pub fn predict_sigma_n(sigma0: f64, n_params: usize, half_width: f64, length: f64, bits: Option<u8>) -> f64 {
    let q = quantization_noise(bits);
    let eff = (sigma0 * sigma0 + q * q).sqrt();
    eff * (2.0 * n_params as f64 / (half_width * length)).sqrt()
}

/// Normal shift `δ = 2Rb` caused by an uncorrected luminance offset `b`, pixels.
pub fn predict_brightness_bias(half_width: f64, bias: f64) -> f64 {
    2.0 * half_width * bias
}

/// Caller-supplied image noise description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    /// Gray-level standard deviation as a fraction of the dynamic range.
    pub sigma0: f64,
    /// Overrides the image's own bit depth when set.
    pub bit_depth: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportInputs {
    pub n_params: usize,
    pub length_px: f64,
    pub half_width: f64,
    pub sigma0: f64,
    pub bit_depth: Option<u8>,
    /// Luminance offset fitted on the virtual band.
    pub bias: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub sigma_d: f64,
    pub sigma_n: f64,
    pub sigma_0q: f64,
    pub sigma_eff: f64,
    /// `max(σ_d, σ_n)`
    pub headline: f64,
    /// Bias expected if the luminance offset were left uncorrected, pixels.
    pub predicted_bias: f64,
    pub spectrum_peak: Option<SpectrumPeak>,
    pub inputs: ReportInputs,
}

/// Bundles the predictors for a converged curve on `img`.
pub fn report(
    img: &RasterImage,
    curve: &Curve,
    grid: &VirtualGrid,
    noise: &NoiseEstimate,
) -> Result<UncertaintyReport, DiagnosticsError> {
    let length = curve.arc_length().map_err(VicError::from)?;
    let n = curve.param_count();
    let r = grid.half_width;
    let bits = noise.bit_depth.or(img.bit_depth());
    let samples = BandSamples::collect(img, curve, grid, GradientMode::Bilinear)?;
    let correction = samples.fit_correction().unwrap_or(AffineGrayCorrection::IDENTITY);
    let profile = mu_profile(img, curve, grid, &correction)?;
    let spectrum_peak = mu_spectrum(&profile)?.peak();

    let sigma_d = predict_sigma_d(n, length);
    let sigma_n = predict_sigma_n(noise.sigma0, n, r, length, bits);
    let sigma_0q = quantization_noise(bits);
    Ok(UncertaintyReport {
        sigma_d,
        sigma_n,
        sigma_0q,
        sigma_eff: (noise.sigma0 * noise.sigma0 + sigma_0q * sigma_0q).sqrt(),
        headline: sigma_d.max(sigma_n),
        predicted_bias: predict_brightness_bias(r, correction.bias),
        spectrum_peak,
        inputs: ReportInputs {
            n_params: n,
            length_px: length,
            half_width: r,
            sigma0: noise.sigma0,
            bit_depth: bits,
            bias: correction.bias,
            amplitude: correction.amplitude,
        },
    })
}
