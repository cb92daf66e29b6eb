use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{DiagnosticsError, MuProfile};

/// Single-sided amplitude spectrum of a periodic signal sampled uniformly over
/// one curve length. A sinusoid of amplitude `A` at harmonic `k` reports `A` at
/// wavelength `L/k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Mean value of the signal.
    pub dc: f64,
    /// Harmonic numbers `k = 1, 2, ...`, up to Nyquist.
    pub harmonics: Vec<usize>,
    /// `L/k`, pixels, strictly decreasing.
    pub wavelengths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Whether the last harmonic is the Nyquist bin of an even-length signal.
    pub has_nyquist: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPeak {
    pub harmonic: usize,
    pub wavelength_px: f64,
    pub amplitude_px: f64,
}

impl Spectrum {
    /// Largest non-constant component.
    pub fn peak(&self) -> Option<SpectrumPeak> {
        self.amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &a)| SpectrumPeak {
                harmonic: self.harmonics[i],
                wavelength_px: self.wavelengths[i],
                amplitude_px: a,
            })
    }

    /// Amplitude at harmonic `k`, if present.
    pub fn amplitude_at(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.amplitudes.get(i)).copied()
    }

    /// Mean square of the signal recovered from the amplitudes.
    pub fn mean_square(&self) -> f64 {
        let n = self.amplitudes.len();
        let mut acc = self.dc * self.dc;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if self.has_nyquist && i + 1 == n {
                acc += a * a;
            } else {
                acc += 0.5 * a * a;
            }
        }
        acc
    }
}

/// Amplitude spectrum of `values`, taken as one period of length `length`.
pub fn amplitude_spectrum(values: &[f64], length: f64) -> Result<Spectrum, DiagnosticsError> {
    let m = values.len();
    if m < 2 {
        return Err(DiagnosticsError::TooFewSamples { needed: 2, got: m });
    }
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let top = m / 2;
    let has_nyquist = m % 2 == 0;
    let mut harmonics = Vec::with_capacity(top);
    let mut wavelengths = Vec::with_capacity(top);
    let mut amplitudes = Vec::with_capacity(top);
    for (k, c) in buf.iter().enumerate().take(top + 1).skip(1) {
        let factor = if has_nyquist && k == top { 1.0 } else { 2.0 };
        harmonics.push(k);
        wavelengths.push(length / k as f64);
        amplitudes.push(factor * c.norm() * scale);
    }
    Ok(Spectrum {
        dc: buf[0].re * scale,
        harmonics,
        wavelengths,
        amplitudes,
        has_nyquist,
    })
}

/// Spectrum of `R·mu` over the curve length.
pub fn mu_spectrum(profile: &MuProfile) -> Result<Spectrum, DiagnosticsError> {
    let n = profile.x1.len();
    if n < 2 {
        return Err(DiagnosticsError::TooFewSamples { needed: 2, got: n });
    }
    let step = 1.0 / n as f64;
    for (i, &x) in profile.x1.iter().enumerate() {
        let expected = (i as f64 + 0.5) * step;
        if (x - expected).abs() > 1e-9 * step.max(1e-3) {
            return Err(DiagnosticsError::NonUniformSampling { index: i });
        }
    }
    amplitude_spectrum(&profile.r_mu, profile.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn profile(r_mu: Vec<f64>, length: f64) -> MuProfile {
        let n = r_mu.len();
        MuProfile {
            x1: (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect(),
            s_px: (0..n).map(|k| (k as f64 + 0.5) / n as f64 * length).collect(),
            mu: r_mu.iter().map(|v| v / 2.0).collect(),
            r_mu,
            half_width: 2.0,
            length,
        }
    }

    #[test]
    fn constant_signal_has_only_dc() {
        let s = mu_spectrum(&profile(vec![0.3; 64], 100.0)).unwrap();
        assert!((s.dc - 0.3).abs() < 1e-14);
        assert!(s.amplitudes.iter().all(|a| *a < 1e-12));
    }

    #[test]
    fn sinusoid_amplitude_is_recovered() {
        let n = 1885;
        let l = 628.3;
        let v: Vec<f64> = (0..n).map(|k| 0.05 * (2.0 * PI * 10.0 * (k as f64 + 0.5) / n as f64).sin()).collect();
        let s = mu_spectrum(&profile(v, l)).unwrap();
        let peak = s.peak().unwrap();
        assert_eq!(peak.harmonic, 10);
        assert!((peak.amplitude_px - 0.05).abs() < 1e-12);
        assert!((peak.wavelength_px - l / 10.0).abs() < 1e-12);
        for (i, a) in s.amplitudes.iter().enumerate() {
            if i != 9 {
                assert!(*a < 1e-10);
            }
        }
        assert!(s.wavelengths.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn parseval() {
        for n in [63, 64] {
            let v: Vec<f64> = (0..n).map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.01 + 0.002).collect();
            let s = mu_spectrum(&profile(v.clone(), 50.0)).unwrap();
            let ms = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
            assert!((s.mean_square() - ms).abs() <= 1e-9 * ms);
        }
    }

    #[test]
    fn rejects_irregular_abscissas() {
        let mut p = profile(vec![0.0; 16], 10.0);
        p.x1[3] += 0.01;
        assert!(matches!(mu_spectrum(&p), Err(DiagnosticsError::NonUniformSampling { index: 3 })));
    }
}
