//! Seeded Monte-Carlo studies of the solver on synthetic silhouettes.
//!
//! Every trial draws from its own [`CounterRng`] stream keyed by
//! `(seed, trial index)`, so results do not depend on the number of worker
//! threads or on the order in which trials finish.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, CurveError, SplineDegree};
use crate::diagnostics::{predict_sigma_d, predict_sigma_n};
use crate::raster::{RasterError, RasterImage};
use crate::synth::{apply_noise, disc_trial_scene, render, CounterRng, NoiseSpec, Scene, Shape, SynthError};
use crate::vic::{pixel_integrated_step, solve, solve_1d, MeasurementResult, SolveOptions, VicError};
use crate::Vec2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VICONTOUR_THREADS";

/// Points per trial at which curve-to-truth distances are evaluated.
const DISTANCE_SAMPLES: usize = 1024;

/// Half-widths swept by the 1D study.
pub const ONE_D_HALF_WIDTHS: [f64; 3] = [1.6, 2.0, 3.0];

/// Contrast and bias pairs of the brightness study.
pub const BIAS_GRID: [(f64, f64); 9] = [
    (1.0, 0.0),
    (1.0, 0.02),
    (1.0, -0.02),
    (1.0, 0.05),
    (1.0, -0.05),
    (0.8, 0.0),
    (0.5, 0.0),
    (0.8, 0.05),
    (0.5, -0.05),
];

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Vic(#[from] VicError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Disc,
    Segment,
    OneD,
    Bias,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Disc => "disc",
            StudyKind::Segment => "segment",
            StudyKind::OneD => "one_d",
            StudyKind::Bias => "bias",
        }
    }
}

/// Curve family fitted in disc studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiscFamily {
    Circle,
    Bspline { control_points: usize, degree: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub kind: StudyKind,
    /// Number of trials. Ignored by the segment, 1D and bias studies, whose
    /// trial sets are fixed sweeps.
    pub trials: usize,
    pub seed: u64,
    /// Virtual image half-width `R`, pixels.
    pub half_width: f64,
    /// Gaussian noise, fraction of the dynamic range.
    pub sigma0: f64,
    pub quantize_bits: Option<u8>,
    /// Disc radius for the disc and bias studies, pixels.
    pub radius: f64,
    /// Segment window length, pixels.
    pub length: f64,
    /// Levels per swept variable in the segment study.
    pub levels: usize,
    /// Half-widths of the 1D study.
    pub half_widths: Vec<f64>,
    pub family: DiscFamily,
    /// Gray correction during solves. The bias study runs both settings.
    pub correction: bool,
    /// Initial guesses are the truth shifted by a uniform draw in
    /// `[-init_offset, init_offset)` pixels per parameter.
    pub init_offset: f64,
    /// Worker threads; falls back to `VICONTOUR_THREADS`, then to all cores.
    pub threads: Option<usize>,
    /// Directory receiving the CSV records and JSON summary.
    pub output: Option<PathBuf>,
}

impl StudyConfig {
    fn base(kind: StudyKind) -> Self {
        StudyConfig {
            kind,
            trials: 1,
            seed: 42,
            half_width: 2.0,
            sigma0: 0.0,
            quantize_bits: None,
            radius: 100.0,
            length: 100.0,
            levels: 10,
            half_widths: ONE_D_HALF_WIDTHS.to_vec(),
            family: DiscFamily::Circle,
            correction: false,
            init_offset: 0.5,
            threads: None,
            output: None,
        }
    }

    /// 8-bit disc trials around `radius`, solved with the gray correction.
    pub fn disc(radius: f64, sigma0: f64, trials: usize, seed: u64) -> Self {
        StudyConfig {
            trials,
            seed,
            radius,
            sigma0,
            quantize_bits: Some(8),
            correction: true,
            ..Self::base(StudyKind::Disc)
        }
    }

    pub fn segment(length: f64, levels: usize, half_width: f64) -> Self {
        StudyConfig {
            length,
            levels,
            half_width,
            ..Self::base(StudyKind::Segment)
        }
    }

    pub fn one_d() -> Self {
        Self::base(StudyKind::OneD)
    }

    pub fn bias(radius: f64, seed: u64) -> Self {
        StudyConfig {
            radius,
            seed,
            ..Self::base(StudyKind::Bias)
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.half_width > 0.0) {
            return bad(format!("half-width must be positive, got {}", self.half_width));
        }
        if !(self.sigma0 >= 0.0) {
            return bad(format!("noise must be non-negative, got {}", self.sigma0));
        }
        if !(self.init_offset >= 0.0) {
            return bad(format!("initial offset must be non-negative, got {}", self.init_offset));
        }
        match self.kind {
            StudyKind::Disc | StudyKind::Bias if !(self.radius > 1.0) => {
                bad(format!("radius must exceed one pixel, got {}", self.radius))
            }
            StudyKind::Segment if !(self.length >= 2.0) || self.levels == 0 => {
                bad(format!("segment study needs length >= 2 and levels >= 1, got {} and {}", self.length, self.levels))
            }
            StudyKind::OneD if self.half_widths.iter().any(|r| !(*r > 0.0)) || self.half_widths.is_empty() => {
                bad("1D study needs positive half-widths".into())
            }
            _ => Ok(()),
        }
    }

    fn solve_options(&self, correction: bool) -> SolveOptions {
        SolveOptions {
            half_width: self.half_width,
            correction,
            ..SolveOptions::default()
        }
    }

    fn noisy(&self, img: RasterImage, seed: u64) -> Result<RasterImage, BenchError> {
        if self.sigma0 == 0.0 && self.quantize_bits.is_none() {
            return Ok(img);
        }
        let spec = NoiseSpec {
            sigma: self.sigma0,
            seed,
            quantize_bits: self.quantize_bits,
        };
        Ok(apply_noise(&img, &spec)?)
    }
}

/// Outcome of one trial. `truth` holds the scene description and `measured`
/// the converged parameters (empty when the solve failed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub truth: Vec<f64>,
    pub initial: Vec<f64>,
    pub measured: Vec<f64>,
    /// Value `error` would take for an ideal measurement.
    pub expected: f64,
    /// Signed error, pixels.
    pub error: f64,
    /// Root mean square of the pointwise error along the curve, pixels.
    pub error_rms: f64,
    pub center_error: Option<f64>,
    pub iterations: usize,
    pub psi: f64,
    pub converged: bool,
    pub failure: Option<String>,
}

impl TrialRecord {
    fn pending(index: usize, truth: Vec<f64>, initial: Vec<f64>, expected: f64) -> Self {
        TrialRecord {
            index,
            truth,
            initial,
            measured: Vec::new(),
            expected,
            error: f64::NAN,
            error_rms: f64::NAN,
            center_error: None,
            iterations: 0,
            psi: f64::NAN,
            converged: false,
            failure: None,
        }
    }

    fn fail(mut self, e: impl std::fmt::Display) -> Self {
        self.failure = Some(e.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub records: Vec<TrialRecord>,
    /// Converged trials entering the aggregates.
    pub count: usize,
    pub failures: usize,
    /// Mean signed error `m`, pixels.
    pub mean: f64,
    /// Standard deviation `σ`, pixels. Sample deviation of the trial errors
    /// for disc studies; pooled over every curve point for segment studies.
    pub std: f64,
    /// Largest `|error - expected|`.
    pub max_abs_deviation: f64,
    pub predicted_sigma_d: Option<f64>,
    pub predicted_sigma_n: Option<f64>,
}

impl StudyResult {
    fn aggregate(config: StudyConfig, records: Vec<TrialRecord>, pooled: bool) -> Self {
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.converged).collect();
        let count = ok.len();
        let failures = records.len() - count;
        let mean = ok.iter().map(|r| r.error).sum::<f64>() / count as f64;
        let std = if pooled {
            let ms = ok.iter().map(|r| r.error_rms * r.error_rms).sum::<f64>() / count as f64;
            (ms - mean * mean).max(0.0).sqrt()
        } else if count > 1 {
            (ok.iter().map(|r| (r.error - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        let max_abs_deviation = ok.iter().map(|r| (r.error - r.expected).abs()).fold(0.0, f64::max);
        StudyResult {
            config,
            records,
            count,
            failures,
            mean,
            std,
            max_abs_deviation,
            predicted_sigma_d: None,
            predicted_sigma_n: None,
        }
    }

    pub fn summary(&self) -> StudySummary<'_> {
        StudySummary {
            config: &self.config,
            trials: self.records.len(),
            count: self.count,
            failures: self.failures,
            mean: self.mean,
            std: self.std,
            max_abs_deviation: self.max_abs_deviation,
            predicted_sigma_d: self.predicted_sigma_d,
            predicted_sigma_n: self.predicted_sigma_n,
        }
    }
}

/// The aggregates of a [`StudyResult`], without the per-trial records.
#[derive(Debug, Serialize)]
pub struct StudySummary<'a> {
    pub config: &'a StudyConfig,
    pub trials: usize,
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub std: f64,
    pub max_abs_deviation: f64,
    pub predicted_sigma_d: Option<f64>,
    pub predicted_sigma_n: Option<f64>,
}

/// Worker count: explicit value, else `VICONTOUR_THREADS`, else rayon's default.
pub fn thread_count(explicit: Option<usize>) -> Option<usize> {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
}

fn run_trials<F>(n: usize, threads: Option<usize>, trial: F) -> Result<Vec<TrialRecord>, BenchError>
where
    F: Fn(usize) -> TrialRecord + Sync + Send,
{
    let workers = thread_count(threads);
    if workers == Some(1) {
        return Ok((0..n).map(trial).collect());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| BenchError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(trial).collect()))
}

/// Runs the study named by `config.kind`.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult, BenchError> {
    match config.kind {
        StudyKind::Disc => run_disc_study(config),
        StudyKind::Segment => run_segment_study(config),
        StudyKind::OneD => run_1d_study(config),
        StudyKind::Bias => run_bias_study(config),
    }
}

fn sample_x1(k: usize) -> f64 {
    (k as f64 + 0.5) / DISTANCE_SAMPLES as f64
}

/// Mean and rms over the curve of the signed distance to a circle, positive outside.
fn circle_distance(curve: &Curve, center: Vec2, radius: f64) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for k in 0..DISTANCE_SAMPLES {
        let d = (curve.point(sample_x1(k)) - center).norm() - radius;
        sum += d;
        sq += d * d;
    }
    let n = DISTANCE_SAMPLES as f64;
    (sum / n, (sq / n).sqrt())
}

/// Mean and rms over the curve of the signed distance to the line through
/// `point` with unit normal `normal`.
fn line_distance(curve: &Curve, point: Vec2, normal: Vec2) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for k in 0..DISTANCE_SAMPLES {
        let d = (curve.point(sample_x1(k)) - point).dot(&normal);
        sum += d;
        sq += d * d;
    }
    let n = DISTANCE_SAMPLES as f64;
    (sum / n, (sq / n).sqrt())
}

fn disc_initial(config: &StudyConfig, center: Vec2, radius: f64, rng: &mut CounterRng) -> Result<Curve, BenchError> {
    let off = config.init_offset;
    let c = center + Vec2::new(rng.uniform_in(-off, off), rng.uniform_in(-off, off));
    let r = radius + rng.uniform_in(-off, off);
    Ok(match config.family {
        DiscFamily::Circle => Curve::circle(c, r),
        DiscFamily::Bspline { control_points, degree } => {
            let degree = SplineDegree::from_u8(degree)
                .ok_or_else(|| BenchError::InvalidConfig(format!("unsupported spline degree {degree}")))?;
            Curve::bspline_circle(c, r, control_points, degree)?
        }
    })
}

fn disc_of(scene: &Scene) -> (Vec2, f64) {
    match scene.shape {
        Shape::Disc { center, radius } => (Vec2::new(center[0], center[1]), radius),
        _ => unreachable!("disc scene expected"),
    }
}

fn finish(mut rec: TrialRecord, res: Result<MeasurementResult, VicError>, distance: impl Fn(&Curve) -> (f64, f64)) -> TrialRecord {
    match res {
        Ok(m) => {
            let (mean, rms) = distance(&m.curve);
            rec.measured = m.params().to_vec();
            rec.error = mean;
            rec.error_rms = rms;
            rec.iterations = m.iterations;
            rec.psi = m.psi;
            rec.converged = true;
            rec
        }
        Err(VicError::NotConverged(m)) => {
            rec.measured = m.params().to_vec();
            rec.iterations = m.iterations;
            rec.psi = m.psi;
            rec.fail("not converged")
        }
        Err(e) => rec.fail(e),
    }
}

fn disc_trial(config: &StudyConfig, index: usize) -> TrialRecord {
    let mut rng = CounterRng::stream(config.seed, index as u64);
    let scene = disc_trial_scene(config.radius, config.half_width, &mut rng);
    let (center, radius) = disc_of(&scene);
    let truth = vec![center.x, center.y, radius];
    let initial = match disc_initial(config, center, radius, &mut rng) {
        Ok(c) => c,
        Err(e) => return TrialRecord::pending(index, truth, Vec::new(), 0.0).fail(e),
    };
    let rec = TrialRecord::pending(index, truth, initial.params().as_slice().to_vec(), 0.0);
    let noise_seed = rng.next_u64();
    let img = match render(&scene).map_err(BenchError::from).and_then(|img| config.noisy(img, noise_seed)) {
        Ok(img) => img,
        Err(e) => return rec.fail(e),
    };
    let res = solve(&img, &initial, &config.solve_options(config.correction));
    let center_error = match (&res, config.family) {
        (Ok(m), DiscFamily::Circle) => Some((Vec2::new(m.params()[0], m.params()[1]) - center).norm()),
        _ => None,
    };
    let mut rec = finish(rec, res, |c| circle_distance(c, center, radius));
    rec.center_error = center_error;
    rec
}

/// Disc trials with center and radius drawn within one pixel around
/// `config.radius`. The error is the mean signed distance of the measured curve
/// to the true circle, positive outward.
pub fn run_disc_study(config: &StudyConfig) -> Result<StudyResult, BenchError> {
    config.validate()?;
    let records = run_trials(config.trials, config.threads, |i| disc_trial(config, i))?;
    let mut result = StudyResult::aggregate(config.clone(), records, false);
    let n = match config.family {
        DiscFamily::Circle => 3,
        DiscFamily::Bspline { control_points, .. } => 2 * control_points,
    };
    let length = 2.0 * PI * config.radius;
    result.predicted_sigma_d = Some(predict_sigma_d(n, length));
    result.predicted_sigma_n = Some(predict_sigma_n(config.sigma0, n, config.half_width, length, config.quantize_bits));
    Ok(result)
}

/// `(θ, ordinate offset, length offset)` of segment trial `index`.
pub fn segment_levels(levels: usize, index: usize) -> (f64, f64, f64) {
    let (a, b, c) = (index / (levels * levels), (index / levels) % levels, index % levels);
    let theta = if levels > 1 {
        FRAC_PI_4 * a as f64 / (levels - 1) as f64
    } else {
        0.0
    };
    (theta, b as f64 / levels as f64, c as f64 / levels as f64)
}

fn segment_trial(config: &StudyConfig, index: usize) -> TrialRecord {
    let (theta, dy, dl) = segment_levels(config.levels, index);
    let length = config.length + dl;
    let size = ((config.length + 2.0 * config.half_width + 12.0).ceil() as usize) | 1;
    let mid = ((size - 1) / 2) as f64;
    let point = Vec2::new(mid, mid + dy);
    let truth = vec![theta, point.y, length];

    let mut rng = CounterRng::stream(config.seed, index as u64);
    let off = config.init_offset;
    let y0 = point.y + rng.uniform_in(-off, off);
    let a0 = theta + rng.uniform_in(-off, off) * 2.0 / length;
    let initial = match Curve::constrained_segment(length, mid, y0, a0) {
        Ok(c) => c,
        Err(e) => return TrialRecord::pending(index, truth, Vec::new(), 0.0).fail(e),
    };
    let rec = TrialRecord::pending(index, truth, vec![y0, a0], 0.0);
    let noise_seed = rng.next_u64();
    let scene = Scene::half_plane(point, theta, size, size);
    let img = match render(&scene).map_err(BenchError::from).and_then(|img| config.noisy(img, noise_seed)) {
        Ok(img) => img,
        Err(e) => return rec.fail(e),
    };
    let res = solve(&img, &initial, &config.solve_options(config.correction));
    let normal = Vec2::new(theta.sin(), -theta.cos());
    finish(rec, res, |c| line_distance(c, point, normal))
}

/// Straight-edge sweep over the edge angle in `[0, π/4]`, the edge ordinate
/// offset in `[0, 1)` and the window length offset in `[0, 1)`, with
/// `levels` values each. Aggregates pool the normal distance over every curve
/// point of every trial.
pub fn run_segment_study(config: &StudyConfig) -> Result<StudyResult, BenchError> {
    config.validate()?;
    let n = config.levels.pow(3);
    let records = run_trials(n, config.threads, |i| segment_trial(config, i))?;
    let mut result = StudyResult::aggregate(config.clone(), records, true);
    result.predicted_sigma_d = Some(predict_sigma_d(2, config.length));
    result.predicted_sigma_n = Some(predict_sigma_n(config.sigma0, 2, config.half_width, config.length, config.quantize_bits));
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthSweep {
    pub lengths: Vec<f64>,
    pub sigma_d: Vec<f64>,
    pub mean: Vec<f64>,
    /// Least-squares `c` of `σ_d = c/L`.
    pub fit_constant: f64,
}

/// Least-squares constant of `y = c/x`.
pub fn fit_inverse_law(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(x, y)| y / x).sum();
    let den: f64 = x.iter().map(|x| 1.0 / (x * x)).sum();
    num / den
}

/// Segment study repeated for each window length.
pub fn run_segment_sweep(base: &StudyConfig, lengths: &[f64]) -> Result<LengthSweep, BenchError> {
    let mut sigma_d = Vec::with_capacity(lengths.len());
    let mut mean = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let res = run_segment_study(&StudyConfig { length, ..base.clone() })?;
        sigma_d.push(res.std);
        mean.push(res.mean);
    }
    Ok(LengthSweep {
        fit_constant: fit_inverse_law(lengths, &sigma_d),
        lengths: lengths.to_vec(),
        sigma_d,
        mean,
    })
}

/// Number of edge offsets in the 1D sweep over `[-0.5, 0.5]`.
pub const ONE_D_OFFSETS: usize = 101;

/// Pixel-integrated 1D steps at every offset and half-width; `error = λ - X0`.
pub fn run_1d_study(config: &StudyConfig) -> Result<StudyResult, BenchError> {
    config.validate()?;
    let widths = &config.half_widths;
    let n = widths.len() * ONE_D_OFFSETS;
    let records = run_trials(n, config.threads, |index| {
        let r = widths[index / ONE_D_OFFSETS];
        let x0 = -0.5 + (index % ONE_D_OFFSETS) as f64 / (ONE_D_OFFSETS - 1) as f64;
        let mut rec = TrialRecord::pending(index, vec![x0, r], vec![0.0], 0.0);
        let half_len = (r.ceil() as usize + 1).max(2) * 4;
        match solve_1d(&pixel_integrated_step(x0, half_len), r, 0.0) {
            Ok(lambda) => {
                rec.measured = vec![lambda];
                rec.error = lambda - x0;
                rec.error_rms = rec.error.abs();
                rec.converged = true;
                rec
            }
            Err(e) => rec.fail(e),
        }
    })?;
    Ok(StudyResult::aggregate(config.clone(), records, false))
}

/// Disc of `config.radius` under each gray map `F ↦ a(F - ½) + ½ + b` of
/// [`BIAS_GRID`], solved with the correction off and then on. The error is the
/// normal bias `true - measured`, expected to be `2Rb` without correction.
pub fn run_bias_study(config: &StudyConfig) -> Result<StudyResult, BenchError> {
    config.validate()?;
    let mut rng = CounterRng::new(config.seed);
    let half = (config.radius + config.half_width + 4.0).ceil();
    let center = Vec2::new(half + rng.uniform_in(-0.5, 0.5), half + rng.uniform_in(-0.5, 0.5));
    let radius = config.radius;
    let size = 2 * half as usize + 1;
    let base = render(&Scene::disc(center, radius, size, size))?;
    let off = config.init_offset;
    let start = Curve::circle(
        center + Vec2::new(rng.uniform_in(-off, off), rng.uniform_in(-off, off)),
        radius + rng.uniform_in(-off, off),
    );
    let noise_seed = rng.next_u64();

    let n = 2 * BIAS_GRID.len();
    let records = run_trials(n, config.threads, |index| {
        let correction = index >= BIAS_GRID.len();
        let (a, b) = BIAS_GRID[index % BIAS_GRID.len()];
        let expected = if correction { 0.0 } else { 2.0 * config.half_width * b };
        let truth = vec![center.x, center.y, radius, a, b, correction as u8 as f64];
        let rec = TrialRecord::pending(index, truth, start.params().as_slice().to_vec(), expected);
        let mapped = base.data().iter().map(|f| a * (f - 0.5) + 0.5 + b).collect();
        let img = match RasterImage::new(base.width(), base.height(), mapped)
            .map_err(BenchError::from)
            .and_then(|img| config.noisy(img, noise_seed))
        {
            Ok(img) => img,
            Err(e) => return rec.fail(e),
        };
        let res = solve(&img, &start, &config.solve_options(correction));
        let mut rec = finish(rec, res, |c| circle_distance(c, center, radius));
        rec.error = -rec.error;
        rec
    })?;
    Ok(StudyResult::aggregate(config.clone(), records, false))
}

/// Band integrals of the Hessian terms for the ideal profile
/// `f = clamp((1 + R·x2)/2, 0, 1)` against `g = (1 + x2)/2`, derivatives taken
/// with respect to `x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandIntegrals {
    /// `∫ x2 f'(f - g) dx2`
    pub i3: f64,
    /// `∫ (f')² dx2`
    pub i4: f64,
}

impl BandIntegrals {
    pub fn ratio(&self) -> f64 {
        self.i4 / self.i3
    }
}

/// Midpoint rule on `samples` cells of `[-1, 1]`.
pub fn band_integrals(half_width: f64, samples: usize) -> BandIntegrals {
    let r = half_width;
    let h = 2.0 / samples as f64;
    let (mut i3, mut i4) = (0.0, 0.0);
    for k in 0..samples {
        let x2 = -1.0 + (k as f64 + 0.5) * h;
        let f = (0.5 * (1.0 + r * x2)).clamp(0.0, 1.0);
        let df = if (r * x2).abs() < 1.0 { 0.5 * r } else { 0.0 };
        let g = 0.5 * (1.0 + x2);
        i3 += x2 * df * (f - g) * h;
        i4 += df * df * h;
    }
    BandIntegrals { i3, i4 }
}

impl StudyResult {
    /// Writes `<kind>_records.csv` and `<kind>_summary.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(PathBuf, PathBuf), BenchError> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}_records.csv", self.config.kind.name()));
        let json_path = dir.join(format!("{}_summary.json", self.config.kind.name()));
        write_records_csv(self, BufWriter::new(File::create(&csv_path)?))?;
        let mut out = BufWriter::new(File::create(&json_path)?);
        serde_json::to_writer_pretty(&mut out, &self.summary())?;
        writeln!(out)?;
        out.flush()?;
        Ok((csv_path, json_path))
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// One row per trial; parameter vectors are `;`-separated.
pub fn write_records_csv<W: Write>(result: &StudyResult, out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "index", "truth", "initial", "measured", "expected", "error", "error_rms", "center_error", "iterations", "psi",
        "converged", "failure",
    ])?;
    for r in &result.records {
        w.write_record(&[
            r.index.to_string(),
            join(&r.truth),
            join(&r.initial),
            join(&r.measured),
            r.expected.to_string(),
            r.error.to_string(),
            r.error_rms.to_string(),
            r.center_error.map(|c| c.to_string()).unwrap_or_default(),
            r.iterations.to_string(),
            r.psi.to_string(),
            r.converged.to_string(),
            r.failure.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
