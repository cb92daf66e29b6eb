//! `vicontour`: synthesize, measure, diagnose and benchmark silhouette boundaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use vicontour::bench::{run_study, DiscFamily, StudyConfig, StudyKind};
use vicontour::curve::{Curve, CurveFamily, SplineDegree};
use vicontour::diagnostics::{mu_profile, mu_spectrum, report, write_mu_csv, write_spectrum_csv, NoiseEstimate};
use vicontour::raster::{load_pgm, save_pgm, PgmEncoding, RasterImage};
use vicontour::synth::{apply_noise, render, NoiseSpec, Scene};
use vicontour::vic::{
    init_bspline, init_circle, init_segment, solve, MeasurementResult, SolveOptions, VicError, MIN_HALF_WIDTH,
};
use vicontour::Vec2;

/// Exit status when the solver stops before converging.
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "vicontour", version, about = "Sub-pixel silhouette boundary measurement")]
struct Cli {
    /// Suppress the human-readable summary.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic silhouette to PGM with a JSON sidecar.
    Synth(SynthArgs),
    /// Fit a curve to the silhouette boundary of an image.
    Measure(MeasureArgs),
    /// Signed distance profile, spectrum and uncertainty report of a measurement.
    Diagnose(DiagnoseArgs),
    /// Run a Monte-Carlo study.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SceneKind {
    Disc,
    HalfPlane,
    Polygon,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "disc")]
    scene: SceneKind,
    /// Disc center `x,y`.
    #[arg(long, value_parser = parse_point)]
    center: Option<Vec2>,
    #[arg(long)]
    radius: Option<f64>,
    /// Point on the half-plane edge, `x,y`.
    #[arg(long, value_parser = parse_point)]
    point: Option<Vec2>,
    /// Edge direction of the half-plane, radians.
    #[arg(long, default_value_t = 0.0)]
    angle: f64,
    /// Polygon vertices `x,y;x,y;...`.
    #[arg(long)]
    vertices: Option<String>,
    /// Image size `WxH`.
    #[arg(long, value_parser = parse_size)]
    size: (usize, usize),
    /// Gaussian noise, fraction of the dynamic range.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 8)]
    bits: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum FamilyArg {
    Circle,
    Segment,
    Bspline,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long, value_enum, default_value = "circle")]
    family: FamilyArg,
    /// `auto`, a JSON parameter array, a JSON curve document, or `@file`.
    #[arg(long, default_value = "auto")]
    init: String,
    /// Control points of an automatic B-spline start.
    #[arg(long, default_value_t = 10)]
    control_points: usize,
    /// Degree (2 or 3) of an automatic B-spline start.
    #[arg(long, default_value_t = 3)]
    degree: u8,
    /// Virtual image half-width, pixels.
    #[arg(long = "R", default_value_t = 2.0)]
    half_width: f64,
    /// Accept `R` below the admissible minimum.
    #[arg(long = "allow-small-R")]
    allow_small_r: bool,
    #[arg(long)]
    no_correction: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Grid columns along the curve; requires `--n2`.
    #[arg(long, requires = "n2")]
    n1: Option<usize>,
    /// Grid rows across the band; requires `--n1`.
    #[arg(long, requires = "n1")]
    n2: Option<usize>,
    /// Result JSON; defaults to `<image>.measure.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long)]
    image: PathBuf,
    /// Measurement JSON written by `measure`.
    #[arg(long)]
    result: PathBuf,
    /// Gray-level noise of the image, fraction of the dynamic range.
    #[arg(long, default_value_t = 0.0)]
    sigma0: f64,
    /// Overrides the bit depth read from the image.
    #[arg(long)]
    bits: Option<u8>,
    #[arg(long, default_value = "diagnostics")]
    out_dir: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum StudyArg {
    Disc,
    Segment,
    #[value(name = "one_d")]
    OneD,
    Bias,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    study: StudyArg,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    /// Gaussian noise of the disc study.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Segment window length.
    #[arg(long, default_value_t = 100.0)]
    length: f64,
    /// Levels per swept variable of the segment study.
    #[arg(long, default_value_t = 10)]
    levels: usize,
    #[arg(long = "R", default_value_t = 2.0)]
    half_width: f64,
    /// Fit 10-point B-splines of this degree instead of circles in the disc study.
    #[arg(long)]
    bspline_degree: Option<u8>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "bench")]
    out: PathBuf,
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Vec2::new(num(x)?, num(y)?))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(w)?, num(h)?))
}

fn write_json<T: serde::Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn synth(args: &SynthArgs, quiet: bool) -> Result<ExitCode> {
    let (w, h) = args.size;
    let scene = match args.scene {
        SceneKind::Disc => {
            let center = args.center.context("--center is required for a disc")?;
            let radius = args.radius.context("--radius is required for a disc")?;
            Scene::disc(center, radius, w, h)
        }
        SceneKind::HalfPlane => {
            let point = args.point.context("--point is required for a half-plane")?;
            Scene::half_plane(point, args.angle, w, h)
        }
        SceneKind::Polygon => {
            let spec = args.vertices.as_deref().context("--vertices is required for a polygon")?;
            let vertices = spec.split(';').map(parse_point).collect::<Result<Vec<_>, _>>().map_err(anyhow::Error::msg)?;
            Scene::polygon(&vertices, w, h)
        }
    };
    let noise = NoiseSpec {
        sigma: args.noise,
        seed: args.seed,
        quantize_bits: Some(args.bits),
    };
    let img = apply_noise(&render(&scene)?, &noise)?;
    save_pgm(&img, &args.out, PgmEncoding::Binary)?;
    let sidecar = args.out.with_extension("json");
    write_json(&sidecar, &json!({ "scene": scene, "noise": noise }))?;
    if !quiet {
        println!("wrote {} and {}", args.out.display(), sidecar.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn load_image(path: &Path) -> Result<RasterImage> {
    load_pgm(path).with_context(|| format!("reading {}", path.display()))
}

fn family_for(args: &MeasureArgs, n_params: usize) -> Result<CurveFamily> {
    Ok(match args.family {
        FamilyArg::Circle => CurveFamily::Circle,
        FamilyArg::Segment => CurveFamily::Segment,
        FamilyArg::Bspline => CurveFamily::ClosedBSpline {
            control_points: n_params / 2,
            degree: spline_degree(args.degree)?,
        },
    })
}

fn spline_degree(d: u8) -> Result<SplineDegree> {
    SplineDegree::from_u8(d).with_context(|| format!("unsupported B-spline degree {d}"))
}

fn initial_curve(args: &MeasureArgs, img: &RasterImage) -> Result<Curve> {
    if args.init == "auto" {
        return Ok(match args.family {
            FamilyArg::Circle => init_circle(img)?,
            FamilyArg::Segment => init_segment(img, 2.0)?,
            FamilyArg::Bspline => init_bspline(img, args.control_points, spline_degree(args.degree)?)?,
        });
    }
    let text = match args.init.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => args.init.clone(),
    };
    let value: serde_json::Value = serde_json::from_str(&text).context("--init is not valid JSON")?;
    if value.is_object() {
        let curve: Curve = serde_json::from_value(value).context("--init curve document")?;
        return Ok(curve);
    }
    let params: Vec<f64> = serde_json::from_value(value).context("--init must be a number array or a curve document")?;
    Ok(Curve::new(family_for(args, params.len())?, params)?)
}

fn measure(args: &MeasureArgs, quiet: bool) -> Result<ExitCode> {
    if args.half_width < MIN_HALF_WIDTH {
        if !args.allow_small_r {
            bail!("R = {} is below the admissible minimum {MIN_HALF_WIDTH}; pass --allow-small-R to proceed", args.half_width);
        }
        eprintln!("warning: R = {} is below {MIN_HALF_WIDTH}; the measurement may be biased", args.half_width);
    }
    let img = load_image(&args.image)?;
    let init = initial_curve(args, &img)?;
    let opts = SolveOptions {
        half_width: args.half_width,
        tol_px: args.tol,
        max_iter: args.max_iter,
        correction: !args.no_correction,
        grid: args.n1.zip(args.n2),
        ..SolveOptions::default()
    };
    let (result, code) = match solve(&img, &init, &opts) {
        Ok(r) => (r, ExitCode::SUCCESS),
        Err(VicError::NotConverged(r)) => (*r, ExitCode::from(EXIT_NOT_CONVERGED)),
        Err(e) => return Err(e.into()),
    };
    let out = args.out.clone().unwrap_or_else(|| args.image.with_extension("measure.json"));
    write_json(&out, &result)?;
    if !quiet {
        print_measurement(&result, &out);
    }
    Ok(code)
}

fn print_measurement(result: &MeasurementResult, out: &Path) {
    let params: Vec<String> = result.params().iter().map(|v| format!("{v:.6}")).collect();
    println!(
        "{} {}: [{}], psi = {:.4e}, {} iterations -> {}",
        result.curve.family().name(),
        if result.converged { "converged" } else { "NOT converged" },
        params.join(", "),
        result.psi,
        result.iterations,
        out.display()
    );
}

fn diagnose(args: &DiagnoseArgs, quiet: bool) -> Result<ExitCode> {
    let img = load_image(&args.image)?;
    let text = std::fs::read_to_string(&args.result).with_context(|| format!("reading {}", args.result.display()))?;
    let result: MeasurementResult = serde_json::from_str(&text).context("parsing measurement result")?;
    let profile = mu_profile(&img, &result.curve, &result.grid, &result.correction)?;
    let spectrum = mu_spectrum(&profile)?;
    let noise = NoiseEstimate {
        sigma0: args.sigma0,
        bit_depth: args.bits,
    };
    let rep = report(&img, &result.curve, &result.grid, &noise)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let mu_path = args.out_dir.join("mu.csv");
    let spectrum_path = args.out_dir.join("spectrum.csv");
    let report_path = args.out_dir.join("report.json");
    write_mu_csv(&profile, BufWriter::new(File::create(&mu_path)?))?;
    write_spectrum_csv(&spectrum, BufWriter::new(File::create(&spectrum_path)?))?;
    write_json(&report_path, &rep)?;
    if !quiet {
        println!(
            "sigma_d = {:.3e} px, sigma_n = {:.3e} px, predicted bias {:.3e} px, mean R*mu = {:.3e} px",
            rep.sigma_d,
            rep.sigma_n,
            rep.predicted_bias,
            profile.mean_r_mu()
        );
        if let Some(p) = rep.spectrum_peak {
            println!("spectrum peak {:.3e} px at wavelength {:.2} px", p.amplitude_px, p.wavelength_px);
        }
        println!("wrote {}, {}, {}", mu_path.display(), spectrum_path.display(), report_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(args: &BenchArgs, quiet: bool) -> Result<ExitCode> {
    let mut config = match args.study {
        StudyArg::Disc => StudyConfig::disc(args.radius, args.noise, args.trials, args.seed),
        StudyArg::Segment => StudyConfig::segment(args.length, args.levels, args.half_width),
        StudyArg::OneD => StudyConfig::one_d(),
        StudyArg::Bias => StudyConfig::bias(args.radius, args.seed),
    };
    config.half_width = args.half_width;
    config.threads = args.threads;
    if let Some(d) = args.bspline_degree {
        if config.kind != StudyKind::Disc {
            bail!("--bspline-degree applies to the disc study only");
        }
        spline_degree(d)?;
        config.family = DiscFamily::Bspline {
            control_points: 10,
            degree: d,
        };
    }
    let result = run_study(&config)?;
    let (csv_path, json_path) = result.write_to_dir(&args.out)?;
    if !quiet {
        println!(
            "{} study: {} trials, {} failures, m = {:.3e} px, sigma = {:.3e} px, max error = {:.3e} px",
            config.kind.name(),
            result.records.len(),
            result.failures,
            result.mean,
            result.std,
            result.max_abs_deviation
        );
        if let (Some(d), Some(n)) = (result.predicted_sigma_d, result.predicted_sigma_n) {
            println!("predicted sigma_d = {d:.3e} px, sigma_n = {n:.3e} px");
        }
        println!("wrote {} and {}", csv_path.display(), json_path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Synth(a) => synth(a, cli.quiet),
        Command::Measure(a) => measure(a, cli.quiet),
        Command::Diagnose(a) => diagnose(a, cli.quiet),
        Command::Bench(a) => bench(a, cli.quiet),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
