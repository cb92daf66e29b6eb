//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not panicked on, so that the rest of the
//! suite still runs. Set `VICONTOUR_ACCEPTANCE_STRICT=1` to turn any FAIL into
//! a non-zero exit status.

use std::f64::consts::PI;
use std::time::Instant;

use vicontour::bench::{
    band_integrals, run_1d_study, run_bias_study, run_disc_study, run_segment_study, run_segment_sweep, StudyConfig,
    StudyResult, BIAS_GRID,
};
use vicontour::curve::{Curve, SplineDegree};
use vicontour::diagnostics::{mu_profile, mu_spectrum, predict_sigma_d, predict_sigma_n, Spectrum};
use vicontour::raster::{AffineGrayCorrection, RasterImage};
use vicontour::synth::{apply_noise, render, CounterRng, NoiseSpec, Scene};
use vicontour::vic::{cost_psi, grad_psi, hessian_full, hessian_gn, init_bspline, solve, MeasurementResult, SolveOptions, VirtualGrid};
use vicontour::Vec2;

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, pass: bool, text: String) {
        println!("{} {:>2}  {}", if pass { "PASS" } else { "FAIL" }, id, text);
        if !pass {
            self.failed.push(id);
        }
    }

    fn note(&self, text: String) {
        println!("         {text}");
    }
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo && v <= hi
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn criterion_1(rep: &mut Report) {
    let t = Instant::now();
    let res = run_1d_study(&StudyConfig::one_d()).unwrap();
    let dt = seconds(t);
    let ok = res.failures == 0 && res.max_abs_deviation < 1e-9 && dt < 1.0;
    rep.line(
        1,
        ok,
        format!(
            "1D exactness: max |λ-X0| = {:.2e} over {} solves, R ∈ {{1.6, 2, 3}} (< 1e-9), {:.2} s (< 1 s)",
            res.max_abs_deviation,
            res.records.len(),
            dt
        ),
    );
    let low = run_1d_study(&StudyConfig {
        half_widths: vec![1.4],
        ..StudyConfig::one_d()
    })
    .unwrap();
    rep.note(format!(
        "R = 1.4 (below the bound, not asserted): max |λ-X0| = {:.2e}, {} failures",
        low.max_abs_deviation, low.failures
    ));
}

fn criterion_2(rep: &mut Report) {
    let t = Instant::now();
    let res = run_segment_study(&StudyConfig::segment(100.0, 10, 2.0)).unwrap();
    let dt = seconds(t);
    let ok = res.failures == 0 && res.mean.abs() <= 5e-4 && within(res.std, 4e-4, 1.6e-3) && dt < 600.0;
    rep.line(
        2,
        ok,
        format!(
            "segment study L=100 R=2, 10x10x10: m_d = {:.2e} (|m_d| <= 5e-4), σ_d = {:.3e} (in [4e-4, 1.6e-3]), {} failures, {:.1} s",
            res.mean, res.std, res.failures, dt
        ),
    );
    let narrow = run_segment_study(&StudyConfig::segment(100.0, 10, 1.5)).unwrap();
    rep.note(format!(
        "R = 1.5 comparison: m_d = {:.2e}, σ_d = {:.3e} (reference band [2e-4, 8e-4], not part of the criterion)",
        narrow.mean, narrow.std
    ));
}

fn criterion_3(rep: &mut Report) {
    let lengths = [10.0, 31.6, 100.0, 316.0, 1000.0];
    let t = Instant::now();
    let sweep = run_segment_sweep(&StudyConfig::segment(100.0, 5, 2.0), &lengths).unwrap();
    let ok = within(sweep.fit_constant, 0.05, 0.15);
    let pairs: Vec<String> = sweep
        .lengths
        .iter()
        .zip(&sweep.sigma_d)
        .map(|(l, s)| format!("{l}: {s:.2e}"))
        .collect();
    rep.line(
        3,
        ok,
        format!(
            "σ_d = c/L over L ∈ {{10, 31.6, 100, 316, 1000}} (5x5x5 each): c = {:.4} (in [0.05, 0.15]), {:.1} s",
            sweep.fit_constant,
            seconds(t)
        ),
    );
    rep.note(format!("σ_d by L: {}", pairs.join(", ")));
}

fn disc_row(radius: f64, sigma0: f64, seed: u64) -> (StudyResult, f64) {
    let t = Instant::now();
    let res = run_disc_study(&StudyConfig::disc(radius, sigma0, 100, seed)).unwrap();
    (res, seconds(t))
}

fn criterion_4(rep: &mut Report) {
    let (res, dt) = disc_row(100.0, 0.0, 3);
    let sd = res.predicted_sigma_d.unwrap();
    let ok = res.failures == 0 && res.std <= 5e-4 && res.mean.abs() <= 5e-4 && res.std <= 3.0 * sd && dt < 300.0;
    rep.line(
        4,
        ok,
        format!(
            "D3 r=100 σ0=0, 100 trials: σ = {:.3e} (<= 5e-4, <= 3σ_d = {:.2e}), m = {:.2e} (|m| <= 5e-4), {} failures, {:.1} s",
            res.std,
            3.0 * sd,
            res.mean,
            res.failures,
            dt
        ),
    );
}

fn criterion_5(rep: &mut Report) {
    let (res, dt) = disc_row(100.0, 0.1, 33);
    let sn = res.predicted_sigma_n.unwrap();
    let ok = res.failures == 0 && within(res.std, 4e-3, 1.2e-2) && within(res.std / sn, 0.5, 1.5);
    rep.line(
        5,
        ok,
        format!(
            "D3' r=100 σ0=0.1, 100 trials: σ = {:.3e} (in [4e-3, 1.2e-2]), σ_n = {:.3e}, ratio {:.2} (in [0.5, 1.5]), m = {:.2e}, {:.1} s",
            res.std,
            sn,
            res.std / sn,
            res.mean,
            dt
        ),
    );
}

fn criterion_6(rep: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, radius, sigma0, seed) in [("D1", 3.0, 0.0, 1), ("D1'", 3.0, 0.1, 11), ("D2", 10.0, 0.0, 2), ("D2'", 10.0, 0.1, 22)] {
        let (res, _) = disc_row(radius, sigma0, seed);
        let headline = res.predicted_sigma_d.unwrap().max(res.predicted_sigma_n.unwrap());
        let ratio = res.std / headline;
        let mut row_ok = res.failures == 0 && within(ratio, 0.3, 3.0);
        if sigma0 == 0.0 {
            row_ok &= res.mean.abs() <= 5e-3;
            row_ok &= res.std <= 3.0 * res.predicted_sigma_d.unwrap();
        } else {
            row_ok &= within(res.std / res.predicted_sigma_n.unwrap(), 0.5, 1.5);
        }
        ok &= row_ok;
        parts.push(format!(
            "{name}: σ = {:.2e}, max(σ_d, σ_n) = {:.2e}, ratio {:.2}, m = {:.2e}, fail {}",
            res.std, headline, ratio, res.mean, res.failures
        ));
    }
    rep.line(
        6,
        ok,
        "D1/D1'/D2/D2' (100 trials each): σ/max(σ_d, σ_n) in [0.3, 3], |m| <= 5e-3 when noiseless".into(),
    );
    for p in parts {
        rep.note(p);
    }
}

fn criterion_7(rep: &mut Report) {
    let c1 = predict_sigma_d(20, 1236.0);
    let c2 = predict_sigma_n(0.3, 20, 1.0, 1236.0, Some(8));
    let c3 = predict_sigma_n(0.5, 20, 1.0, 1236.0, Some(8));
    let c4 = predict_sigma_n(0.9, 20, 1.0, 1236.0, Some(8));
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let ok = format!("{c1:.2e}") == "8.09e-4" && rel(c2, 54.2e-3) <= 0.01 && rel(c3, 90.1e-3) <= 0.03 && rel(c4, 163e-3) <= 0.03;
    rep.line(
        7,
        ok,
        format!(
            "predictors: σ_d(20, 1236) = {c1:.3e}; σ_n C2 = {c2:.4e} ({:.2}%), C3 = {c3:.4e} ({:.2}%), C4 = {c4:.4e} ({:.2}%)",
            100.0 * rel(c2, 54.2e-3),
            100.0 * rel(c3, 90.1e-3),
            100.0 * rel(c4, 163e-3)
        ),
    );
}

fn criterion_8(rep: &mut Report) {
    let res = run_bias_study(&StudyConfig::bias(100.0, 8)).unwrap();
    let n = BIAS_GRID.len();
    let off = &res.records[..n];
    let on = &res.records[n..];
    let mut law_ok = true;
    let mut law = Vec::new();
    for r in off.iter().filter(|r| r.truth[3] == 1.0 && r.truth[4] != 0.0) {
        let good = r.converged && (r.error - r.expected).abs() <= 0.15 * r.expected.abs();
        law_ok &= good;
        law.push(format!("b={:+}: {:.4} vs {:.2}", r.truth[4], r.error, r.expected));
    }
    let on_worst = on.iter().map(|r| if r.converged { r.error.abs() } else { f64::INFINITY }).fold(0.0, f64::max);
    let find = |a: f64, b: f64| off.iter().find(|r| r.truth[3] == a && r.truth[4] == b).unwrap();
    let contrast = (find(0.5, 0.0).error - find(1.0, 0.0).error).abs();
    let ok = law_ok && on_worst <= 5e-3 && contrast <= 5e-3 && res.failures == 0;
    rep.line(
        8,
        ok,
        format!(
            "bias law δ = 2Rb (15%): {}; correction on: max |bias| = {:.2e} (<= 5e-3); a=0.5 contrast shift {:.2e} (<= 5e-3)",
            law.join(", "),
            on_worst,
            contrast
        ),
    );
}

/// 8-bit r=100 disc used by the spectrum and Hessian criteria.
fn big_disc(sigma0: f64) -> (RasterImage, Vec2) {
    let c = Vec2::new(110.37, 109.62);
    let img = render(&Scene::disc(c, 100.0, 221, 221)).unwrap();
    let noise = NoiseSpec {
        sigma: sigma0,
        seed: 5,
        quantize_bits: Some(8),
    };
    (apply_noise(&img, &noise).unwrap(), c)
}

fn converged(img: &RasterImage, init: &Curve) -> MeasurementResult {
    solve(img, init, &SolveOptions::default()).unwrap()
}

/// Spline fits of a circle settle into a cycle of ~1e-4 px normal motion
/// around the fixed point, so they are stopped at a coarser tolerance.
const SPLINE_TOL_PX: f64 = 1e-3;

fn converged_spline(img: &RasterImage, degree: SplineDegree) -> MeasurementResult {
    let opts = SolveOptions {
        tol_px: SPLINE_TOL_PX,
        ..SolveOptions::default()
    };
    solve(img, &init_bspline(img, 10, degree).unwrap(), &opts).unwrap()
}

fn spectrum_of(img: &RasterImage, res: &MeasurementResult) -> Spectrum {
    mu_spectrum(&mu_profile(img, &res.curve, &res.grid, &res.correction).unwrap()).unwrap()
}

fn criterion_9(rep: &mut Report) {
    let (img, c) = big_disc(0.0);
    let length = 2.0 * PI * 100.0;
    let spline = converged_spline(&img, SplineDegree::Quadratic);
    let peak = spectrum_of(&img, &spline).peak().unwrap();
    let spline_ok = within(peak.amplitude_px, 0.03, 0.07) && within(peak.wavelength_px, 53.0, 73.0);

    let circle = converged(&img, &Curve::circle(c + Vec2::new(0.3, -0.2), 100.4));
    let circle_peak = spectrum_of(&img, &circle).peak().unwrap();
    let noise = predict_sigma_n(0.0, 3, 2.0, length, Some(8));
    let circle_ok = circle_peak.amplitude_px <= 3.0 * noise;
    rep.line(
        9,
        spline_ok && circle_ok,
        format!(
            "μ spectrum, noiseless 8-bit r=100 disc: 10-point quadratic B-spline (tol 1e-3 px) peak {:.4} px at {:.1} px (0.05 ± 0.02 at 63 ± 10); circle peak {:.2e} px at {:.2} px (<= 3σ_n = {:.2e})",
            peak.amplitude_px,
            peak.wavelength_px,
            circle_peak.amplitude_px,
            circle_peak.wavelength_px,
            3.0 * noise
        ),
    );

    let cubic = converged_spline(&img, SplineDegree::Cubic);
    let cubic_spectrum = spectrum_of(&img, &cubic);
    let cubic_peak = cubic_spectrum.peak().unwrap();
    rep.note(format!(
        "cubic 10-point B-spline: peak {:.4} px at {:.1} px, harmonic 10 amplitude {:.4} px",
        cubic_peak.amplitude_px,
        cubic_peak.wavelength_px,
        cubic_spectrum.amplitude_at(10).unwrap()
    ));
    let circle_long = spectrum_of(&img, &circle);
    let long_max = circle_long.amplitudes.iter().zip(&circle_long.wavelengths).filter(|(_, w)| **w >= 10.0).map(|(a, _)| *a).fold(0.0, f64::max);
    rep.note(format!("circle, noiseless: largest amplitude at wavelengths >= 10 px is {long_max:.2e} px"));

    let (noisy, _) = big_disc(0.1);
    let circle_noisy = converged(&noisy, &Curve::circle(c + Vec2::new(0.3, -0.2), 100.4));
    let sn = predict_sigma_n(0.1, 3, 2.0, length, Some(8));
    let s = spectrum_of(&noisy, &circle_noisy);
    let mean_amp = s.amplitudes.iter().sum::<f64>() / s.amplitudes.len() as f64;
    rep.note(format!(
        "circle, σ0 = 0.1: peak {:.2e} px (3σ_n = {:.2e}), mean amplitude {:.2e} px",
        s.peak().unwrap().amplitude_px,
        3.0 * sn,
        mean_amp
    ));
}

fn criterion_10(rep: &mut Report) {
    let (img, c) = big_disc(0.0);
    let res = converged(&img, &Curve::circle(c + Vec2::new(0.3, -0.2), 100.4));
    let grid = res.grid;
    let corr = res.correction;
    let gn = hessian_gn(&img, &res.curve, &grid, &corr).unwrap();
    let full = hessian_full(&img, &res.curve, &grid, &corr).unwrap();
    let rel = (&full - &gn).norm() / gn.norm();
    // independent reference: central differences of the analytic gradient
    let params = res.curve.params().as_slice().to_vec();
    let n = params.len();
    let h = 0.1;
    let mut fd = nalgebra::DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut a = params.clone();
        let mut b = params.clone();
        a[j] += h;
        b[j] -= h;
        let ga = grad_psi(&img, &res.curve.with_params(a).unwrap(), &grid, &corr).unwrap();
        let gb = grad_psi(&img, &res.curve.with_params(b).unwrap(), &grid, &corr).unwrap();
        for i in 0..n {
            fd[(i, j)] = (ga[i] - gb[i]) / (2.0 * h);
        }
    }
    let fd_rel = (&fd - &gn).norm() / gn.norm();
    let b = band_integrals(2.0, 1 << 20);
    let ratio = b.ratio();
    let ratio_ok = (ratio / 12.0 - 1.0).abs() <= 0.05;
    rep.line(
        10,
        rel <= 0.15 && ratio_ok,
        format!(
            "Hessian dominance on r=100, R=2: |H_full - H_gn|/|H_gn| = {rel:.3e} (<= 0.15); numeric i4/i3 = {ratio:.4} (12 ± 5%; i3 = {:.5}, i4 = {:.5})",
            b.i3, b.i4
        ),
    );
    rep.note(format!(
        "finite-difference Hessian (h = 0.1 px): |H_fd - H_gn|/|H_gn| = {fd_rel:.3}; for translations the exact term is ∫f'g' = 1/2 while Gauss-Newton gives ∫f'², larger for edges sharper than the virtual ramp"
    ));
    rep.note(format!(
        "closed forms for f = (1 + R·x2)/2: i3 = (R-1)/(6R²) = {:.5}, i4 = R/2 = {:.5}, ratio 3R³/(R-1) = {:.1}",
        1.0 / 24.0,
        1.0,
        24.0
    ));
}

fn frame_check(rng: &mut CounterRng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let curve = match rng.next_u64() % 3 {
            0 => Curve::circle(Vec2::new(rng.uniform_in(0.0, 100.0), rng.uniform_in(0.0, 100.0)), rng.uniform_in(1.0, 1e3)),
            1 => {
                let a = Vec2::new(rng.uniform_in(0.0, 50.0), rng.uniform_in(0.0, 50.0));
                let t = rng.uniform_in(-PI, PI);
                Curve::segment(a, a + rng.uniform_in(1.0, 50.0) * Vec2::new(t.cos(), t.sin()))
            }
            _ => {
                let c = Vec2::new(50.0, 50.0);
                let pts: Vec<Vec2> = (0..10)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / 10.0;
                        c + (30.0 + rng.uniform_in(-3.0, 3.0)) * Vec2::new(a.cos(), a.sin())
                    })
                    .collect();
                Curve::bspline(&pts, SplineDegree::Cubic).unwrap()
            }
        };
        let f = curve.frame(rng.uniform()).unwrap();
        let e = [
            (f.e_s.norm() - 1.0).abs(),
            (f.e_r.norm() - 1.0).abs(),
            f.e_s.dot(&f.e_r).abs(),
            (f.e_r - Vec2::new(f.e_s.y, -f.e_s.x)).norm(),
        ];
        worst = e.iter().fold(worst, |w, v| w.max(*v));
    }
    worst
}

fn gradient_check(rng: &mut CounterRng) -> f64 {
    let mut worst = 0.0f64;
    let corr = AffineGrayCorrection::IDENTITY;
    for k in 0..50 {
        let c = Vec2::new(rng.uniform_in(30.0, 31.0), rng.uniform_in(30.0, 31.0));
        let r = rng.uniform_in(15.0, 20.0);
        let img = render(&Scene::disc(c, r, 61, 61)).unwrap();
        let start = c + Vec2::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0));
        let rr = r + rng.uniform_in(0.3, 1.0);
        let curve = if k % 2 == 0 {
            Curve::circle(start, rr)
        } else {
            Curve::bspline_circle(start, rr, 8, SplineDegree::Cubic).unwrap()
        };
        let grid = VirtualGrid::for_length(2.0, curve.arc_length().unwrap());
        let g = grad_psi(&img, &curve, &grid, &corr).unwrap();
        let p = curve.params().as_slice().to_vec();
        let h = 1e-6;
        let mut diff = 0.0;
        for i in 0..p.len() {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (cost_psi(&img, &curve.with_params(up).unwrap(), &grid, &corr).unwrap()
                - cost_psi(&img, &curve.with_params(down).unwrap(), &grid, &corr).unwrap())
                / (2.0 * h);
            diff += (fd - g[i]).powi(2);
        }
        worst = worst.max(diff.sqrt() / g.norm());
    }
    worst
}

fn raster_check() -> f64 {
    let (c, r) = (Vec2::new(10.31, 9.73), 6.17);
    let img = render(&Scene::disc(c, r, 21, 21)).unwrap();
    let n = 256;
    let mut worst = 0.0f64;
    for j in 0..21 {
        for i in 0..21 {
            let mut inside = 0usize;
            for a in 0..n {
                for b in 0..n {
                    let p = Vec2::new(i as f64 - 0.5 + (a as f64 + 0.5) / n as f64, j as f64 - 0.5 + (b as f64 + 0.5) / n as f64);
                    if (p - c).norm() < r {
                        inside += 1;
                    }
                }
            }
            let oracle = 1.0 - inside as f64 / (n * n) as f64;
            worst = worst.max((img.get(i, j) - oracle).abs());
        }
    }
    worst
}

fn equivariance_check() -> f64 {
    let (c, r) = (Vec2::new(30.37, 29.81), 20.4);
    let opts = SolveOptions {
        tol_px: 1e-9,
        ..SolveOptions::default()
    };
    let init = Curve::circle(c + Vec2::new(0.4, -0.3), r + 0.35);
    let base = solve(&render(&Scene::disc(c, r, 61, 61)).unwrap(), &init, &opts).unwrap();
    let mut worst = 0.0f64;
    for t in [Vec2::new(7.0, 0.0), Vec2::new(-3.0, 11.0), Vec2::new(13.0, 5.0)] {
        let img = render(&Scene::disc(c + t, r, 80, 80)).unwrap();
        let res = solve(&img, &init.rigid_transform(0.0, t).unwrap(), &opts).unwrap();
        let (a, b) = (base.params(), res.params());
        worst = worst.max((b[0] - a[0] - t.x).abs()).max((b[1] - a[1] - t.y).abs()).max((b[2] - a[2]).abs());
    }
    worst
}

fn reproducibility_check() -> bool {
    let mut config = StudyConfig::disc(10.0, 0.1, 8, 77);
    config.threads = Some(1);
    let a = run_disc_study(&config).unwrap();
    config.threads = Some(4);
    let b = run_disc_study(&config).unwrap();
    let c = run_disc_study(&config).unwrap();
    serde_json::to_string(&a.records).unwrap() == serde_json::to_string(&b.records).unwrap() && b == c
}

fn criterion_11(rep: &mut Report) {
    let mut rng = CounterRng::new(2024);
    let frames = frame_check(&mut rng);
    let grad = gradient_check(&mut rng);
    let raster = raster_check();
    let equiv = equivariance_check();
    let repro = reproducibility_check();
    let ok = frames < 1e-12 && grad <= 1e-3 && raster <= 1e-3 && equiv <= 1e-6 && repro;
    rep.line(
        11,
        ok,
        format!(
            "properties: frames {frames:.1e} (< 1e-12), gradient vs FD {grad:.2e} (<= 1e-3, 50 configs), raster vs 256² supersampling {raster:.2e} (<= 1e-3), translation equivariance {equiv:.1e} px (<= 1e-6), reproducible {repro}"
        ),
    );
}

fn main() {
    let start = Instant::now();
    let mut rep = Report { failed: Vec::new() };
    criterion_1(&mut rep);
    criterion_2(&mut rep);
    criterion_3(&mut rep);
    criterion_4(&mut rep);
    criterion_5(&mut rep);
    criterion_6(&mut rep);
    criterion_7(&mut rep);
    criterion_8(&mut rep);
    criterion_9(&mut rep);
    criterion_10(&mut rep);
    criterion_11(&mut rep);
    println!(
        "acceptance: {}/11 PASS in {:.1} s{}",
        11 - rep.failed.len(),
        seconds(start),
        if rep.failed.is_empty() {
            String::new()
        } else {
            format!(", FAIL: {:?}", rep.failed)
        }
    );
    if !rep.failed.is_empty() && std::env::var("VICONTOUR_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
