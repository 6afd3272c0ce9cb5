use std::f64::consts::PI;

use proptest::prelude::*;
use shelab::kernels::{gauss, KernelEngine};
use shelab::levy::{JumpLaw, LevyMeasureSpec};
use shelab::noise::{Jump, PointMeasure, SimRegion};
use shelab::sobolev::{
    delta_coeffs, fourier_coeffs, hr_norm, sine_coeffs_fn, sine_frames, skorohod_modulus, trajectory_from_field,
    CoeffVector, SkorohodConfig, SobolevTrajectory,
};
use shelab::solver::{solve_additive, EvalGrid, InitialCondition, Lattice, SigmaSpec};
use shelab::stats::ols;

/// ‖δ_{x0} (e^{−n²h} − 1)‖_{H_r} summed term by term.
fn right_increment_oracle(x0: f64, r: f64, h: f64, n_max: usize) -> f64 {
    let mut s = 0.0;
    for n in 1..=n_max {
        let nf = n as f64;
        let b = (2.0 / PI).sqrt() * (nf * x0).sin() * (1.0 - (-nf * nf * h).exp());
        s += (1.0 + nf * nf).powf(r) * b * b;
    }
    s.sqrt()
}

#[test]
fn sine_modes_have_closed_form_norms() {
    for k in 1..5u32 {
        let cv = sine_coeffs_fn(|x| (k as f64 * x).sin(), 16).unwrap();
        let expect = (PI / 2.0).sqrt() * (1.0 + (k * k) as f64).powf(-0.5);
        assert!((hr_norm(&cv, -1.0) - expect).abs() < 1e-12);
    }
}

#[test]
fn sine_mode_trajectory_decays() {
    let region = SimRegion::interval(2.0).unwrap();
    let grid = EvalGrid::with_sizes(&region, 10, 64);
    let u0 = InitialCondition::SineMode { k: 3, amplitude: 2.0 };
    let fg = solve_additive(&PointMeasure::empty(region), &u0, KernelEngine::auto(), &grid).unwrap();
    let tr = trajectory_from_field(&fg, 0.5, 64).unwrap();
    let n0 = 2.0 * (PI / 2.0).sqrt() * 10f64.powf(0.25);
    for (t, n) in tr.times.iter().zip(&tr.norms) {
        assert!((n - n0 * (-9.0 * t).exp()).abs() < 1e-12 * n0);
    }
    assert!(tr.jump_annotations.is_empty());
}

#[test]
fn right_continuity_at_a_jump() {
    let (t0, x0, n_max) = (0.5, 1.0, 20_000);
    let jumps = [Jump::new(t0, &[x0], 1.0)];
    let hs = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut times = vec![t0];
    times.extend(hs.iter().map(|h| t0 + h));
    times.sort_by(f64::total_cmp);
    let frames = sine_frames(&jumps, &[1.0], &InitialCondition::Zero, 0.0, &times, n_max).unwrap();
    let at = |t: f64| &frames[times.iter().position(|&s| s == t).unwrap()];
    let mut incs = Vec::new();
    for &h in &hs {
        let inc = hr_norm(&at(t0 + h).sub(at(t0)).unwrap(), -1.0);
        let oracle = right_increment_oracle(x0, -1.0, h, n_max);
        assert!((inc - oracle).abs() < 1e-10 * oracle, "{inc} vs {oracle}");
        incs.push(inc);
    }
    // ‖u(t0 + h) − u(t0)‖_{H_{−1}} ~ h^{1/4}
    let fit = ols(&hs.iter().map(|h| h.ln()).collect::<Vec<_>>(), &incs.iter().map(|v| v.ln()).collect::<Vec<_>>());
    assert!((fit.slope - 0.25).abs() < 0.03, "{}", fit.slope);
}

#[test]
fn left_limits_are_cauchy() {
    let jumps = [Jump::new(0.2, &[2.0], -1.0), Jump::new(0.5, &[1.0], 1.5)];
    let w = [-1.0, 1.5];
    let times = [0.49, 0.499, 0.4999, 0.5 - 1e-13, 0.5];
    let frames = sine_frames(&jumps, &w, &InitialCondition::Zero, 0.0, &times, 4096).unwrap();
    let left = &frames[3];
    let d: Vec<f64> = frames[..3].iter().map(|f| hr_norm(&f.sub(left).unwrap(), -1.0)).collect();
    assert!(d[1] < d[0] / 5.0 && d[2] < d[1] / 5.0, "{d:?}");
    // the jump itself is the weighted delta
    let jump = hr_norm(&frames[4].sub(left).unwrap(), -1.0);
    let delta = 1.5 * hr_norm(&delta_coeffs(1.0, 4096).unwrap(), -1.0);
    assert!((jump - delta).abs() < 1e-6 * delta);
}

#[test]
fn annotations_match_frame_differences() {
    let region = SimRegion::interval(1.0).unwrap();
    let pm = PointMeasure::from_jumps(region, vec![Jump::new(0.25, &[0.7], 2.0), Jump::new(0.75, &[2.5], -1.0)]).unwrap();
    let grid = EvalGrid::with_sizes(&region, 8, 32);
    let fg = solve_additive(&pm, &InitialCondition::Zero, KernelEngine::auto(), &grid).unwrap();
    let tr = trajectory_from_field(&fg, -1.0, 2048).unwrap();
    assert_eq!(tr.jump_annotations.len(), 2);
    for a in &tr.jump_annotations {
        let delta = a.weight.abs() * hr_norm(&delta_coeffs(a.x[0], 2048).unwrap(), -1.0);
        assert!((a.size - delta).abs() < 1e-12);
    }
    assert!(!tr.divergent);
    assert!(trajectory_from_field(&fg, -0.25, 64).unwrap().divergent);
}

#[test]
fn box_gaussian_norm_matches_lattice_sum() {
    let t = 0.1;
    let lattice = Lattice::uniform(1, -5.0, 5.0, 513);
    let values: Vec<f64> = lattice.axes[0].iter().map(|x| gauss(t, x * x, 1)).collect();
    let cv = fourier_coeffs(&lattice, &values, 0.25).unwrap();
    // ĝ(ξ) = e^{−tξ²}/√(2π) sampled on the frequency lattice ξ_k = 2πk/(n h)
    let (n, h) = (513i64, 10.0 / 512.0);
    let dxi = 2.0 * PI / (n as f64 * h);
    let oracle = |r: f64| {
        let s: f64 = (-(n / 2)..=n / 2)
            .map(|k| {
                let xi = k as f64 * dxi;
                (1.0 + xi * xi).powf(r) * (-2.0 * t * xi * xi).exp()
            })
            .sum();
        (s * dxi / (2.0 * PI)).sqrt()
    };
    assert!((hr_norm(&cv, 0.0) - (8.0 * PI * t).powf(-0.25)).abs() < 1e-6);
    for r in [-1.0, -0.5, 0.5] {
        assert!((hr_norm(&cv, r) - oracle(r)).abs() < 1e-6 * oracle(r), "r = {r}");
    }
}

#[test]
fn trajectory_csv_export() {
    let region = SimRegion::interval(1.0).unwrap();
    let pm = PointMeasure::from_jumps(region, vec![Jump::new(0.5, &[1.0], 1.0)]).unwrap();
    let grid = EvalGrid::with_sizes(&region, 4, 16);
    let fg = solve_additive(&pm, &InitialCondition::Zero, KernelEngine::auto(), &grid).unwrap();
    let a = trajectory_from_field(&fg, -1.0, 256).unwrap();
    let b = trajectory_from_field(&fg, -2.0, 256).unwrap();
    let csv = SobolevTrajectory::to_csv(&[&a, &b]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,norm_-1.0,norm_-2.0");
    assert_eq!(lines.len(), 6);
    let row: Vec<f64> = lines[5].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row, vec![1.0, a.norms[4], b.norms[4]]);
    let json = serde_json::to_value(&a).unwrap();
    assert_eq!(json["basis"], "sine");
    assert_eq!(json["jump_annotations"].as_array().unwrap().len(), 1);

    let other = trajectory_from_field(&solve_additive(&pm, &InitialCondition::Zero, KernelEngine::auto(), &EvalGrid::with_sizes(&region, 5, 16)).unwrap(), -1.0, 8).unwrap();
    assert!(SobolevTrajectory::to_csv(&[&a, &other]).is_err());
    assert!(SobolevTrajectory::to_csv(&[]).is_err());
}

fn rademacher() -> LevyMeasureSpec {
    LevyMeasureSpec::compound_poisson(5.0, JumpLaw::Rademacher { scale: 1.0 }).unwrap()
}

#[test]
fn skorohod_modulus_vanishes_without_noise() {
    let mut cfg = SkorohodConfig::new(rademacher());
    cfg.sigma = SigmaSpec::Constant { c: 0.0 };
    cfg.n_max = 256;
    let rep = skorohod_modulus(&cfg, -1.0, &[0.1, 0.05, 0.025], 20, 1).unwrap();
    assert!(rep.modulus.iter().all(|m| *m == 0.0));
    assert!(rep.slope.is_none());
    assert!(rep.warnings.iter().any(|w| w.contains("vanishes")));
    assert!(skorohod_modulus(&cfg, -0.5, &[0.1, 0.05], 20, 1).is_err());
}

#[test]
fn skorohod_modulus_is_stable_under_more_replicas() {
    let mut cfg = SkorohodConfig::new(rademacher());
    cfg.n_max = 1024;
    cfg.bootstrap_resamples = 100;
    let hs = [0.125, 0.0625];
    let a = skorohod_modulus(&cfg, -1.0, &hs, 400, 5).unwrap();
    let b = skorohod_modulus(&cfg, -1.0, &hs, 800, 5).unwrap();
    for (x, y) in a.modulus.iter().zip(&b.modulus) {
        assert!((x - y).abs() < 0.3 * y, "{x} vs {y}");
    }
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..64)
}

proptest! {
    #[test]
    fn norm_is_monotone_in_r(c in coeffs(), r1 in -3.0f64..2.0, dr in 0.0f64..2.0) {
        let cv = CoeffVector::Sine { coeffs: c };
        prop_assert!(hr_norm(&cv, r1) <= hr_norm(&cv, r1 + dr) * (1.0 + 1e-12));
    }

    #[test]
    fn norm_is_homogeneous(c in coeffs(), r in -3.0f64..2.0, lam in -10.0f64..10.0) {
        let cv = CoeffVector::Sine { coeffs: c };
        let scaled = hr_norm(&cv.scale(lam), r);
        prop_assert!((scaled - lam.abs() * hr_norm(&cv, r)).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn triangle_inequality(a in prop::collection::vec(-5.0f64..5.0, 32), b in prop::collection::vec(-5.0f64..5.0, 32), r in -2.0f64..1.0) {
        let (a, b) = (CoeffVector::Sine { coeffs: a }, CoeffVector::Sine { coeffs: b });
        let d = a.sub(&b.scale(-1.0)).unwrap();
        prop_assert!(hr_norm(&d, r) <= (hr_norm(&a, r) + hr_norm(&b, r)) * (1.0 + 1e-12));
    }
}
