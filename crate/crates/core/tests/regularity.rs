use std::f64::consts::PI;

use shelab::kernels::gauss;
use shelab::levy::{JumpLaw, LevyMeasureSpec};
use shelab::noise::SimRegion;
use shelab::regularity::{
    ball_sup_integral, default_cutoffs, necessary_condition_integral, spatial_refinement_study,
    stationarity_test, temporal_refinement_study, Decision, GrowthLaw, Regime, SpatialParams, StationarityParams,
    StudyConfig, TemporalParams,
};
use shelab::solver::{InitialCondition, SigmaSpec};

fn cp() -> LevyMeasureSpec {
    LevyMeasureSpec::compound_poisson(2.0, JumpLaw::Normal { mean: 0.0, std: 1.0 }).unwrap()
}

/// ∫ sup_{|x| ≤ δ} g(s, x − y)^α dy in one dimension by the trapezoid rule.
fn ball_sup_oracle_1d(s: f64, alpha: f64, delta: f64) -> f64 {
    let lim = delta + 40.0 * s.sqrt();
    let n = 400_000;
    let h = 2.0 * lim / n as f64;
    (0..=n)
        .map(|i| {
            let y: f64 = -lim + i as f64 * h;
            let r = (y.abs() - delta).max(0.0);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * gauss(s, r * r, 1).powf(alpha)
        })
        .sum::<f64>()
        * h
}

/// The same in two dimensions, integrating over the radius.
fn ball_sup_oracle_2d(s: f64, alpha: f64, delta: f64) -> f64 {
    let lim = delta + 40.0 * s.sqrt();
    let n = 400_000;
    let h = lim / n as f64;
    (0..=n)
        .map(|i| {
            let rho = i as f64 * h;
            let r = (rho - delta).max(0.0);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * 2.0 * PI * rho * gauss(s, r * r, 2).powf(alpha)
        })
        .sum::<f64>()
        * h
}

#[test]
fn ball_sup_integral_matches_quadrature() {
    for &(s, alpha, delta) in &[(0.1, 1.5, 1.0), (1e-3, 2.0, 0.5), (0.5, 2.5, 2.0)] {
        let a = ball_sup_integral(s, alpha, 1, delta);
        let o = ball_sup_oracle_1d(s, alpha, delta);
        assert!((a - o).abs() < 1e-7 * o, "d=1 s={s}: {a} vs {o}");
    }
    for &(s, alpha, delta) in &[(0.1, 1.0, 1.0), (1e-3, 1.5, 0.5)] {
        let a = ball_sup_integral(s, alpha, 2, delta);
        let o = ball_sup_oracle_2d(s, alpha, delta);
        assert!((a - o).abs() < 1e-7 * o, "d=2 s={s}: {a} vs {o}");
    }
}

#[test]
fn necessary_integral_growth_laws() {
    let cut = default_cutoffs();
    let log = necessary_condition_integral(1.0, 2, (&[0.0, 0.0], 1.0), 1.0, &cut).unwrap();
    assert_eq!(log.preferred, GrowthLaw::Logarithmic);
    assert!(log.values.windows(2).all(|w| w[1] > w[0]));
    // at α = 2/d the flat top of the ball dominates: A(s) ~ |B_δ|/(4πs) = δ²/(4s)
    assert!((log.log_fit.slope - 0.25).abs() < 5e-3, "{}", log.log_fit.slope);
    // d = 1 has no divergent window: [2, min(3, 2)) is empty
    assert!(necessary_condition_integral(2.0, 1, (&[0.0], 1.0), 1.0, &cut).is_err());
    // d = 2, α = 3/2: I(ε) ~ ε^{1 − 3/2}
    let pow = necessary_condition_integral(1.5, 2, (&[0.0, 0.0], 0.5), 1.0, &cut).unwrap();
    assert_eq!(pow.preferred, GrowthLaw::Power);
    assert!((pow.power_fit.exponent + 0.5).abs() < 0.05);
}

#[test]
fn necessary_integral_rejects_convergent_indices() {
    let cut = default_cutoffs();
    assert!(necessary_condition_integral(0.9, 2, (&[0.0, 0.0], 1.0), 1.0, &cut).is_err());
    assert!(necessary_condition_integral(1.5, 1, (&[0.0], 1.0), 1.0, &cut).is_err());
    assert!(necessary_condition_integral(2.0, 2, (&[0.0, 0.0], 1.0), 1.0, &cut).is_err());
    assert!(necessary_condition_integral(1.0, 2, (&[0.0], 1.0), 1.0, &cut).is_err());
    assert!(necessary_condition_integral(1.0, 2, (&[0.0, 0.0], 1.0), 1.0, &cut[..2]).is_err());
}

#[test]
fn noise_without_effect_is_bounded() {
    let mut cfg = StudyConfig::new(cp(), SimRegion::interval(1.0).unwrap());
    cfg.sigma = SigmaSpec::Constant { c: 0.0 };
    let v = spatial_refinement_study(&cfg, &SpatialParams::default(), 10, 3).unwrap();
    assert_eq!(v.regime, Regime::Subcritical);
    assert!(v.statistic.max_abs.iter().all(|m| *m == 0.0));
    assert_eq!(v.decision, Decision::Bounded);
}

#[test]
fn compound_poisson_time_sections_are_bounded() {
    let cfg = StudyConfig::new(cp(), SimRegion::interval(1.0).unwrap());
    let v = temporal_refinement_study(&cfg, &TemporalParams::default(), 60, 8).unwrap();
    assert_eq!(v.regime, Regime::Subcritical);
    assert_eq!(v.blumenthal_getoor, 0.0);
    assert_eq!(v.decision, Decision::Bounded, "{:?}", v.statistic.growth_ratios);
    assert!(!v.exploratory);
    let csv = v.statistic.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("level,resolution,eps,median_sup,ci_lo,ci_hi,median_osc,ratio\n"));
}

#[test]
fn studies_are_deterministic_in_the_seed() {
    let cfg = StudyConfig::new(LevyMeasureSpec::stable(0.5).unwrap(), SimRegion::boxed(0.1, 2, 1.0).unwrap());
    let p = SpatialParams { base_points: 5, ..Default::default() };
    let a = spatial_refinement_study(&cfg, &p, 8, 21).unwrap();
    let b = spatial_refinement_study(&cfg, &p, 8, 21).unwrap();
    let c = spatial_refinement_study(&cfg, &p, 8, 22).unwrap();
    assert_eq!(a.statistic, b.statistic);
    assert_ne!(a.statistic, c.statistic);
}

#[test]
fn studies_reject_out_of_regime_measures() {
    let cfg = StudyConfig::new(LevyMeasureSpec::stable(1.9).unwrap(), SimRegion::boxed(0.1, 3, 1.0).unwrap());
    assert!(spatial_refinement_study(&cfg, &SpatialParams::default(), 4, 1).is_err());
    let cfg = StudyConfig::new(cp(), SimRegion::interval(1.0).unwrap());
    let p = TemporalParams { levels: 2, ..Default::default() };
    assert!(temporal_refinement_study(&cfg, &p, 4, 1).is_err());
}

fn stationarity_cfg() -> StudyConfig {
    let mut c = StudyConfig::new(LevyMeasureSpec::stable(0.8).unwrap(), SimRegion::boxed(0.05, 2, 3.0).unwrap());
    c.u0 = InitialCondition::Constant { c: 1.0 };
    c
}

#[test]
fn stationarity_zero_shift_and_refusals() {
    let p = StationarityParams { shifts: vec![vec![0.0, 0.0], vec![0.5, 0.5]], ..Default::default() };
    let r = stationarity_test(&stationarity_cfg(), &p, 100, 9).unwrap();
    assert_eq!(r.tests[0].statistic, 0.0);
    assert_eq!(r.tests[0].p_value, 1.0);
    assert_eq!(r.tests.len(), 2);
    for t in &r.tests {
        assert!((t.p_adjusted - (2.0 * t.p_value).min(1.0)).abs() < 1e-15);
    }

    let mut sine = stationarity_cfg();
    sine.u0 = InitialCondition::SineMode { k: 1, amplitude: 1.0 };
    assert!(stationarity_test(&sine, &StationarityParams::default(), 10, 1).is_err());
    let mut interval = stationarity_cfg();
    interval.region = SimRegion::interval(0.05).unwrap();
    interval.u0 = InitialCondition::Zero;
    assert!(stationarity_test(&interval, &StationarityParams::default(), 10, 1).is_err());
    let edge = StationarityParams { points: vec![vec![2.0, 0.0]], ..Default::default() };
    assert!(stationarity_test(&stationarity_cfg(), &edge, 10, 1).is_err());
}
