use std::f64::consts::PI;

use proptest::prelude::*;
use shelab::levy::{blumenthal_getoor_bisection, check_hypothesis_h, JumpLaw, LevyMeasureSpec};
use shelab::noise::{
    sample_prm, tau_fixed, tau_weighted, truncate_noise, Jump, LargeCutoff, PointMeasure, SimRegion,
};
use shelab::special::chi_square_sf;
use shelab::stats::{ks_one_sample, ks_two_sample, mean, variance};

fn stable(a: f64) -> LevyMeasureSpec {
    LevyMeasureSpec::stable(a).unwrap()
}

/// η-range of the moment bound recomputed from its closed form: (d/q, (2 − d(p−1))/(p−q)).
fn eta_oracle(d: f64, p: f64, q: f64) -> (f64, f64) {
    (d / q, (2.0 - d * (p - 1.0)) / (p - q))
}

#[test]
fn moment_examples() {
    assert!((stable(0.5).small_jump_moment(1.0).unwrap().value() - 4.0).abs() < 1e-10);
    assert!(!stable(0.5).small_jump_moment(0.5).unwrap().is_finite());
    assert!((stable(1.5).large_jump_moment(1.0).unwrap().value() - 4.0).abs() < 1e-10);
    assert!(!stable(1.5).large_jump_moment(1.5).unwrap().is_finite());
    // ∫₀¹ z^{−1/2} e^{−z} dz = Σ (−1)^k / (k! (k + 1/2))
    let mut series = 0.0;
    let mut fact = 1.0;
    for k in 0..30 {
        if k > 0 {
            fact *= k as f64;
        }
        series += (-1f64).powi(k) / (fact * (k as f64 + 0.5));
    }
    let g = LevyMeasureSpec::gamma(1.0, 1.0).unwrap().small_jump_moment(0.5).unwrap().value();
    assert!((g - series).abs() < 1e-9, "{g} vs {series}");
    let cp = LevyMeasureSpec::compound_poisson(2.0, JumpLaw::Rademacher { scale: 3.0 }).unwrap();
    let v = cp.large_jump_moment(0.5).unwrap().value();
    assert!(v.is_finite() && v <= 2.0 * 3f64.sqrt() + 1e-12);
}

#[test]
fn blumenthal_getoor_examples() {
    assert_eq!(stable(0.7).blumenthal_getoor_index().unwrap(), 0.7);
    let cp = LevyMeasureSpec::compound_poisson(1.0, JumpLaw::Dirac { value: 1.0 }).unwrap();
    assert_eq!(cp.blumenthal_getoor_index().unwrap(), 0.0);
    let ts = LevyMeasureSpec::tempered_stable(1.2, 1.0).unwrap();
    assert!((ts.blumenthal_getoor_index().unwrap() - 1.2).abs() < 1e-12);
    for a in [0.3, 0.9, 1.6] {
        assert!((blumenthal_getoor_bisection(&stable(a), 1e-8).unwrap() - a).abs() < 1e-6);
    }
}

#[test]
fn hypothesis_examples() {
    let r = check_hypothesis_h(&stable(0.5), 1, 0.7, 0.4).unwrap();
    assert!(r.satisfied);
    let (lo, hi) = r.eta_range.unwrap();
    let (olo, ohi) = eta_oracle(1.0, 0.7, 0.4);
    assert!((lo - olo).abs() < 1e-12 && (hi - ohi).abs() < 1e-12);
    assert!((hi - 7.666_666_666_666).abs() < 1e-9);

    let r = check_hypothesis_h(&stable(1.5), 2, 1.6, 1.4).unwrap();
    assert!(r.satisfied, "{:?}", r.reasons);
    let (lo, hi) = r.eta_range.unwrap();
    let (olo, ohi) = eta_oracle(2.0, 1.6, 1.4);
    assert!((lo - olo).abs() < 1e-12 && (hi - ohi).abs() < 1e-9);
    assert!((hi - 4.0).abs() < 1e-9);

    let r = check_hypothesis_h(&stable(1.9), 1, 0.5, 0.5).unwrap();
    assert!(!r.satisfied);
    assert!(r.reasons.iter().any(|s| s.contains("small-jump")));

    // p < 1 needs b0 = 0
    let drifted = LevyMeasureSpec::stable(0.5).unwrap().with_drift(1.0);
    assert!(!check_hypothesis_h(&drifted, 1, 0.7, 0.4).unwrap().satisfied);
}

#[test]
fn poisson_jump_counts() {
    // ν({|z| > 1}) = 2 on [0, 1] × [0, π]: counts ~ Poisson(2π)
    let spec = LevyMeasureSpec::compound_poisson(2.0, JumpLaw::Rademacher { scale: 2.0 }).unwrap();
    let region = SimRegion::interval(1.0).unwrap();
    let n = 10_000;
    let lambda = 2.0 * PI;
    let mut counts = vec![0usize; 16];
    for seed in 0..n {
        let pm = sample_prm(&spec, region, 1.0, LargeCutoff::None, seed).unwrap();
        counts[pm.len().min(15)] += 1;
    }
    let mut pmf = Vec::new();
    let mut p = (-lambda).exp();
    for k in 0..15 {
        pmf.push(p);
        p *= lambda / (k + 1) as f64;
    }
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    // pool the sparse low bins
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o, mut e) = (0.0, 0.0);
    for k in 0..16 {
        o += counts[k] as f64;
        e += pmf[k] * n as f64;
        if e >= 20.0 {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    *obs.last_mut().unwrap() += o;
    *exp.last_mut().unwrap() += e;
    let chi2: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let p = chi_square_sf(chi2, (obs.len() - 1) as f64);
    assert!(p > 0.001, "chi2 = {chi2}, p = {p}");
}

#[test]
fn stable_marks_follow_power_tail() {
    let eps = 0.01;
    let region = SimRegion::interval(1.0).unwrap();
    let marks: Vec<f64> = (0..60)
        .flat_map(|s| sample_prm(&stable(0.5), region, eps, LargeCutoff::None, s).unwrap().jumps)
        .map(|j| j.z.abs())
        .take(5000)
        .collect();
    assert_eq!(marks.len(), 5000);
    let ks = ks_one_sample(&marks, |u| if u <= eps { 0.0 } else { 1.0 - (eps / u).sqrt() });
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn restriction_matches_direct_sampling() {
    let spec = stable(0.8);
    let region = SimRegion::interval(1.0).unwrap();
    let (fine, coarse) = (0.02, 0.1);
    let mut counts_a = Vec::new();
    let mut counts_b = Vec::new();
    let mut marks_a = Vec::new();
    let mut marks_b = Vec::new();
    for s in 0..400 {
        let a = sample_prm(&spec, region, fine, LargeCutoff::None, s).unwrap().restrict_small(&spec, coarse).unwrap();
        let b = sample_prm(&spec, region, coarse, LargeCutoff::None, 10_000 + s).unwrap();
        assert_eq!(a.b_eps, b.b_eps);
        counts_a.push(a.len() as f64);
        counts_b.push(b.len() as f64);
        marks_a.extend(a.jumps.iter().map(|j| j.z.abs()));
        marks_b.extend(b.jumps.iter().map(|j| j.z.abs()));
    }
    assert!(ks_two_sample(&marks_a, &marks_b).p_value > 0.01);
    // counts are discrete, so compare means instead of a KS p-value
    let se = ((variance(&counts_a) + variance(&counts_b)) / 400.0).sqrt();
    assert!((mean(&counts_a) - mean(&counts_b)).abs() < 4.0 * se);
}

#[test]
fn levy_ito_mean_of_jump_sum() {
    let spec = LevyMeasureSpec::compound_poisson(3.0, JumpLaw::Normal { mean: 0.5, std: 1.0 }).unwrap();
    let region = SimRegion::interval(1.0).unwrap();
    let sums: Vec<f64> = (0..4000)
        .map(|s| sample_prm(&spec, region, 0.0, LargeCutoff::None, s).unwrap().jumps.iter().map(|j| j.z).sum())
        .collect();
    let expected = 1.0 * PI * 3.0 * 0.5;
    let se = (variance(&sums) / sums.len() as f64).sqrt();
    assert!((mean(&sums) - expected).abs() < 3.0 * se, "{} vs {expected} (se {se})", mean(&sums));
}

#[test]
fn stopping_time_examples() {
    let r = SimRegion::interval(1.0).unwrap();
    let pm = PointMeasure::from_jumps(r, vec![Jump::new(0.3, &[1.2], 5.0), Jump::new(0.7, &[2.0], 12.0)]).unwrap();
    assert_eq!(tau_fixed(&pm, 10.0).tau, 0.7);
    assert_eq!(tau_fixed(&pm, 20.0).tau, f64::INFINITY);
    assert_eq!(tau_fixed(&pm, 4.0).tau, 0.3);

    let b = SimRegion::boxed(1.0, 2, 5.0).unwrap();
    let far = PointMeasure::from_jumps(b, vec![Jump::new(0.5, &[3.0, 0.0], 40.0)]).unwrap();
    assert_eq!(tau_weighted(&far, 10.0, 1.0).unwrap().tau, f64::INFINITY);
    let near = PointMeasure::from_jumps(b, vec![Jump::new(0.5, &[0.0, 0.0], 40.0)]).unwrap();
    assert_eq!(tau_weighted(&near, 10.0, 1.0).unwrap().tau, 0.5);
    let n = 2.0;
    let jumps: Vec<Jump> = (1..5)
        .map(|i| {
            let x = [i as f64, 0.0];
            Jump::new(0.1 * i as f64, &x, 2.0 * n * (1.0 + i as f64) * 1.01)
        })
        .collect();
    let grow = PointMeasure::from_jumps(b, jumps).unwrap();
    assert_eq!(tau_weighted(&grow, n, 1.0).unwrap().tau, 0.1);
}

#[test]
fn truncation_drift_and_symmetry() {
    let sym = stable(1.2).with_drift(0.4);
    let pm = sample_prm(&sym, SimRegion::interval(1.0).unwrap(), 0.1, LargeCutoff::None, 3).unwrap();
    for n in [1.0, 2.0, 5.0] {
        assert_eq!(truncate_noise(&pm, &sym, n).unwrap().1, 0.4);
    }
    // one-sided: b_N = b + ∫₁⁴ z · z^{−3/2} dz = b + 2(√4 − 1)
    let one_sided = LevyMeasureSpec::stable_asym(0.5, 1.0, 0.0).unwrap();
    assert!((truncate_noise(&pm, &one_sided, 4.0).unwrap().1 - (pm.b + 2.0)).abs() < 1e-12);
    let (same, _) = truncate_noise(&pm, &sym, 1e12).unwrap();
    assert_eq!(same.jumps, pm.jumps);
}

#[test]
fn equal_seeds_give_identical_csv() {
    let region = SimRegion::boxed(0.5, 2, 2.0).unwrap();
    let a = sample_prm(&stable(1.1), region, 0.05, LargeCutoff::Fixed { n: 10.0 }, 99).unwrap();
    let b = sample_prm(&stable(1.1), region, 0.05, LargeCutoff::Fixed { n: 10.0 }, 99).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.jumps.windows(2).all(|w| w[0].t < w[1].t));
    assert!(a.jumps.iter().all(|j| j.z.abs() > 0.05 && j.z.abs() <= 10.0 && region.contains(j.pos(2))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_moments_decrease_in_p(alpha in 0.05f64..1.95, p1 in 0.05f64..3.0, dp in 0.0f64..1.0) {
        let s = stable(alpha);
        let a = s.small_jump_moment(p1).unwrap();
        let b = s.small_jump_moment(p1 + dp).unwrap();
        prop_assert!(!b.is_finite() || !a.is_finite() || b.value() <= a.value() * (1.0 + 1e-12));
        prop_assert!(a.is_finite() || !b.is_finite() || dp > 0.0);
    }

    #[test]
    fn satisfied_implies_nonempty_eta(alpha in 0.05f64..1.95, d in 1usize..4, p in 0.05f64..3.0, frac in 0.0f64..1.0) {
        let q = p * frac.max(0.01);
        let r = check_hypothesis_h(&stable(alpha), d, p, q).unwrap();
        if r.satisfied {
            let (lo, hi) = r.eta_range.unwrap();
            prop_assert!(lo < hi);
        }
    }

    #[test]
    fn stopping_times_grow_with_n(seed in 0u64..200, n in 1.0f64..20.0, dn in 0.0f64..10.0) {
        let spec = stable(1.3);
        let pm = sample_prm(&spec, SimRegion::interval(1.0).unwrap(), 0.3, LargeCutoff::None, seed).unwrap();
        prop_assert!(tau_fixed(&pm, n).tau <= tau_fixed(&pm, n + dn).tau);
        let (tr, _) = truncate_noise(&pm, &spec, n).unwrap();
        prop_assert_eq!(tau_fixed(&tr, n).tau, f64::INFINITY);
    }
}
