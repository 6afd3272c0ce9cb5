use serde::{Serialize, Serializer};

use super::{Integral, LevyMeasureSpec};
use crate::error::{Error, Result};
use crate::kernels::mittag_leffler;

/// Outcome of checking the integrability hypothesis on ℝ^d for a pair (p, q).
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub small_jump_integral: Integral,
    pub large_jump_integral: Integral,
    /// b − ∫_{|z|≤1} z ν(dz); `None` when the first absolute moment diverges.
    pub b0: Option<f64>,
    pub satisfied: bool,
    /// Admissible weights η for h(x) = 1 + |x|^η, as an open interval.
    #[serde(serialize_with = "ser_interval")]
    pub eta_range: Option<(f64, f64)>,
    pub reasons: Vec<String>,
}

fn ser_interval<S: Serializer>(v: &Option<(f64, f64)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some((lo, hi)) => {
            let hi = if hi.is_finite() { Integral::Finite(*hi) } else { Integral::Divergent };
            (Integral::Finite(*lo), hi).serialize(s)
        }
    }
}

/// Tolerance for "b₀ = 0".
const B0_TOL: f64 = 1e-12;

impl HypothesisReport {
    /// Mittag-Leffler bound E_{a,β}(C_N R^{η(p−q)/(p∨1)}) on sup E|u_N|^p over [0,T]×[−R,R]^d,
    /// with a = (2 − d(p−1)) / (2(p∨1)) and β = 1/(p∨1).
    pub fn moment_bound(&self, c_n: f64, radius: f64, eta: f64) -> Result<f64> {
        let (lo, hi) = self
            .eta_range
            .ok_or_else(|| Error::precondition("moment bound needs an admissible eta range"))?;
        if !(eta > lo && eta < hi) {
            return Err(Error::precondition(format!("eta = {eta} outside ({lo}, {hi})")));
        }
        let pv = self.p.max(1.0);
        let a = (2.0 - self.d as f64 * (self.p - 1.0)) / (2.0 * pv);
        let beta = 1.0 / pv;
        let z = c_n * radius.powf(eta * (self.p - self.q) / pv);
        mittag_leffler(a, beta, z)
    }
}

/// Check the ℝ^d integrability hypothesis for explicit exponents (p, q).
pub fn check_hypothesis_h(spec: &LevyMeasureSpec, d: usize, p: f64, q: f64) -> Result<HypothesisReport> {
    if d == 0 {
        return Err(Error::precondition("dimension must be at least 1"));
    }
    let df = d as f64;
    let p_max = 1.0 + 2.0 / df;
    let mut reasons = Vec::new();

    if !(p > 0.0 && p < p_max) {
        reasons.push(format!("p = {p} must lie in (0, 1 + 2/d) = (0, {p_max})"));
    }
    let q_min = p / (1.0 + (p_max - p));
    if !(q > q_min && q <= p) {
        reasons.push(format!("q = {q} must satisfy {q_min} < q <= p = {p}"));
    }
    let small = if p > 0.0 { spec.small_jump_moment(p)? } else { Integral::Divergent };
    if !small.is_finite() {
        reasons.push(format!("small-jump integral of |z|^{p} diverges"));
    }
    let large = if q > 0.0 { spec.large_jump_moment(q)? } else { Integral::Divergent };
    if !large.is_finite() {
        reasons.push(format!("large-jump integral of |z|^{q} diverges"));
    }
    let b0 = spec.b0()?;
    if p < 1.0 {
        match b0 {
            Some(v) if v.abs() <= B0_TOL * (1.0 + spec.b.abs()) => {}
            Some(v) => reasons.push(format!("p < 1 requires b0 = 0, got b0 = {v}")),
            None => reasons.push("p < 1 requires b0 = 0, but the first moment of small jumps diverges".into()),
        }
    }

    let eta_range = if q > 0.0 && q <= p && p < p_max {
        let lo = df / q;
        let hi = if p == q { f64::INFINITY } else { (2.0 - df * (p - 1.0)) / (p - q) };
        (lo < hi).then_some((lo, hi))
    } else {
        None
    };
    if reasons.is_empty() && eta_range.is_none() {
        reasons.push("admissible eta range is empty".into());
    }
    let satisfied = reasons.is_empty();
    Ok(HypothesisReport {
        d,
        p,
        q,
        small_jump_integral: small,
        large_jump_integral: large,
        b0,
        satisfied,
        eta_range,
        reasons,
    })
}

/// The bounded-domain hypothesis: some 0 < p < 1 + 2/d with finite small-jump p-moment.
pub fn check_hypothesis_h_prime(spec: &LevyMeasureSpec, d: usize, p: f64) -> Result<bool> {
    if d == 0 {
        return Err(Error::precondition("dimension must be at least 1"));
    }
    Ok(p > 0.0 && p < 1.0 + 2.0 / d as f64 && spec.small_jump_moment(p)?.is_finite())
}

/// Grid search for an admissible pair (p, q); returns the first satisfied report.
pub fn find_admissible_pq(spec: &LevyMeasureSpec, d: usize) -> Result<Option<HypothesisReport>> {
    if d == 0 {
        return Err(Error::precondition("dimension must be at least 1"));
    }
    let p_max = 1.0 + 2.0 / d as f64;
    const NP: usize = 200;
    const NQ: usize = 100;
    for i in 1..NP {
        let p = p_max * i as f64 / NP as f64;
        if !spec.small_jump_moment(p)?.is_finite() {
            continue;
        }
        let q_min = p / (1.0 + (p_max - p));
        for j in 0..NQ {
            let q = p - (p - q_min) * j as f64 / NQ as f64;
            let r = check_hypothesis_h(spec, d, p, q)?;
            if r.satisfied {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_half_stable_in_one_dimension() {
        let s = LevyMeasureSpec::stable(0.5).unwrap();
        let r = check_hypothesis_h(&s, 1, 0.7, 0.4).unwrap();
        assert!(r.satisfied, "{:?}", r.reasons);
        let (lo, hi) = r.eta_range.unwrap();
        assert_relative_eq!(lo, 2.5, epsilon = 1e-14);
        assert_relative_eq!(hi, 2.3 / 0.3, epsilon = 1e-12);
    }

    #[test]
    fn nonzero_b0_fails_below_one() {
        let s = LevyMeasureSpec::stable(0.5).unwrap().with_drift(0.3);
        let r = check_hypothesis_h(&s, 1, 0.7, 0.4).unwrap();
        assert!(!r.satisfied);
        assert!(r.reasons.iter().any(|m| m.contains("b0")));
    }

    #[test]
    fn equal_exponents_give_unbounded_eta() {
        let s = LevyMeasureSpec::compound_poisson(1.0, super::super::JumpLaw::Rademacher { scale: 2.0 }).unwrap();
        let r = check_hypothesis_h(&s, 2, 1.5, 1.5).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.eta_range.unwrap().1, f64::INFINITY);
        let js = serde_json::to_value(&r).unwrap();
        assert_eq!(js["eta_range"][1], "+inf");
    }

    #[test]
    fn search_finds_pair_for_stable() {
        for &(a, d) in &[(0.5, 1usize), (1.5, 1), (1.5, 2), (0.8, 2)] {
            let s = LevyMeasureSpec::stable(a).unwrap();
            let r = find_admissible_pq(&s, d).unwrap().expect("admissible pair");
            assert!(r.p > a && r.q < a);
        }
    }

    #[test]
    fn moment_bound_is_finite_and_increasing_in_radius() {
        let s = LevyMeasureSpec::stable(1.5).unwrap();
        let r = check_hypothesis_h(&s, 2, 1.6, 1.4).unwrap();
        let b1 = r.moment_bound(1.0, 2.0, 2.0).unwrap();
        let b2 = r.moment_bound(1.0, 4.0, 2.0).unwrap();
        assert!(b1.is_finite() && b2 > b1);
        assert!(r.moment_bound(1.0, 2.0, 5.0).is_err());
    }
}
