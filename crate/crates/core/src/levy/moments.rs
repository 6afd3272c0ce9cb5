use serde::{Serialize, Serializer};

use super::{JumpLaw, LevyKind, LevyMeasureSpec};
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{gamma, gamma_p, gamma_q};

/// Value of a possibly divergent integral. `Divergent` is the +∞ sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integral {
    Finite(f64),
    Divergent,
}

impl Integral {
    /// The value as `f64`, with `Divergent` mapped to `+∞`.
    pub fn value(self) -> f64 {
        match self {
            Integral::Finite(v) => v,
            Integral::Divergent => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Integral::Finite(_))
    }

    fn map(self, f: impl FnOnce(f64) -> f64) -> Integral {
        match self {
            Integral::Finite(v) => Integral::Finite(f(v)),
            Integral::Divergent => Integral::Divergent,
        }
    }

    fn add(self, other: Integral) -> Integral {
        match (self, other) {
            (Integral::Finite(a), Integral::Finite(b)) => Integral::Finite(a + b),
            _ => Integral::Divergent,
        }
    }
}

impl Serialize for Integral {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Integral::Finite(v) => s.serialize_f64(*v),
            Integral::Divergent => s.serialize_str("+inf"),
        }
    }
}

/// ∫_a^b r^{s−1} dr on 0 ≤ a < b ≤ ∞.
fn power_integral(s: f64, a: f64, b: f64) -> Integral {
    if s > 0.0 {
        if b.is_infinite() {
            Integral::Divergent
        } else {
            Integral::Finite((b.powf(s) - a.powf(s)) / s)
        }
    } else if s < 0.0 {
        if a == 0.0 {
            Integral::Divergent
        } else if b.is_infinite() {
            Integral::Finite(a.powf(s) / -s)
        } else {
            Integral::Finite((a.powf(s) - b.powf(s)) / -s)
        }
    } else if a == 0.0 || b.is_infinite() {
        Integral::Divergent
    } else {
        Integral::Finite((b / a).ln())
    }
}

// Radial densities (ρ₊(r), ρ₋(r)) for r = |z| > 0; None for compound Poisson.
type Radial<'a> = Box<dyn Fn(f64) -> (f64, f64) + 'a>;

fn radial(spec: &LevyMeasureSpec) -> Option<Radial<'_>> {
    match &spec.kind {
        LevyKind::Stable { alpha, c_plus, c_minus } => {
            let (a, cp, cm) = (*alpha, *c_plus, *c_minus);
            Some(Box::new(move |r: f64| {
                let w = r.powf(-1.0 - a);
                (cp * w, cm * w)
            }))
        }
        LevyKind::TemperedStable { alpha, lambda, c_plus, c_minus } => {
            let (a, l, cp, cm) = (*alpha, *lambda, *c_plus, *c_minus);
            Some(Box::new(move |r: f64| {
                let w = r.powf(-1.0 - a) * (-l * r).exp();
                (cp * w, cm * w)
            }))
        }
        LevyKind::Gamma { shape, rate } => {
            let (k, th) = (*shape, *rate);
            Some(Box::new(move |r: f64| (k * (-th * r).exp() / r, 0.0)))
        }
        LevyKind::Custom(c) => {
            let (lo, hi) = c.support;
            let f = c.density.clone();
            Some(Box::new(move |r: f64| {
                let p = if r <= hi { f(r) } else { 0.0 };
                let m = if -r >= lo { f(-r) } else { 0.0 };
                (p, m)
            }))
        }
        LevyKind::CompoundPoisson { .. } => None,
    }
}

fn gk<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Result<f64> {
    match quad::integrate_with_limit(&mut f, a, b, 1e-12, 1e-300, 400) {
        Ok((v, _)) => Ok(v),
        Err(_) => quad::integrate_with_limit(&mut f, a, b, 1e-8, 1e-300, 4000).map(|(v, _)| v),
    }
}

/// ∫_a^b h over 0 < a < b < ∞, split on a geometric mesh.
fn finite_radial<F: FnMut(f64) -> f64>(mut h: F, a: f64, b: f64) -> Result<f64> {
    let n = ((b / a).log2().ceil() as usize).clamp(1, 2000);
    let q = (b / a).powf(1.0 / n as f64);
    let mut s = 0.0;
    let mut lo = a;
    for i in 0..n {
        let hi = if i + 1 == n { b } else { lo * q };
        s += gk(&mut h, lo, hi)?;
        lo = hi;
    }
    Ok(s)
}

const RATIO_RUN: usize = 10;
const MAX_PIECES: usize = 1000;

/// Sum of dyadic pieces (abs, signed) produced by `piece(k)`, with divergence
/// declared after `RATIO_RUN` consecutive abs-ratios ≥ 1 and a geometric tail
/// correction once the ratio has settled.
fn dyadic_series<F: FnMut(usize) -> Result<(f64, f64)>>(mut piece: F) -> Result<(Integral, f64)> {
    let (mut sum_abs, mut sum_signed) = (0.0, 0.0);
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut run_ge1 = 0usize;
    let mut settled = 0usize;
    for k in 0..MAX_PIECES {
        let (va, vs) = piece(k)?;
        if !va.is_finite() {
            return Ok((Integral::Divergent, f64::NAN));
        }
        sum_abs += va;
        sum_signed += vs;
        if k >= 3 && va <= 1e-16 * sum_abs {
            return Ok((Integral::Finite(sum_abs), sum_signed));
        }
        if let Some(p) = prev {
            if p > 0.0 {
                let ratio = va / p;
                if ratio >= 1.0 {
                    run_ge1 += 1;
                    if run_ge1 >= RATIO_RUN {
                        return Ok((Integral::Divergent, f64::NAN));
                    }
                } else {
                    run_ge1 = 0;
                }
                if let Some(pr) = prev_ratio {
                    if ratio < 1.0 && (ratio - pr).abs() <= (1e-9 * (1.0 - ratio)).max(1e-12) {
                        settled += 1;
                    } else {
                        settled = 0;
                    }
                }
                if k >= 20 && settled >= 5 && ratio < 1.0 {
                    let tail = ratio / (1.0 - ratio);
                    return Ok((Integral::Finite(sum_abs + va * tail), sum_signed + vs * tail));
                }
                prev_ratio = Some(ratio);
            }
        }
        prev = Some(va);
    }
    match prev_ratio {
        Some(r) if r < 1.0 => {
            let tail = r / (1.0 - r);
            let last = prev.unwrap_or(0.0);
            Ok((Integral::Finite(sum_abs + last * tail), sum_signed))
        }
        _ => Ok((Integral::Divergent, f64::NAN)),
    }
}

/// Numeric (∫|z|^p, ∫ z|z|^{p−1}) over a < |z| ≤ b from the radial densities.
fn numeric_window(rad: &Radial<'_>, p: f64, a: f64, b: f64, support_hi: f64) -> Result<(Integral, f64)> {
    let b = b.min(support_hi);
    if b <= a {
        return Ok((Integral::Finite(0.0), 0.0));
    }
    let abs_h = |r: f64| {
        let (x, y) = rad(r);
        r.powf(p) * (x + y)
    };
    let sgn_h = |r: f64| {
        let (x, y) = rad(r);
        r.powf(p) * (x - y)
    };
    let (mut total, mut signed) = (Integral::Finite(0.0), 0.0);
    // split into (a, c0] near zero, [c0, c1] finite, [c1, b) near infinity
    let c0 = if a == 0.0 { b.min(1.0) } else { a };
    let c1 = if b.is_infinite() { c0.max(1.0) } else { b };
    if a == 0.0 {
        let (i, s) = dyadic_series(|k| {
            let hi = c0 * 0.5f64.powi(k as i32);
            let lo = 0.5 * hi;
            Ok((gk(abs_h, lo, hi)?, gk(sgn_h, lo, hi)?))
        })?;
        total = total.add(i);
        signed += s;
    }
    if c1 > c0 {
        total = total.add(Integral::Finite(finite_radial(abs_h, c0, c1)?));
        signed += finite_radial(sgn_h, c0, c1)?;
    }
    if b.is_infinite() {
        let (i, s) = dyadic_series(|k| {
            let lo = c1 * 2f64.powi(k as i32);
            let hi = 2.0 * lo;
            Ok((gk(abs_h, lo, hi)?, gk(sgn_h, lo, hi)?))
        })?;
        total = total.add(i);
        signed += s;
    }
    Ok((total, signed))
}

fn support_hi(spec: &LevyMeasureSpec) -> f64 {
    match &spec.kind {
        LevyKind::Custom(c) => c.support.1.max(-c.support.0),
        _ => f64::INFINITY,
    }
}

/// E[g(Z); a < |Z| ≤ b] under the compound Poisson jump law, for g(z)=|z|^p or sign(z)|z|^p.
fn law_window(law: &JumpLaw, p: f64, a: f64, b: f64, signed: bool) -> Result<f64> {
    let g = |z: f64| {
        let r = z.abs();
        if r > a && r <= b {
            let v = r.powf(p);
            if signed {
                v * z.signum()
            } else {
                v
            }
        } else {
            0.0
        }
    };
    Ok(match law {
        JumpLaw::Dirac { value } => g(*value),
        JumpLaw::Rademacher { scale } => 0.5 * (g(*scale) + g(-*scale)),
        JumpLaw::Discrete { values, weights } => {
            let w: f64 = weights.iter().sum();
            values.iter().zip(weights).map(|(v, wi)| wi * g(*v)).sum::<f64>() / w
        }
        JumpLaw::Uniform { low, high } => {
            // positive part on (max(a, low), min(b, high)] and mirrored negative part
            let prim = |u: f64| u.powf(p + 1.0) / (p + 1.0);
            let pos_lo = a.max(*low);
            let pos_hi = b.min(*high);
            let pos = if pos_hi > pos_lo { prim(pos_hi) - prim(pos_lo) } else { 0.0 };
            let neg_lo = a.max(-*high);
            let neg_hi = b.min(-*low);
            let neg = if neg_hi > neg_lo { prim(neg_hi) - prim(neg_lo) } else { 0.0 };
            (pos + if signed { -neg } else { neg }) / (high - low)
        }
        JumpLaw::Normal { mean, std } => {
            let reach = mean.abs() + 40.0 * std;
            let hi = b.min(reach);
            if hi <= a {
                0.0
            } else {
                let phi = |z: f64| {
                    let u = (z - mean) / std;
                    (-0.5 * u * u).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
                };
                let sgn = if signed { -1.0 } else { 1.0 };
                let h = |r: f64| r.powf(p) * (phi(r) + sgn * phi(-r));
                // split at the mode magnitude so the bump is resolved
                let m = mean.abs().clamp(a, hi);
                gk(h, a, m)? + gk(h, m, hi)?
            }
        }
    })
}

/// ∫_{a<|z|≤b} |z|^p ν(dz).
pub(super) fn abs_moment_window(spec: &LevyMeasureSpec, p: f64, a: f64, b: f64) -> Result<Integral> {
    check_window(a, b)?;
    match &spec.kind {
        LevyKind::Stable { alpha, c_plus, c_minus } => {
            Ok(power_integral(p - alpha, a, b).map(|v| (c_plus + c_minus) * v))
        }
        LevyKind::CompoundPoisson { total_mass, jump_law } => {
            Ok(Integral::Finite(total_mass * law_window(jump_law, p, a, b, false)?))
        }
        _ => {
            let rad = radial(spec).expect("continuous kind");
            Ok(numeric_window(&rad, p, a, b, support_hi(spec))?.0)
        }
    }
}

/// ∫_{a<|z|≤b} z ν(dz), `Divergent` when the absolute first moment diverges.
pub(super) fn signed_first_moment(spec: &LevyMeasureSpec, a: f64, b: f64) -> Result<Integral> {
    check_window(a, b)?;
    match &spec.kind {
        LevyKind::Stable { alpha, c_plus, c_minus } => {
            if c_plus == c_minus {
                // odd integrand; finite windows cancel exactly
                return Ok(match power_integral(1.0 - alpha, a, b) {
                    Integral::Finite(_) => Integral::Finite(0.0),
                    Integral::Divergent => Integral::Divergent,
                });
            }
            Ok(power_integral(1.0 - alpha, a, b).map(|v| (c_plus - c_minus) * v))
        }
        LevyKind::CompoundPoisson { total_mass, jump_law } => {
            Ok(Integral::Finite(total_mass * law_window(jump_law, 1.0, a, b, true)?))
        }
        _ => {
            let rad = radial(spec).expect("continuous kind");
            let (abs, signed) = numeric_window(&rad, 1.0, a, b, support_hi(spec))?;
            Ok(match abs {
                Integral::Finite(_) if spec.is_symmetric() => Integral::Finite(0.0),
                Integral::Finite(_) => Integral::Finite(signed),
                Integral::Divergent => Integral::Divergent,
            })
        }
    }
}

fn check_window(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b > a) || a.is_infinite() {
        return Err(Error::precondition(format!("invalid window ({a}, {b}]")));
    }
    Ok(())
}

/// ∫_{|z|≤1} |z|^p ν(dz) (p may be 0 or 2 for internal checks).
pub(super) fn small_abs_moment(spec: &LevyMeasureSpec, p: f64) -> Result<Integral> {
    match &spec.kind {
        LevyKind::TemperedStable { alpha, lambda, c_plus, c_minus } => {
            if p <= *alpha {
                return Ok(Integral::Divergent);
            }
            let s = p - alpha;
            Ok(Integral::Finite(
                (c_plus + c_minus) * lambda.powf(-s) * gamma(s) * gamma_p(s, *lambda),
            ))
        }
        LevyKind::Gamma { shape, rate } => {
            if p <= 0.0 {
                return Ok(Integral::Divergent);
            }
            Ok(Integral::Finite(shape * rate.powf(-p) * gamma(p) * gamma_p(p, *rate)))
        }
        _ => abs_moment_window(spec, p, 0.0, 1.0),
    }
}

/// ∫_{|z|>1} |z|^q ν(dz).
pub(super) fn large_abs_moment(spec: &LevyMeasureSpec, q: f64) -> Result<Integral> {
    match &spec.kind {
        LevyKind::Gamma { shape, rate } if q > 0.0 => {
            Ok(Integral::Finite(shape * rate.powf(-q) * gamma(q) * gamma_q(q, *rate)))
        }
        _ => abs_moment_window(spec, q, 1.0, f64::INFINITY),
    }
}

/// ν({|z| > ε}).
pub(super) fn tail_mass(spec: &LevyMeasureSpec, eps: f64) -> Result<Integral> {
    if !(eps >= 0.0) {
        return Err(Error::precondition("tail_mass needs eps >= 0"));
    }
    match &spec.kind {
        LevyKind::Stable { alpha, c_plus, c_minus } if eps > 0.0 => {
            Ok(Integral::Finite((c_plus + c_minus) * eps.powf(-alpha) / alpha))
        }
        LevyKind::CompoundPoisson { total_mass, .. } if eps == 0.0 => {
            // no atom at 0, so every jump counts
            Ok(Integral::Finite(*total_mass))
        }
        _ => abs_moment_window(spec, 0.0, eps, f64::INFINITY),
    }
}

/// Numeric small-jump moment through the radial density, even where a closed form exists.
fn numeric_small_moment(spec: &LevyMeasureSpec, p: f64) -> Result<Integral> {
    match radial(spec) {
        Some(rad) => Ok(numeric_window(&rad, p, 0.0, 1.0, support_hi(spec))?.0),
        None => small_abs_moment(spec, p),
    }
}

/// Blumenthal–Getoor index by bisection on the finiteness of the numeric small-jump moment.
pub fn blumenthal_getoor_bisection(spec: &LevyMeasureSpec, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 2.0);
    if !numeric_small_moment(spec, hi)?.is_finite() {
        return Err(Error::config("∫_{|z|≤1} z² ν(dz) diverges: not a Lévy measure"));
    }
    if numeric_small_moment(spec, tol)?.is_finite() {
        return Ok(0.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if numeric_small_moment(spec, mid)?.is_finite() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stable_closed_forms() {
        let s = LevyMeasureSpec::stable(0.5).unwrap();
        assert_eq!(s.small_jump_moment(1.0).unwrap(), Integral::Finite(4.0));
        assert_eq!(s.small_jump_moment(0.5).unwrap(), Integral::Divergent);
        let s = LevyMeasureSpec::stable(1.5).unwrap();
        assert_eq!(s.large_jump_moment(1.0).unwrap(), Integral::Finite(4.0));
        assert_eq!(s.large_jump_moment(1.5).unwrap(), Integral::Divergent);
    }

    #[test]
    fn numeric_path_matches_stable_closed_form() {
        let s = LevyMeasureSpec::stable_asym(0.7, 1.0, 0.4).unwrap();
        let rad = radial(&s).unwrap();
        for &p in &[0.8, 1.0, 1.7] {
            let (num, _) = numeric_window(&rad, p, 0.0, 1.0, f64::INFINITY).unwrap();
            assert_relative_eq!(num.value(), 1.4 / (p - 0.7), max_relative = 1e-8);
        }
        for &p in &[0.3, 0.7] {
            let (num, _) = numeric_window(&rad, p, 0.0, 1.0, f64::INFINITY).unwrap();
            assert_eq!(num, Integral::Divergent);
        }
        let (num, _) = numeric_window(&rad, 0.5, 1.0, f64::INFINITY, f64::INFINITY).unwrap();
        assert_relative_eq!(num.value(), 1.4 / 0.2, max_relative = 1e-8);
    }

    #[test]
    fn tempered_closed_form_matches_numeric() {
        let s = LevyMeasureSpec::tempered_stable(1.2, 1.0).unwrap();
        let closed = s.small_jump_moment(1.6).unwrap().value();
        let rad = radial(&s).unwrap();
        let (num, _) = numeric_window(&rad, 1.6, 0.0, 1.0, f64::INFINITY).unwrap();
        assert_relative_eq!(closed, num.value(), max_relative = 1e-8);
        assert!(s.large_jump_moment(5.0).unwrap().is_finite());
    }

    #[test]
    fn compound_poisson_windows() {
        let s = LevyMeasureSpec::compound_poisson(2.0, JumpLaw::Uniform { low: -3.0, high: 3.0 }).unwrap();
        // E|Z|^0.5 over 1<|Z|≤3 = (1/6)·2·∫_1^3 r^0.5 dr
        let want = 2.0 * (2.0 / 6.0) * (3f64.powf(1.5) - 1.0) / 1.5;
        assert_relative_eq!(s.large_jump_moment(0.5).unwrap().value(), want, max_relative = 1e-12);
        assert_eq!(s.signed_first_moment(0.0, 10.0).unwrap(), Integral::Finite(0.0));
        assert_eq!(s.tail_mass(0.0).unwrap(), Integral::Finite(2.0));
    }

    #[test]
    fn normal_law_tail_mass() {
        let s = LevyMeasureSpec::compound_poisson(3.0, JumpLaw::Normal { mean: 0.0, std: 1.0 }).unwrap();
        // P(|Z| > 1) = 0.31731050786291415
        assert_relative_eq!(s.tail_mass(1.0).unwrap().value(), 3.0 * 0.317_310_507_862_914_15, max_relative = 1e-9);
    }

    #[test]
    fn serialization_of_sentinel() {
        assert_eq!(serde_json::to_string(&Integral::Divergent).unwrap(), "\"+inf\"");
        assert_eq!(serde_json::to_string(&Integral::Finite(1.5)).unwrap(), "1.5");
    }
}
