use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp, Normal, Poisson};

use super::{compensator_drift, separate_ties, Jump, LargeCutoff, PointMeasure, SimRegion, MAX_DIM};
use crate::error::{Error, Result};
use crate::levy::{Integral, JumpLaw, LevyKind, LevyMeasureSpec};
use crate::rng::stream;

/// Refuse realizations whose expected jump count exceeds this.
pub const MAX_EXPECTED_JUMPS: f64 = 5.0e7;

const MAX_REJECTIONS: usize = 1_000_000;
const TABLE_CELLS: usize = 4000;

/// Sampler for marks from ν restricted to {|z| > ε}, normalized.
#[derive(Clone, Debug)]
pub enum MarkSampler {
    /// Inverse CDF of the Pareto tail: |Z| = ε U^{−1/α}.
    Stable { alpha: f64, eps: f64, p_plus: f64 },
    /// Stable proposal, accepted with probability e^{−λ(|Z|−ε)}.
    Tempered { alpha: f64, lambda: f64, eps: f64, p_plus: f64 },
    /// Mixture of (ε, c] with log-uniform proposal and (c, ∞) with exponential proposal.
    Gamma { eps: f64, cut: f64, rate: f64, p_low: f64 },
    /// Jump law conditioned on |Z| > ε by rejection.
    CompoundPoisson { law: JumpLaw, weights: Option<WeightedIndex<f64>>, eps: f64 },
    /// Piecewise-uniform inverse CDF on a geometric grid (custom densities).
    Tabulated { cells: Vec<(f64, f64)>, cumulative: Vec<f64> },
}

impl MarkSampler {
    /// Sampler and total mass ν({|z| > ε}).
    pub fn new(spec: &LevyMeasureSpec, eps: f64) -> Result<(Self, f64)> {
        let mass = match spec.tail_mass(eps)? {
            Integral::Finite(m) => m,
            Integral::Divergent => {
                return Err(Error::precondition("infinite activity requires cutoff (eps > 0)"))
            }
        };
        let sampler = match &spec.kind {
            LevyKind::Stable { alpha, c_plus, c_minus } => MarkSampler::Stable {
                alpha: *alpha,
                eps,
                p_plus: c_plus / (c_plus + c_minus),
            },
            LevyKind::TemperedStable { alpha, lambda, c_plus, c_minus } => MarkSampler::Tempered {
                alpha: *alpha,
                lambda: *lambda,
                eps,
                p_plus: c_plus / (c_plus + c_minus),
            },
            LevyKind::Gamma { rate, .. } => {
                let cut = eps + 1.0 / rate;
                let low = spec.abs_moment_window(0.0, eps, cut)?.value();
                MarkSampler::Gamma { eps, cut, rate: *rate, p_low: low / mass }
            }
            LevyKind::CompoundPoisson { total_mass, jump_law } => {
                if mass < 1e-6 * total_mass {
                    return Err(Error::precondition(format!(
                        "jump law has P(|Z| > {eps}) = {:e}; too small to sample by rejection",
                        mass / total_mass
                    )));
                }
                let weights = match jump_law {
                    JumpLaw::Discrete { weights, .. } => Some(
                        WeightedIndex::new(weights.clone()).map_err(|e| Error::config(format!("discrete weights: {e}")))?,
                    ),
                    _ => None,
                };
                MarkSampler::CompoundPoisson { law: jump_law.clone(), weights, eps }
            }
            LevyKind::Custom(c) => {
                let (lo, hi) = c.support;
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::config("sampling a custom density needs bounded support"));
                }
                tabulate(spec, eps, lo, hi)?
            }
        };
        Ok((sampler, mass))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MarkSampler::Stable { alpha, eps, p_plus } => {
                let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                let r = eps * u.powf(-1.0 / alpha);
                signed(rng, r, *p_plus)
            }
            MarkSampler::Tempered { alpha, lambda, eps, p_plus } => loop {
                let u: f64 = 1.0 - rng.random::<f64>();
                let r = eps * u.powf(-1.0 / alpha);
                if rng.random::<f64>() < (-lambda * (r - eps)).exp() {
                    break signed(rng, r, *p_plus);
                }
            },
            MarkSampler::Gamma { eps, cut, rate, p_low } => {
                if rng.random::<f64>() < *p_low {
                    // density ∝ r^{-1} e^{-rate r} on (eps, cut]
                    let span = (cut / eps).ln();
                    loop {
                        let r = eps * (span * rng.random::<f64>()).exp();
                        if rng.random::<f64>() < (-rate * (r - eps)).exp() {
                            break r;
                        }
                    }
                } else {
                    let e = Exp::new(*rate).expect("positive rate");
                    loop {
                        let r = cut + e.sample(rng);
                        if rng.random::<f64>() < cut / r {
                            break r;
                        }
                    }
                }
            }
            MarkSampler::CompoundPoisson { law, weights, eps } => {
                for _ in 0..MAX_REJECTIONS {
                    let z = draw_law(law, weights.as_ref(), rng);
                    if z.abs() > *eps {
                        return z;
                    }
                }
                unreachable!("acceptance probability checked at construction")
            }
            MarkSampler::Tabulated { cells, cumulative } => {
                let u = rng.random::<f64>() * cumulative.last().copied().unwrap_or(0.0);
                let i = cumulative.partition_point(|c| *c <= u).min(cells.len() - 1);
                let (a, b) = cells[i];
                a + (b - a) * rng.random::<f64>()
            }
        }
    }
}

fn signed<R: Rng + ?Sized>(rng: &mut R, r: f64, p_plus: f64) -> f64 {
    if rng.random::<f64>() < p_plus {
        r
    } else {
        -r
    }
}

fn draw_law<R: Rng + ?Sized>(law: &JumpLaw, weights: Option<&WeightedIndex<f64>>, rng: &mut R) -> f64 {
    match law {
        JumpLaw::Dirac { value } => *value,
        JumpLaw::Rademacher { scale } => {
            if rng.random::<bool>() {
                *scale
            } else {
                -*scale
            }
        }
        JumpLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        JumpLaw::Normal { mean, std } => Normal::new(*mean, *std).expect("validated").sample(rng),
        JumpLaw::Discrete { values, .. } => values[weights.expect("discrete weights").sample(rng)],
    }
}

fn tabulate(spec: &LevyMeasureSpec, eps: f64, lo: f64, hi: f64) -> Result<MarkSampler> {
    let start = eps.max(1e-300);
    let mut cells = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = 0.0;
    let LevyKind::Custom(c) = &spec.kind else {
        unreachable!("tabulate is only used for custom densities")
    };
    for (sign, reach) in [(1.0, hi), (-1.0, -lo)] {
        if reach <= start {
            continue;
        }
        let q = (reach / start).powf(1.0 / TABLE_CELLS as f64);
        let mut a = start;
        for i in 0..TABLE_CELLS {
            let b = if i + 1 == TABLE_CELLS { reach } else { a * q };
            let f = |r: f64| (c.density)(sign * r);
            let (m, _) = crate::quad::integrate(f, a, b, 1e-8, 1e-300)?;
            acc += m;
            let cell = if sign > 0.0 { (a, b) } else { (-b, -a) };
            cells.push(cell);
            cumulative.push(acc);
            a = b;
        }
    }
    if cells.is_empty() || acc <= 0.0 {
        return Err(Error::precondition(format!("custom density has no mass above eps = {eps}")));
    }
    Ok(MarkSampler::Tabulated { cells, cumulative })
}

/// Sample J on [0, T] × D × {|z| > ε}, then drop jumps beyond `large_cutoff`.
///
/// The count is Poisson(ν(|z|>ε)·T·|D|), positions are uniform, marks i.i.d.
/// from the normalized restriction of ν. The draw sequence is fixed
/// (count, then per jump t, x₁..x_d, mark), so equal seeds give identical output.
pub fn sample_prm(
    spec: &LevyMeasureSpec,
    region: SimRegion,
    eps: f64,
    large_cutoff: LargeCutoff,
    seed: u64,
) -> Result<PointMeasure> {
    region.validate()?;
    large_cutoff.validate()?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("small-jump cutoff must be a finite eps >= 0, got {eps}")));
    }
    if eps == 0.0 && !spec.is_finite_activity() {
        return Err(Error::precondition("infinite activity requires cutoff (eps > 0)"));
    }
    let (sampler, mass) = MarkSampler::new(spec, eps)?;
    let mean = mass * region.horizon * region.volume();
    if mean > MAX_EXPECTED_JUMPS {
        return Err(Error::config(format!(
            "expected jump count {mean:.3e} exceeds {MAX_EXPECTED_JUMPS:e}; raise the cutoff"
        )));
    }
    let mut rng = stream(seed);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::numerical(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let dim = region.dim();
    let (lo, hi) = region.bounds();
    let mut jumps = Vec::with_capacity(count);
    for _ in 0..count {
        let t = region.horizon * rng.random::<f64>();
        let mut x = [0.0; MAX_DIM];
        for xi in x.iter_mut().take(dim) {
            *xi = lo + (hi - lo) * rng.random::<f64>();
        }
        let z = sampler.sample(&mut rng);
        jumps.push(Jump { t, x, z });
    }
    jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
    separate_ties(&mut jumps);
    jumps.retain(|j| large_cutoff.keeps(j, dim));
    Ok(PointMeasure {
        jumps,
        region,
        small_cutoff: eps,
        large_cutoff,
        b: spec.b,
        b_eps: compensator_drift(spec, eps)?,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn deterministic_for_equal_seeds() {
        let spec = LevyMeasureSpec::stable(1.2).unwrap();
        let r = SimRegion::boxed(1.0, 2, 1.0).unwrap();
        let a = sample_prm(&spec, r, 0.1, LargeCutoff::None, 9).unwrap();
        let b = sample_prm(&spec, r, 0.1, LargeCutoff::None, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_prm(&spec, r, 0.1, LargeCutoff::None, 10).unwrap();
        assert_ne!(a.jumps, c.jumps);
    }

    #[test]
    fn infinite_activity_needs_cutoff() {
        let spec = LevyMeasureSpec::stable(0.5).unwrap();
        let r = SimRegion::interval(1.0).unwrap();
        let e = sample_prm(&spec, r, 0.0, LargeCutoff::None, 1).unwrap_err();
        assert!(e.to_string().contains("infinite activity requires cutoff"));
    }

    #[test]
    fn cutoffs_are_respected() {
        let spec = LevyMeasureSpec::stable(0.8).unwrap();
        let r = SimRegion::boxed(1.0, 1, 2.0).unwrap();
        let pm = sample_prm(&spec, r, 0.05, LargeCutoff::Fixed { n: 3.0 }, 4).unwrap();
        assert!(!pm.is_empty());
        assert!(pm.jumps.iter().all(|j| j.z.abs() > 0.05 && j.z.abs() <= 3.0));
        assert!(pm.jumps.iter().all(|j| j.t >= 0.0 && j.t <= 1.0 && j.x[0].abs() <= 2.0));
        let pm = sample_prm(&spec, r, 0.05, LargeCutoff::Weighted { n: 1.0, eta: 1.0 }, 4).unwrap();
        assert!(pm.jumps.iter().all(|j| j.z.abs() <= 1.0 + j.x[0].abs()));
    }

    #[test]
    fn gamma_marks_follow_the_tail() {
        let spec = LevyMeasureSpec::gamma(1.0, 2.0).unwrap();
        let eps = 0.01;
        let (s, mass) = MarkSampler::new(&spec, eps).unwrap();
        let mut rng = stream(3);
        let xs: Vec<f64> = (0..20_000).map(|_| s.sample(&mut rng)).collect();
        // compare P(Z > u | Z > eps) at a few thresholds
        for &u in &[0.05, 0.3, 1.0] {
            let want = spec.tail_mass(u).unwrap().value() / mass;
            let got = xs.iter().filter(|z| **z > u).count() as f64 / xs.len() as f64;
            let se = (want * (1.0 - want) / xs.len() as f64).sqrt();
            assert!((got - want).abs() < 5.0 * se, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn tempered_marks_follow_the_tail() {
        let spec = LevyMeasureSpec::tempered_stable(1.2, 2.0).unwrap();
        let eps = 0.05;
        let (s, mass) = MarkSampler::new(&spec, eps).unwrap();
        let mut rng = stream(5);
        let xs: Vec<f64> = (0..20_000).map(|_| s.sample(&mut rng).abs()).collect();
        for &u in &[0.1, 0.4, 1.5] {
            let want = spec.tail_mass(u).unwrap().value() / mass;
            let got = xs.iter().filter(|z| **z > u).count() as f64 / xs.len() as f64;
            let se = (want * (1.0 - want) / xs.len() as f64).sqrt();
            assert!((got - want).abs() < 5.0 * se, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn custom_tabulated_sampler() {
        // a truncated symmetric 0.6-stable density on [-2, 2]
        let spec = LevyMeasureSpec::custom("trunc", (-2.0, 2.0), |z: f64| z.abs().powf(-1.6)).unwrap();
        let eps = 0.1;
        let (s, mass) = MarkSampler::new(&spec, eps).unwrap();
        let want_mass = 2.0 * (eps.powf(-0.6) - 2f64.powf(-0.6)) / 0.6;
        assert!((mass - want_mass).abs() < 1e-6 * want_mass);
        let mut rng = stream(8);
        let xs: Vec<f64> = (0..20_000).map(|_| s.sample(&mut rng)).collect();
        assert!(xs.iter().all(|z| z.abs() > eps && z.abs() <= 2.0));
        let pos = xs.iter().filter(|z| **z > 0.0).count() as f64 / xs.len() as f64;
        assert!((pos - 0.5).abs() < 0.02);
    }
}
