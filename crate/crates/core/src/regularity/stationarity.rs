//! Translation invariance of the law of u(t, ·) for constant initial data.

use serde::{Deserialize, Serialize};

use super::StudyConfig;
use crate::error::{Error, Result};
use crate::kernels::{gauss, KernelEngine};
use crate::noise::{sample_prm, Domain, SimRegion};
use crate::rng::{derive_seed, StreamTag};
use crate::solver::{jump_weights, InitialCondition};
use crate::stats::ks_two_sample;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarityParams {
    pub t: f64,
    /// Base points x; each is compared with x + a for every shift a.
    pub points: Vec<Vec<f64>>,
    pub shifts: Vec<Vec<f64>>,
    /// Small-jump cutoff ε of the simulated noise.
    pub small_cutoff: f64,
    /// Family-wise level for the Bonferroni-adjusted p-values.
    pub level: f64,
}

impl Default for StationarityParams {
    fn default() -> Self {
        StationarityParams {
            t: 0.05,
            points: vec![vec![0.0, 0.0]],
            shifts: vec![vec![0.5, 0.0]],
            small_cutoff: 0.01,
            level: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftTest {
    pub point: Vec<f64>,
    pub shift: Vec<f64>,
    pub statistic: f64,
    pub p_value: f64,
    /// min(1, m·p) over the m tests.
    pub p_adjusted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityReport {
    pub t: f64,
    pub replicas: usize,
    pub seed: u64,
    pub level: f64,
    pub tests: Vec<ShiftTest>,
    pub min_adjusted_p: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Two-sample KS comparison of {u(t, x)} and {u(t, x + a)} across replicas.
///
/// Both samples come from the same replicas, so a = 0 gives identical samples;
/// for a ≠ 0 the positive dependence between the two makes the test conservative.
pub fn stationarity_test(
    config: &StudyConfig,
    params: &StationarityParams,
    replicas: usize,
    seed: u64,
) -> Result<StationarityReport> {
    config.levy.validate()?;
    config.sigma.validate()?;
    let Domain::Box { dim, half_width } = config.region.domain else {
        return Err(Error::precondition("the stationarity test needs a box standing in for R^d"));
    };
    if !config.u0.is_constant() {
        return Err(Error::precondition("translation invariance holds only for constant initial data"));
    }
    if !(params.t > 0.0 && params.t <= config.region.horizon) {
        return Err(Error::config("t must lie in (0, T]"));
    }
    if replicas < 2 || params.points.is_empty() || params.shifts.is_empty() {
        return Err(Error::config("need at least two replicas, one point and one shift"));
    }
    let margin = 0.25 * half_width;
    let mut pairs = Vec::new();
    for p in &params.points {
        for a in &params.shifts {
            if p.len() != dim || a.len() != dim {
                return Err(Error::config("points and shifts must have the box dimension"));
            }
            let q: Vec<f64> = p.iter().zip(a).map(|(x, y)| x + y).collect();
            if p.iter().chain(&q).any(|v| v.abs() > half_width - margin) {
                return Err(Error::precondition(format!(
                    "comparison point {q:?} or {p:?} lies within A/4 = {margin} of the box edge"
                )));
            }
            pairs.push((p.clone(), a.clone(), q));
        }
    }
    let region = SimRegion { horizon: params.t, domain: config.region.domain };
    let c0 = config.u0.eval(&vec![0.0; dim]);
    let constant = config.sigma.constant_value();
    let t = params.t;
    let samples: Vec<Vec<(f64, f64)>> = crate::par::try_map_indexed(replicas, |k| -> Result<Vec<(f64, f64)>> {
        let pm = sample_prm(
            &config.levy,
            region,
            params.small_cutoff,
            config.large_cutoff,
            derive_seed(seed, k as u64, StreamTag::Stationarity),
        )?;
        let w = jump_weights(&pm, &InitialCondition::Constant { c: c0 }, &config.sigma, KernelEngine::Gaussian)?;
        let drift = constant.map_or(0.0, |c| c * pm.drift());
        let value = |x: &[f64]| {
            let mut u = c0 + drift * t;
            for (j, wl) in pm.jumps.iter().zip(&w) {
                let r2: f64 = x.iter().zip(j.pos(dim)).map(|(a, b)| (a - b) * (a - b)).sum();
                u += wl * gauss(t - j.t, r2, dim);
            }
            u
        };
        Ok(pairs.iter().map(|(p, _, q)| (value(p), value(q))).collect())
    })?;
    let m = pairs.len() as f64;
    let tests: Vec<ShiftTest> = pairs
        .iter()
        .enumerate()
        .map(|(i, (p, a, _))| {
            let xs: Vec<f64> = samples.iter().map(|s| s[i].0).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s[i].1).collect();
            let ks = ks_two_sample(&xs, &ys);
            ShiftTest {
                point: p.clone(),
                shift: a.clone(),
                statistic: ks.statistic,
                p_value: ks.p_value,
                p_adjusted: (m * ks.p_value).min(1.0),
            }
        })
        .collect();
    let min_adjusted_p = tests.iter().map(|t| t.p_adjusted).fold(1.0, f64::min);
    let mut notes = vec![format!("paired samples from {replicas} replicas; box edge margin A/4 = {margin}")];
    if constant.is_none() {
        notes.push("non-constant sigma: jump weights by exact recursion over the jumps".into());
    }
    Ok(StationarityReport {
        t,
        replicas,
        seed,
        level: params.level,
        tests,
        min_adjusted_p,
        passed: min_adjusted_p > params.level,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;

    fn cfg() -> StudyConfig {
        let mut c = StudyConfig::new(LevyMeasureSpec::stable(0.8).unwrap(), SimRegion::boxed(0.05, 2, 3.0).unwrap());
        c.u0 = InitialCondition::Constant { c: 1.0 };
        c
    }

    #[test]
    fn zero_shift_is_identical() {
        let p = StationarityParams { shifts: vec![vec![0.0, 0.0]], ..Default::default() };
        let r = stationarity_test(&cfg(), &p, 50, 4).unwrap();
        assert_eq!(r.tests[0].statistic, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn refuses_bad_inputs() {
        let mut c = cfg();
        c.u0 = InitialCondition::SineMode { k: 1, amplitude: 1.0 };
        assert!(stationarity_test(&c, &StationarityParams::default(), 10, 1).is_err());
        let p = StationarityParams { shifts: vec![vec![2.5, 0.0]], ..Default::default() };
        assert!(stationarity_test(&cfg(), &p, 10, 1).is_err());
    }
}
