//! Skorohod-type modulus of the H_r trajectory on [0, π].
//!
//! M(h) = E[‖u(t+h) − u(t)‖²_{H_r} ‖u(t−h) − u(t)‖²_{H_r}] estimated by Monte Carlo
//! from exact sine frames. With isolated jumps only one of the two increments can
//! contain a jump, so M(h) = O(h^{1+θ}) where θ is the H_r Hölder exponent of the
//! continuous part; the fitted log-log slope is reported with a bootstrap interval.

use serde::{Deserialize, Serialize};

use super::trajectory::sine_frames;
use crate::error::{Error, Result};
use crate::kernels::KernelEngine;
use crate::levy::LevyMeasureSpec;
use crate::noise::{sample_prm, LargeCutoff, SimRegion};
use crate::rng::{derive_seed, replica_stream, StreamTag};
use crate::solver::{jump_weights, InitialCondition, SigmaSpec};
use crate::stats::{bootstrap_ci, mean, ols};

/// Noise, coefficient and center time of the modulus study.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkorohodConfig {
    pub levy: LevyMeasureSpec,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "half")]
    pub t_center: f64,
    /// ε; must be positive for infinite activity.
    #[serde(default)]
    pub small_cutoff: f64,
    #[serde(default = "no_cutoff")]
    pub large_cutoff: LargeCutoff,
    #[serde(default = "unit_sigma")]
    pub sigma: SigmaSpec,
    #[serde(default = "zero_u0")]
    pub u0: InitialCondition,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn no_cutoff() -> LargeCutoff {
    LargeCutoff::None
}
fn unit_sigma() -> SigmaSpec {
    SigmaSpec::Constant { c: 1.0 }
}
fn zero_u0() -> InitialCondition {
    InitialCondition::Zero
}
fn default_n_max() -> usize {
    4096
}
fn default_resamples() -> usize {
    1000
}

impl SkorohodConfig {
    pub fn new(levy: LevyMeasureSpec) -> Self {
        SkorohodConfig {
            levy,
            horizon: 1.0,
            t_center: 0.5,
            small_cutoff: 0.0,
            large_cutoff: LargeCutoff::None,
            sigma: unit_sigma(),
            u0: InitialCondition::Zero,
            n_max: default_n_max(),
            bootstrap_resamples: default_resamples(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkorohodReport {
    pub r: f64,
    pub t_center: f64,
    pub h: Vec<f64>,
    pub modulus: Vec<f64>,
    /// Least-squares slope of log M against log h; None when M vanishes.
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    pub r_squared: Option<f64>,
    /// Percentile bootstrap 95% interval for the slope.
    pub ci: Option<(f64, f64)>,
    pub replicas: usize,
    pub warnings: Vec<String>,
}

/// Monte Carlo estimate of M(h) for each h, with the slope fit.
pub fn skorohod_modulus(
    config: &SkorohodConfig,
    r: f64,
    h_values: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<SkorohodReport> {
    if r >= -0.5 {
        return Err(Error::precondition(format!("the modulus needs r < -1/2 so that jumps have finite size, got r = {r}")));
    }
    config.levy.validate()?;
    config.sigma.validate()?;
    let region = SimRegion::interval(config.horizon)?;
    config.u0.validate_for(&region)?;
    if !config.sigma.bound().is_finite() {
        return Err(Error::precondition("the modulus study needs a bounded sigma"));
    }
    if replicas < 2 || h_values.len() < 2 {
        return Err(Error::precondition("need at least two replicas and two step sizes"));
    }
    let tc = config.t_center;
    if h_values.iter().any(|&h| !(h > 0.0 && tc - h >= 0.0 && tc + h <= config.horizon)) {
        return Err(Error::precondition("every t_center ± h must lie in [0, horizon]"));
    }
    let mut times: Vec<f64> = vec![tc];
    for &h in h_values {
        times.push(tc - h);
        times.push(tc + h);
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let pos = |t: f64| times.iter().position(|&s| s == t).unwrap();
    let idx: Vec<(usize, usize, usize)> = h_values.iter().map(|&h| (pos(tc - h), pos(tc), pos(tc + h))).collect();
    let constant = config.sigma.constant_value();
    let engine = KernelEngine::auto();

    let per_replica: Vec<Vec<f64>> = crate::par::try_map_indexed(replicas, |k| -> Result<Vec<f64>> {
        let pm = sample_prm(
            &config.levy,
            region,
            config.small_cutoff,
            config.large_cutoff,
            derive_seed(seed, k as u64, StreamTag::Skorohod),
        )?;
        let weights = jump_weights(&pm, &config.u0, &config.sigma, engine)?;
        let beta = constant.map_or(0.0, |c| c * pm.drift());
        let frames = sine_frames(&pm.jumps, &weights, &config.u0, beta, &times, config.n_max)?;
        idx.iter()
            .map(|&(a, b, c)| {
                let fwd = frames[c].sub(&frames[b])?.hr_norm_sq(r);
                let back = frames[a].sub(&frames[b])?.hr_norm_sq(r);
                Ok(fwd * back)
            })
            .collect()
    })?;

    let modulus: Vec<f64> = (0..h_values.len())
        .map(|i| mean(&per_replica.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect();
    let mut warnings = Vec::new();
    if replicas < 100 {
        warnings.push(format!("only {replicas} replicas; the bootstrap interval is unreliable below 100"));
    }
    let log_h: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
    let fit_of = |m: &[f64]| -> Option<crate::stats::LinearFit> {
        if m.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Some(ols(&log_h, &m.iter().map(|v| v.ln()).collect::<Vec<_>>()))
        } else {
            None
        }
    };
    let fit = fit_of(&modulus);
    if fit.is_none() {
        warnings.push("modulus vanishes for some h; no slope".into());
    }
    let ci = fit.as_ref().map(|_| {
        let mut rng = replica_stream(seed, 0, StreamTag::Bootstrap);
        bootstrap_ci(&mut rng, replicas, config.bootstrap_resamples, 0.95, |rows| {
            let m: Vec<f64> = (0..h_values.len())
                .map(|i| rows.iter().map(|&k| per_replica[k][i]).sum::<f64>() / rows.len() as f64)
                .collect();
            fit_of(&m).map_or(f64::NAN, |f| f.slope)
        })
    });
    Ok(SkorohodReport {
        r,
        t_center: tc,
        h: h_values.to_vec(),
        modulus,
        slope: fit.as_ref().map(|f| f.slope),
        slope_se: fit.as_ref().map(|f| f.slope_se),
        r_squared: fit.as_ref().map(|f| f.r_squared),
        ci,
        replicas,
        warnings,
    })
}
