//! Experiment configurations, dispatch and reports.
//!
//! A run is a pure function of the resolved configuration: every artifact is built
//! in memory first and depends only on (config, master_seed), never on the thread
//! count. Writing files is left to the caller.

mod canonical;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernels::{EngineName, KernelEngine};
use crate::levy::{check_hypothesis_h, find_admissible_pq, HypothesisReport, LevyMeasureSpec};
use crate::noise::{sample_prm, LargeCutoff, PointMeasure, SimRegion};
use crate::regularity::{
    default_cutoffs, gnuplot_script, necessary_condition_integral, spatial_refinement_study, stationarity_test,
    temporal_refinement_study, SpatialParams, StationarityParams, StudyConfig, TemporalParams,
};
use crate::rng::{derive_seed, StreamTag};
use crate::sobolev::{skorohod_modulus, trajectory_from_field, SkorohodConfig, SobolevTrajectory};
use crate::solver::{solve_picard, EvalGrid, InitialCondition, PicardOptions, SigmaSpec};
use crate::util::fmt_f64;

pub use canonical::{canonical_json, config_hash, fmt_g17};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Solve,
    Trajectory,
    Skorohod,
    SpatialStudy,
    TemporalStudy,
    NecIntegral,
    Stationarity,
    HypothesisCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseOptions {
    /// ε; required for infinite-activity measures.
    pub small_cutoff: Option<f64>,
    /// Defaults to |z| ≤ 1 for the refinement studies and to none otherwise.
    pub large_cutoff: Option<LargeCutoff>,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        NoiseOptions { small_cutoff: None, large_cutoff: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    /// Number of time steps; times are jT/nt.
    pub nt: usize,
    /// Intervals per axis (M on [0, π], nodes − 1 on boxes).
    pub m: usize,
    /// Also emit the little-endian binary field.
    pub binary: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { nt: EvalGrid::DEFAULT_TIMES - 1, m: 0, binary: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineOptions {
    pub name: EngineName,
    pub modes: usize,
    pub terms: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { name: EngineName::Auto, modes: KernelEngine::DEFAULT_MODES, terms: KernelEngine::DEFAULT_TERMS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkorohodOptions {
    pub r: f64,
    pub h_values: Vec<f64>,
    pub t_center: f64,
    pub bootstrap_resamples: usize,
}

impl Default for SkorohodOptions {
    fn default() -> Self {
        SkorohodOptions {
            r: -1.0,
            h_values: (4..=9).map(|k| 2f64.powi(-k)).collect(),
            t_center: 0.5,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NecIntegralOptions {
    pub alpha: Option<f64>,
    pub d: Option<usize>,
    pub x0: Option<Vec<f64>>,
    pub delta: f64,
    pub t: f64,
    pub inner_cutoffs: Vec<f64>,
}

impl Default for NecIntegralOptions {
    fn default() -> Self {
        NecIntegralOptions { alpha: None, d: None, x0: None, delta: 1.0, t: 1.0, inner_cutoffs: default_cutoffs() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypothesisOptions {
    pub d: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

/// One experiment. Unknown fields are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub levy: Option<LevyMeasureSpec>,
    #[serde(default)]
    pub region: Option<SimRegion>,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub u0: InitialCondition,
    #[serde(default)]
    pub noise: NoiseOptions,
    #[serde(default)]
    pub grid: GridOptions,
    #[serde(default)]
    pub engine: EngineOptions,
    #[serde(default)]
    pub picard: PicardOptions,
    #[serde(default)]
    pub r_values: Option<Vec<f64>>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Refinement levels of the studies (overrides the per-study value).
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    /// Not part of the hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub spatial: SpatialParams,
    #[serde(default)]
    pub temporal: TemporalParams,
    #[serde(default)]
    pub skorohod: SkorohodOptions,
    #[serde(default)]
    pub nec_integral: NecIntegralOptions,
    #[serde(default)]
    pub stationarity: StationarityParams,
    #[serde(default)]
    pub hypothesis: HypothesisOptions,
}

fn default_n_max() -> usize {
    4096
}

/// Largest field a `solve` may allocate, in values.
const MAX_FIELD_VALUES: usize = 50_000_000;

/// Result of the dry-run check.
#[derive(Clone, Debug, Serialize)]
pub struct Validation {
    pub config_hash: String,
    pub resolved: ExperimentConfig,
    pub hypothesis: Option<HypothesisReport>,
    pub warnings: Vec<String>,
}

/// A named file produced by a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, s: String) -> Self {
        Artifact { name: name.into(), bytes: s.into_bytes() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub tool_version: &'static str,
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub wall_time: f64,
    pub warnings: Vec<String>,
    /// Study-specific fields.
    #[serde(flatten)]
    pub payload: Value,
}

pub struct RunOutput {
    pub report: ExperimentReport,
    /// Every artifact except `report.json`.
    pub artifacts: Vec<Artifact>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn levy(&self) -> Result<&LevyMeasureSpec> {
        self.levy.as_ref().ok_or_else(|| Error::config("missing field 'levy'"))
    }

    fn region(&self) -> Result<SimRegion> {
        let r = self.region.ok_or_else(|| Error::config("missing field 'region'"))?;
        r.validate()?;
        Ok(r)
    }

    fn replicas_or(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }

    fn default_r_values(d: usize) -> Vec<f64> {
        if d == 1 {
            vec![-0.6, -1.0, -2.0]
        } else {
            let h = 0.5 * d as f64;
            vec![-h - 0.1, -h - 1.0]
        }
    }

    /// Fill defaults that depend on the experiment, without sampling anything.
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = self.clone();
        use ExperimentKind::*;
        let needs_noise = !matches!(c.experiment, NecIntegral | HypothesisCheck);
        if needs_noise {
            let levy = c.levy()?.clone();
            levy.validate()?;
            let region = c.region()?;
            c.sigma.validate()?;
            c.u0.validate_for(&region)?;
            if c.noise.small_cutoff.is_none() {
                if levy.is_finite_activity() {
                    c.noise.small_cutoff = Some(0.0);
                } else if matches!(c.experiment, Solve | Trajectory | Skorohod) {
                    return Err(Error::config("infinite activity requires cutoff: set noise.small_cutoff > 0"));
                }
            }
            if c.noise.large_cutoff.is_none() {
                c.noise.large_cutoff = Some(match c.experiment {
                    SpatialStudy | TemporalStudy | Stationarity => LargeCutoff::Fixed { n: 1.0 },
                    _ => LargeCutoff::None,
                });
            }
            if c.grid.m == 0 {
                c.grid.m = if region.is_interval() { 256 } else { 128 };
            }
            if c.r_values.is_none() {
                c.r_values = Some(Self::default_r_values(region.dim()));
            }
        }
        match c.experiment {
            Skorohod => c.replicas = Some(c.replicas_or(500)),
            SpatialStudy | TemporalStudy => c.replicas = Some(c.replicas_or(200)),
            Stationarity => c.replicas = Some(c.replicas_or(2000)),
            _ => {}
        }
        if let Some(l) = c.levels {
            c.spatial.levels = l;
            c.temporal.levels = l;
        }
        Ok(c)
    }

    /// Schema, defaults and hypothesis pre-flight. Never samples randomness.
    pub fn validate(&self) -> Result<Validation> {
        use ExperimentKind::*;
        let resolved = self.resolve()?;
        let mut warnings = Vec::new();
        let mut hypothesis = None;
        match resolved.experiment {
            HypothesisCheck => {
                hypothesis = Some(resolved.hypothesis_report()?);
            }
            NecIntegral => {
                resolved.nec_params()?;
            }
            _ => {
                let region = resolved.region()?;
                let levy = resolved.levy()?;
                if !region.is_interval() {
                    let report = if resolved.hypothesis.p.is_some() {
                        Some(resolved.hypothesis_report()?)
                    } else {
                        find_admissible_pq(levy, region.dim())?
                    };
                    match report {
                        Some(r) if r.satisfied => hypothesis = Some(r),
                        Some(r) => {
                            return Err(Error::config(format!(
                                "pre-flight: integrability hypothesis H on R^d fails: {}",
                                r.reasons.join("; ")
                            )))
                        }
                        None => {
                            return Err(Error::config(
                                "pre-flight: no exponents (p, q) satisfy the integrability hypothesis H on R^d",
                            ))
                        }
                    }
                }
                if matches!(resolved.experiment, Solve | Trajectory) {
                    let sites = if region.is_interval() {
                        resolved.grid.m + 1
                    } else {
                        (resolved.grid.m + 1).pow(region.dim() as u32)
                    };
                    if sites * (resolved.grid.nt + 1) > MAX_FIELD_VALUES {
                        return Err(Error::config(format!(
                            "grid of {} x {sites} values exceeds {MAX_FIELD_VALUES}; lower grid.nt or grid.m",
                            resolved.grid.nt + 1
                        )));
                    }
                    if resolved.grid.nt == 0 || resolved.grid.m < 2 {
                        return Err(Error::config("grid needs nt >= 1 and m >= 2"));
                    }
                    if !region.is_interval() && resolved.engine.name != EngineName::Auto && resolved.engine.name != EngineName::Gaussian {
                        return Err(Error::config("spectral/image engines are interval-only; use gaussian or auto on boxes"));
                    }
                    if region.is_interval() && resolved.engine.name == EngineName::Gaussian {
                        return Err(Error::config("the gaussian engine is the free-space kernel; use spectral, image or auto on the interval"));
                    }
                }
                if resolved.experiment == Trajectory && resolved.n_max == 0 {
                    return Err(Error::config("n_max must be positive"));
                }
                if resolved.sigma.constant_value().is_none()
                    && matches!(resolved.experiment, SpatialStudy | TemporalStudy)
                {
                    warnings.push("non-constant sigma: the dichotomy study is exploratory".into());
                }
                if resolved.replicas.is_some_and(|r| r < 100) && resolved.experiment == Skorohod {
                    warnings.push("fewer than 100 replicas: the slope interval is unreliable".into());
                }
            }
        }
        Ok(Validation { config_hash: resolved.hash()?, resolved, hypothesis, warnings })
    }

    /// Digest of the canonical resolved configuration, without `output_dir`.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = None;
        config_hash(&c)
    }

    fn hypothesis_report(&self) -> Result<HypothesisReport> {
        let levy = self.levy()?;
        let d = match (self.hypothesis.d, self.region) {
            (Some(d), _) => d,
            (None, Some(r)) => r.dim(),
            (None, None) => return Err(Error::config("hypothesis check needs hypothesis.d or a region")),
        };
        match (self.hypothesis.p, self.hypothesis.q) {
            (Some(p), Some(q)) => check_hypothesis_h(levy, d, p, q),
            (Some(p), None) => check_hypothesis_h(levy, d, p, p),
            (None, _) => Ok(find_admissible_pq(levy, d)?.unwrap_or(check_hypothesis_h(levy, d, 1.0, 1.0)?)),
        }
    }

    fn nec_params(&self) -> Result<(f64, usize, Vec<f64>)> {
        let n = &self.nec_integral;
        let alpha = match (n.alpha, &self.levy) {
            (Some(a), _) => a,
            (None, Some(l)) => l.alpha().ok_or_else(|| Error::config("nec_integral needs alpha"))?,
            (None, None) => return Err(Error::config("nec_integral needs alpha")),
        };
        let d = n.d.or(self.region.map(|r| r.dim())).ok_or_else(|| Error::config("nec_integral needs d"))?;
        let x0 = n.x0.clone().unwrap_or_else(|| vec![0.0; d]);
        Ok((alpha, d, x0))
    }

    fn engine(&self) -> KernelEngine {
        KernelEngine::from_name(self.engine.name, self.engine.modes, self.engine.terms)
    }

    fn sample_noise(&self) -> Result<PointMeasure> {
        sample_prm(
            self.levy()?,
            self.region()?,
            self.noise.small_cutoff.unwrap_or(0.0),
            self.noise.large_cutoff.unwrap_or(LargeCutoff::None),
            derive_seed(self.master_seed, 0, StreamTag::Noise),
        )
    }

    fn study_config(&self) -> Result<StudyConfig> {
        Ok(StudyConfig {
            levy: self.levy()?.clone(),
            region: self.region()?,
            sigma: self.sigma,
            u0: self.u0.clone(),
            large_cutoff: self.noise.large_cutoff.unwrap_or(LargeCutoff::Fixed { n: 1.0 }),
        })
    }
}

/// Validate, then run the experiment. Artifacts are identical for identical
/// resolved configurations regardless of the rayon pool size.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let Validation { config_hash, resolved: c, mut warnings, hypothesis } = config.validate()?;
    let mut artifacts = Vec::new();
    let seed = c.master_seed;
    let mut payload = match c.experiment {
        ExperimentKind::HypothesisCheck => serde_json::to_value(hypothesis.expect("hypothesis report"))?,
        ExperimentKind::Solve | ExperimentKind::Trajectory => {
            let pm = c.sample_noise()?;
            let region = c.region()?;
            let grid = EvalGrid::with_sizes(&region, c.grid.nt, c.grid.m);
            let fg = solve_picard(&pm, &c.u0, c.sigma, c.engine(), &grid, c.picard)?;
            artifacts.push(Artifact::text("jumps.csv", pm.to_csv()));
            artifacts.push(Artifact::text("jumps.json", serde_json::to_string_pretty(&pm.sidecar())?));
            if c.experiment == ExperimentKind::Solve {
                artifacts.push(Artifact::text("field.csv", fg.to_csv()));
                artifacts.push(Artifact::text("field.json", serde_json::to_string_pretty(&fg.metadata(&config_hash))?));
                if c.grid.binary {
                    artifacts.push(Artifact { name: "field.bin".into(), bytes: fg.to_binary() });
                }
                json!({
                    "jumps": pm.len(),
                    "sup_abs": fg.sup_abs(),
                    "picard_iters": fg.generation.picard_iters,
                    "picard_residual": fg.generation.picard_residual,
                    "residual_history": fg.generation.residual_history,
                    "n_times": fg.times.len(),
                    "n_sites": fg.n_sites(),
                })
            } else {
                let rs = c.r_values.clone().unwrap_or_default();
                let trajs: Vec<SobolevTrajectory> =
                    rs.iter().map(|&r| trajectory_from_field(&fg, r, c.n_max)).collect::<Result<_>>()?;
                if trajs.iter().any(|t| t.divergent) {
                    warnings.push("some r >= -d/2: delta jumps are not in H_r and their sizes depend on the truncation".into());
                }
                if let Some(w) = trajs.first().and_then(|t| t.window) {
                    warnings.push(format!("box norms use a fixed Tukey({w}) window in place of the localizing test function"));
                }
                let refs: Vec<&SobolevTrajectory> = trajs.iter().collect();
                artifacts.push(Artifact::text("trajectory.csv", SobolevTrajectory::to_csv(&refs)?));
                let ann: Vec<Value> = trajs
                    .iter()
                    .map(|t| json!({"r": t.r, "divergent": t.divergent, "jumps": t.jump_annotations}))
                    .collect();
                artifacts.push(Artifact::text("jump_annotations.json", serde_json::to_string_pretty(&ann)?));
                artifacts.push(Artifact::text(
                    "trajectory.gp",
                    format!(
                        "set datafile separator ','\nset xlabel 't'\nset ylabel 'H_r norm'\nset key autotitle columnhead\nplot for [i=2:{}] 'trajectory.csv' using 1:i with lines\n",
                        rs.len() + 1
                    ),
                ));
                json!({
                    "jumps": pm.len(),
                    "trajectories": trajs.iter().map(|t| json!({
                        "r": t.r,
                        "basis": t.basis,
                        "n_max": t.n_max,
                        "divergent": t.divergent,
                        "delta_tail_bound": if t.delta_tail_bound.is_finite() { json!(t.delta_tail_bound) } else { json!(null) },
                        "max_norm": t.norms.iter().cloned().fold(0.0, f64::max),
                    })).collect::<Vec<_>>(),
                })
            }
        }
        ExperimentKind::Skorohod => {
            let region = c.region()?;
            if !region.is_interval() {
                return Err(Error::config("the modulus study runs on the interval"));
            }
            let s = &c.skorohod;
            let cfg = SkorohodConfig {
                levy: c.levy()?.clone(),
                horizon: region.horizon,
                t_center: s.t_center,
                small_cutoff: c.noise.small_cutoff.unwrap_or(0.0),
                large_cutoff: c.noise.large_cutoff.unwrap_or(LargeCutoff::None),
                sigma: c.sigma,
                u0: c.u0.clone(),
                n_max: c.n_max,
                bootstrap_resamples: s.bootstrap_resamples,
            };
            let rep = skorohod_modulus(&cfg, s.r, &s.h_values, c.replicas.unwrap_or(500), seed)?;
            let mut csv = String::from("h,modulus\n");
            for (h, m) in rep.h.iter().zip(&rep.modulus) {
                csv.push_str(&format!("{},{}\n", fmt_f64(*h), fmt_f64(*m)));
            }
            artifacts.push(Artifact::text("skorohod.csv", csv));
            artifacts.push(Artifact::text(
                "skorohod.gp",
                "set datafile separator ','\nset logscale xy\nset xlabel 'h'\nset ylabel 'M(h)'\nplot 'skorohod.csv' skip 1 using 1:2 with linespoints title 'modulus'\n".into(),
            ));
            warnings.extend(rep.warnings.iter().cloned());
            serde_json::to_value(&rep)?
        }
        ExperimentKind::SpatialStudy | ExperimentKind::TemporalStudy => {
            let study = c.study_config()?;
            let replicas = c.replicas.unwrap_or(200);
            let v = if c.experiment == ExperimentKind::SpatialStudy {
                spatial_refinement_study(&study, &c.spatial, replicas, seed)?
            } else {
                temporal_refinement_study(&study, &c.temporal, replicas, seed)?
            };
            artifacts.push(Artifact::text("refinement.csv", v.statistic.to_csv()));
            artifacts.push(Artifact::text("refinement.gp", gnuplot_script("refinement.csv", &format!("{} refinement", v.study))));
            if v.exploratory {
                warnings.push("exploratory: sigma is not constant".into());
            }
            serde_json::to_value(&v)?
        }
        ExperimentKind::NecIntegral => {
            let (alpha, d, x0) = c.nec_params()?;
            let n = &c.nec_integral;
            let rep = necessary_condition_integral(alpha, d, (&x0, n.delta), n.t, &n.inner_cutoffs)?;
            artifacts.push(Artifact::text("nec_integral.csv", rep.to_csv()));
            artifacts.push(Artifact::text(
                "nec_integral.gp",
                "set datafile separator ','\nset logscale x\nset xlabel 'eps'\nset ylabel 'I(eps)'\nplot 'nec_integral.csv' skip 1 using 1:2 with linespoints title 'I'\n".into(),
            ));
            serde_json::to_value(&rep)?
        }
        ExperimentKind::Stationarity => {
            let study = c.study_config()?;
            let rep = stationarity_test(&study, &c.stationarity, c.replicas.unwrap_or(2000), seed)?;
            let mut csv = String::from("point,shift,statistic,p_value,p_adjusted\n");
            let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
            for t in &rep.tests {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    join(&t.point),
                    join(&t.shift),
                    fmt_f64(t.statistic),
                    fmt_f64(t.p_value),
                    fmt_f64(t.p_adjusted)
                ));
            }
            artifacts.push(Artifact::text("stationarity.csv", csv));
            serde_json::to_value(&rep)?
        }
    };
    if let Value::Object(m) = &mut payload {
        // already merged into the report header
        for key in ["warnings", "config_hash", "tool_version", "experiment", "master_seed", "wall_time"] {
            m.remove(key);
        }
    }
    Ok(RunOutput {
        report: ExperimentReport {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION"),
            experiment: c.experiment,
            master_seed: seed,
            wall_time: start.elapsed().as_secs_f64(),
            warnings,
            payload,
        },
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_check_example() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment":"hypothesis_check","levy":{"kind":"stable","alpha":0.5},"hypothesis":{"d":1,"p":0.7,"q":0.4}}"#,
        )
        .unwrap();
        let out = run_experiment(&c).unwrap();
        let v = serde_json::to_value(&out.report).unwrap();
        assert_eq!(v["satisfied"], json!(true));
        assert!(v["eta_range"].is_array());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment":"solve","bogus":1}"#).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_and_formatting() {
        let a = ExperimentConfig::from_json(
            r#"{"experiment":"nec_integral","nec_integral":{"alpha":1.0,"d":2},"output_dir":"x"}"#,
        )
        .unwrap();
        let b = ExperimentConfig::from_json(r#"{ "nec_integral": {"d": 2, "alpha": 1}, "experiment": "nec_integral" }"#)
            .unwrap();
        assert_eq!(a.validate().unwrap().config_hash, b.validate().unwrap().config_hash);
    }

    #[test]
    fn zero_noise_solve_is_heat_decay() {
        let c = ExperimentConfig::from_json(
            r#"{"experiment":"solve","levy":{"kind":"compound_poisson","total_mass":1.0,"jump_law":{"law":"dirac","value":1.0}},
                "region":{"horizon":1.0,"domain":{"type":"interval"}},"sigma":{"kind":"constant","c":0.0},
                "u0":{"kind":"sine_mode","k":1,"amplitude":1.0},"grid":{"nt":16,"m":32}}"#,
        )
        .unwrap();
        let out = run_experiment(&c).unwrap();
        let csv = String::from_utf8(out.artifacts.iter().find(|a| a.name == "field.csv").unwrap().bytes.clone()).unwrap();
        for line in csv.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert!((v[2] - (-v[0]).exp() * v[1].sin()).abs() < 1e-10);
        }
    }
}
