use serde::{Deserialize, Serialize};

use super::{classify, decide, growth_ratios, DichotomyVerdict, Direction, Regime, RefinementStatistic, Thresholds};
use crate::error::{Error, Result};
use crate::kernels::{gauss, KernelEngine};
use crate::levy::LevyMeasureSpec;
use crate::noise::{sample_prm, LargeCutoff, PointMeasure, SimRegion};
use crate::rng::{derive_seed, replica_stream, StreamTag};
use crate::solver::{field_from_weights, jump_weights, EvalGrid, Homogeneous, InitialCondition, Lattice, SigmaSpec};
use crate::stats::{bootstrap_ci, median};

/// Noise, coefficient and region shared by the refinement studies.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub levy: LevyMeasureSpec,
    pub region: SimRegion,
    #[serde(default)]
    pub sigma: SigmaSpec,
    #[serde(default)]
    pub u0: InitialCondition,
    /// Large jumps are finitely many and act away from the section; they are
    /// dropped so the statistic reflects small-jump activity.
    #[serde(default = "unit_cutoff")]
    pub large_cutoff: LargeCutoff,
}

fn unit_cutoff() -> LargeCutoff {
    LargeCutoff::Fixed { n: 1.0 }
}

impl StudyConfig {
    pub fn new(levy: LevyMeasureSpec, region: SimRegion) -> Self {
        StudyConfig {
            levy,
            region,
            sigma: SigmaSpec::default(),
            u0: InitialCondition::Zero,
            large_cutoff: unit_cutoff(),
        }
    }
}

/// Spatial study: x-sections at a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    /// Section time; defaults to the horizon.
    pub t_fix: Option<f64>,
    /// Half-width of the centered patch carrying the section (boxes); defaults to A/2.
    pub patch_half_width: Option<f64>,
    /// Points per axis at level 0 (intervals: M + 1 with M doubling).
    pub base_points: usize,
    pub eps0: f64,
    /// ε shrinks by this factor per level.
    pub eps_factor: f64,
    pub levels: usize,
    pub thresholds: Thresholds,
}

impl Default for SpatialParams {
    fn default() -> Self {
        SpatialParams {
            t_fix: None,
            patch_half_width: None,
            base_points: 9,
            eps0: 0.05,
            eps_factor: 4.0,
            levels: 3,
            thresholds: Thresholds::default(),
        }
    }
}

/// Temporal study: t-sections at a fixed point over a time window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalParams {
    /// Section point; defaults to the box center or π/2.
    pub x_fix: Option<Vec<f64>>,
    /// Window [t_lo, t_hi]; defaults to [T/2, T].
    pub window: Option<(f64, f64)>,
    /// Time steps across the window at level 0, doubling per level.
    pub base_steps: usize,
    pub eps0: f64,
    pub eps_factor: f64,
    pub levels: usize,
    pub thresholds: Thresholds,
}

impl Default for TemporalParams {
    fn default() -> Self {
        TemporalParams {
            x_fix: None,
            window: None,
            base_steps: 64,
            eps0: 0.1,
            eps_factor: 4.0,
            levels: 3,
            thresholds: Thresholds::default(),
        }
    }
}

const BOOTSTRAP_RESAMPLES: usize = 500;
// contributions below e^{−40} of a jump's own peak are dropped at peak nodes
const EXP_CUTOFF: f64 = 40.0;

struct Prepared<'a> {
    config: &'a StudyConfig,
    hom: Homogeneous,
    constant: Option<f64>,
    engine: KernelEngine,
    sample_region: SimRegion,
    cutoffs: Vec<f64>,
}

fn prepare<'a>(
    config: &'a StudyConfig,
    horizon: f64,
    eps0: f64,
    factor: f64,
    levels: usize,
) -> Result<Prepared<'a>> {
    config.levy.validate()?;
    config.region.validate()?;
    config.sigma.validate()?;
    config.u0.validate_for(&config.region)?;
    if levels < 3 {
        return Err(Error::config("refinement studies need at least three levels"));
    }
    if !(eps0 > 0.0 && factor > 1.0) {
        return Err(Error::config("need eps0 > 0 and eps_factor > 1"));
    }
    let cutoffs: Vec<f64> = (0..levels).map(|l| eps0 / factor.powi(l as i32)).collect();
    let constant = config.sigma.constant_value();
    if constant.is_none() && !config.levy.is_symmetric() {
        return Err(Error::config(
            "non-constant sigma is supported here only for symmetric noise (no compensator drift)",
        ));
    }
    let engine = if config.region.is_interval() { KernelEngine::auto() } else { KernelEngine::Gaussian };
    Ok(Prepared {
        config,
        hom: Homogeneous::new(&config.u0, &config.region)?,
        constant,
        engine,
        sample_region: SimRegion { horizon, domain: config.region.domain },
        cutoffs,
    })
}

impl Prepared<'_> {
    /// Coupled noises for all levels of one replica: a single sample at the finest
    /// cutoff, thinned to each coarser ε.
    fn level_noises(&self, seed: u64, replica: usize, tag: StreamTag) -> Result<Vec<PointMeasure>> {
        let spec = &self.config.levy;
        let finest = *self.cutoffs.last().unwrap();
        let pm = sample_prm(
            spec,
            self.sample_region,
            finest,
            self.config.large_cutoff,
            derive_seed(seed, replica as u64, tag),
        )?;
        self.cutoffs
            .iter()
            .map(|&e| if e > finest { pm.restrict_small(spec, e) } else { Ok(pm.clone()) })
            .collect()
    }

    fn weights(&self, pm: &PointMeasure) -> Result<(Vec<f64>, f64)> {
        let w = jump_weights(pm, &self.config.u0, &self.config.sigma, self.engine)?;
        Ok((w, self.constant.map_or(0.0, |c| c * pm.drift())))
    }

    /// u(t, x) on a box by the direct jump sum.
    fn box_value(&self, pm: &PointMeasure, w: &[f64], drift: f64, t: f64, x: &[f64]) -> f64 {
        let d = x.len();
        let mut u = self.hom.value(t, x) + drift * t;
        for (j, wl) in pm.jumps.iter().zip(w).take_while(|(j, _)| j.t < t) {
            let s = t - j.t;
            let r2: f64 = x.iter().zip(j.pos(d)).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 <= 4.0 * s * EXP_CUTOFF {
                u += wl * gauss(s, r2, d);
            }
        }
        u
    }
}

struct LevelStat {
    sup: f64,
    osc: f64,
}

fn aggregate(
    per_replica: &[Vec<LevelStat>],
    resolutions: Vec<usize>,
    cutoffs: Vec<f64>,
    seed: u64,
) -> RefinementStatistic {
    let levels = resolutions.len();
    let mut max_abs = Vec::with_capacity(levels);
    let mut osc = Vec::with_capacity(levels);
    let mut max_abs_ci = Vec::with_capacity(levels);
    for l in 0..levels {
        let sups: Vec<f64> = per_replica.iter().map(|r| r[l].sup).collect();
        let oscs: Vec<f64> = per_replica.iter().map(|r| r[l].osc).collect();
        max_abs.push(median(&sups));
        osc.push(median(&oscs));
        let mut rng = replica_stream(seed, l as u64, StreamTag::Bootstrap);
        max_abs_ci.push(bootstrap_ci(&mut rng, sups.len(), BOOTSTRAP_RESAMPLES, 0.95, |rows| {
            median(&rows.iter().map(|&k| sups[k]).collect::<Vec<_>>())
        }));
    }
    let growth = growth_ratios(&max_abs);
    RefinementStatistic { levels: resolutions, cutoffs, max_abs, max_abs_ci, osc, growth_ratios: growth }
}

fn max_adjacent(lattice: &Lattice, v: &[f64]) -> f64 {
    let dims: Vec<usize> = lattice.axes.iter().map(|a| a.len()).collect();
    let mut best: f64 = 0.0;
    for a in 0..dims.len() {
        let stride: usize = dims[a + 1..].iter().product();
        for (k, x) in v.iter().enumerate() {
            if (k / stride) % dims[a] + 1 < dims[a] {
                best = best.max((v[k + stride] - x).abs());
            }
        }
    }
    best
}

fn finish(
    study: &'static str,
    config: &StudyConfig,
    regime: (Regime, f64, f64),
    statistic: RefinementStatistic,
    thresholds: Thresholds,
    replicas: usize,
    seed: u64,
    mut notes: Vec<String>,
) -> DichotomyVerdict {
    let exploratory = config.sigma.constant_value().is_none();
    if exploratory {
        notes.push("sigma is not constant: the unboundedness results assume sigma = 1, so this run is exploratory".into());
    }
    DichotomyVerdict {
        study,
        regime: regime.0,
        blumenthal_getoor: regime.1,
        critical_index: regime.2,
        decision: decide(&statistic.growth_ratios, thresholds),
        statistic,
        thresholds,
        exploratory,
        replicas,
        seed,
        notes,
    }
}

/// Refine x-sections u(t_fix, ·) together with the small-jump cutoff.
pub fn spatial_refinement_study(
    config: &StudyConfig,
    params: &SpatialParams,
    replicas: usize,
    seed: u64,
) -> Result<DichotomyVerdict> {
    let region = config.region;
    let d = region.dim();
    let regime = classify(&config.levy, d, Direction::Space)?;
    let t_fix = params.t_fix.unwrap_or(region.horizon);
    if !(t_fix > 0.0 && t_fix <= region.horizon) {
        return Err(Error::config("t_fix must lie in (0, T]"));
    }
    if params.base_points < 3 || replicas == 0 {
        return Err(Error::config("need base_points >= 3 and at least one replica"));
    }
    let prep = prepare(config, t_fix, params.eps0, params.eps_factor, params.levels)?;
    let (lo, hi) = region.bounds();
    let patch = params.patch_half_width.unwrap_or(0.5 * hi);
    if !region.is_interval() && !(patch > 0.0 && patch <= hi) {
        return Err(Error::config("patch_half_width must lie in (0, A]"));
    }
    let lattices: Vec<Lattice> = (0..params.levels)
        .map(|l| {
            let n = (params.base_points - 1) * (1 << l) + 1;
            if region.is_interval() {
                Lattice::interval(n - 1)
            } else {
                Lattice::uniform(d, -patch, patch, n)
            }
        })
        .collect();
    let per_replica = crate::par::try_map_indexed(replicas, |k| -> Result<Vec<LevelStat>> {
        let noises = prep.level_noises(seed, k, StreamTag::Spatial)?;
        noises
            .iter()
            .zip(&lattices)
            .map(|(pm, lattice)| {
                let (w, drift) = prep.weights(pm)?;
                let grid = EvalGrid::new(vec![t_fix], lattice.clone());
                let vals = field_from_weights(pm, &w, drift, &config.u0, prep.engine, &grid)?;
                let mut sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !region.is_interval() {
                    // the sections peak at the positions of recent jumps
                    for j in pm.jumps.iter().take_while(|j| j.t < t_fix) {
                        let x = j.pos(d);
                        if x.iter().all(|v| v.abs() <= patch) {
                            sup = sup.max(prep.box_value(pm, &w, drift, t_fix, x).abs());
                        }
                    }
                }
                Ok(LevelStat { sup, osc: max_adjacent(lattice, &vals) })
            })
            .collect()
    })?;
    let resolutions = lattices.iter().map(|l| l.axes[0].len()).collect();
    let stat = aggregate(&per_replica, resolutions, prep.cutoffs.clone(), seed);
    let mut notes = vec![format!(
        "section u({t_fix}, x) over {}; nodes are the lattice{}",
        if region.is_interval() { format!("[{lo}, {hi}]") } else { format!("[-{patch}, {patch}]^{d}") },
        if region.is_interval() { "" } else { " plus the positions of jumps inside the patch" }
    )];
    notes.push(format!("large cutoff: {:?}", config.large_cutoff));
    Ok(finish("spatial", config, regime, stat, params.thresholds, replicas, seed, notes))
}

/// Refine t-sections u(·, x_fix) over a window together with the small-jump cutoff.
pub fn temporal_refinement_study(
    config: &StudyConfig,
    params: &TemporalParams,
    replicas: usize,
    seed: u64,
) -> Result<DichotomyVerdict> {
    let region = config.region;
    let d = region.dim();
    let regime = classify(&config.levy, d, Direction::Time)?;
    let x_fix = params.x_fix.clone().unwrap_or_else(|| {
        if region.is_interval() {
            vec![std::f64::consts::FRAC_PI_2]
        } else {
            vec![0.0; d]
        }
    });
    if !region.contains(&x_fix) {
        return Err(Error::config("x_fix must lie in the domain"));
    }
    let (t_lo, t_hi) = params.window.unwrap_or((0.5 * region.horizon, region.horizon));
    if !(0.0 <= t_lo && t_lo < t_hi && t_hi <= region.horizon) {
        return Err(Error::config("window must satisfy 0 <= t_lo < t_hi <= T"));
    }
    if params.base_steps < 2 || replicas == 0 {
        return Err(Error::config("need base_steps >= 2 and at least one replica"));
    }
    let prep = prepare(config, t_hi, params.eps0, params.eps_factor, params.levels)?;
    let lattice = Lattice { axes: x_fix.iter().map(|v| vec![*v]).collect() };
    let steps: Vec<usize> = (0..params.levels).map(|l| params.base_steps << l).collect();
    let grids: Vec<EvalGrid> = steps
        .iter()
        .map(|&n| {
            let times = (0..=n).map(|j| t_lo + (t_hi - t_lo) * j as f64 / n as f64).collect();
            EvalGrid::new(times, lattice.clone())
        })
        .collect();
    let mut notes = Vec::new();
    if regime.0 == Regime::Subcritical {
        if let Some(b0) = config.levy.b0()? {
            if b0.abs() > 1e-12 {
                notes.push(format!("b0 = {b0} is not zero; continuity in time is only guaranteed for b0 = 0"));
            }
        }
    }
    let df = d as f64;
    let per_replica = crate::par::try_map_indexed(replicas, |k| -> Result<Vec<LevelStat>> {
        let noises = prep.level_noises(seed, k, StreamTag::Temporal)?;
        noises
            .iter()
            .zip(&grids)
            .map(|(pm, grid)| {
                let (w, drift) = prep.weights(pm)?;
                let vals = field_from_weights(pm, &w, drift, &config.u0, prep.engine, grid)?;
                let mut sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let osc = vals.windows(2).fold(0.0f64, |m, p| m.max((p[1] - p[0]).abs()));
                if !region.is_interval() {
                    // t ↦ g(t − T_i, x − X_i) peaks at t = T_i + |x − X_i|²/(2d)
                    for j in &pm.jumps {
                        let r2: f64 = x_fix.iter().zip(j.pos(d)).map(|(a, b)| (a - b) * (a - b)).sum();
                        let tp = j.t + r2 / (2.0 * df);
                        if r2 > 0.0 && (t_lo..=t_hi).contains(&tp) {
                            sup = sup.max(prep.box_value(pm, &w, drift, tp, &x_fix).abs());
                        }
                    }
                }
                Ok(LevelStat { sup, osc })
            })
            .collect()
    })?;
    let stat = aggregate(&per_replica, steps, prep.cutoffs.clone(), seed);
    notes.push(format!(
        "section u(t, {x_fix:?}) for t in [{t_lo}, {t_hi}]; nodes are the time grid{}",
        if region.is_interval() { "" } else { " plus the kernel peak times of every jump" }
    ));
    notes.push(format!("large cutoff: {:?}", config.large_cutoff));
    Ok(finish("temporal", config, regime, stat, params.thresholds, replicas, seed, notes))
}
