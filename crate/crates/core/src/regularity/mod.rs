//! Empirical checks of the regularity dichotomy.
//!
//! Almost-sure (un)boundedness of sections is not observable on a computer. The
//! surrogate used here refines the section grid and the small-jump cutoff together
//! and watches the median supremum over replicas: it settles in the continuous
//! regime and keeps growing in the unbounded one.

mod necessary;
mod refinement;
mod stationarity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::LevyMeasureSpec;

pub use necessary::{ball_sup_integral, default_cutoffs, necessary_condition_integral, DivergenceReport, GrowthLaw, NecessaryConditionParams};
pub use refinement::{spatial_refinement_study, temporal_refinement_study, SpatialParams, StudyConfig, TemporalParams};
pub use stationarity::{stationarity_test, StationarityParams, StationarityReport, ShiftTest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Supercritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Bounded,
    Growing,
    Inconclusive,
}

/// γ_grow and γ_flat for consecutive ratios of the median supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub grow: f64,
    pub flat: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { grow: 1.5, flat: 1.2 }
    }
}

/// Per-level section statistics, medians over replicas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStatistic {
    /// Grid resolution per level (points per axis, or time steps).
    pub levels: Vec<usize>,
    /// Small-jump cutoff ε per level.
    pub cutoffs: Vec<f64>,
    pub max_abs: Vec<f64>,
    /// Bootstrap 95% interval of each median.
    pub max_abs_ci: Vec<(f64, f64)>,
    /// Median of the largest difference between adjacent grid nodes.
    pub osc: Vec<f64>,
    pub growth_ratios: Vec<f64>,
}

impl RefinementStatistic {
    /// CSV `level,resolution,eps,median_sup,ci_lo,ci_hi,median_osc,ratio`.
    pub fn to_csv(&self) -> String {
        use crate::util::fmt_f64 as f;
        let mut out = String::from("level,resolution,eps,median_sup,ci_lo,ci_hi,median_osc,ratio\n");
        for l in 0..self.levels.len() {
            let ratio = if l == 0 { String::new() } else { f(self.growth_ratios[l - 1]) };
            out.push_str(&format!(
                "{l},{},{},{},{},{},{},{ratio}\n",
                self.levels[l],
                f(self.cutoffs[l]),
                f(self.max_abs[l]),
                f(self.max_abs_ci[l].0),
                f(self.max_abs_ci[l].1),
                f(self.osc[l]),
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyVerdict {
    pub study: &'static str,
    pub regime: Regime,
    pub blumenthal_getoor: f64,
    /// The threshold compared with the index: 2/d (space) or 1 (time).
    pub critical_index: f64,
    pub statistic: RefinementStatistic,
    pub decision: Decision,
    pub thresholds: Thresholds,
    /// Set when σ is not constant: the unboundedness results assume σ ≡ 1.
    pub exploratory: bool,
    pub replicas: usize,
    pub seed: u64,
    pub notes: Vec<String>,
}

/// Growing if every ratio reaches γ_grow, Bounded if none exceeds γ_flat.
pub fn decide(ratios: &[f64], th: Thresholds) -> Decision {
    if ratios.len() < 2 {
        return Decision::Inconclusive;
    }
    if ratios.iter().all(|r| *r >= th.grow) {
        Decision::Growing
    } else if ratios.iter().all(|r| *r <= th.flat) {
        Decision::Bounded
    } else {
        Decision::Inconclusive
    }
}

/// Consecutive ratios, with 0/0 read as 1.
pub fn growth_ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2)
        .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 1.0 } else { w[1] / w[0] })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Space,
    Time,
}

/// Regime of ν for the spatial (threshold 2/d) or temporal (threshold 1) dichotomy.
///
/// The supercritical side needs ν(dz) = f(z)|z|^{−α−1}dz, i.e. a stable-like
/// family, with 2/d ≤ α < 1 + 2/d in space and 1 ≤ α < 1 + 2/d in time.
pub(crate) fn classify(spec: &LevyMeasureSpec, d: usize, dir: Direction) -> Result<(Regime, f64, f64)> {
    let bg = spec.blumenthal_getoor_index()?;
    let df = d as f64;
    let critical = match dir {
        Direction::Space => 2.0 / df,
        Direction::Time => 1.0,
    };
    if bg < critical {
        return Ok((Regime::Subcritical, bg, critical));
    }
    let Some(alpha) = spec.alpha() else {
        return Err(Error::config(format!(
            "index {bg} is at or above the critical value {critical} but the measure is not of the form f(z)|z|^(-alpha-1)dz"
        )));
    };
    if alpha < 1.0 + 2.0 / df && alpha < 2.0 {
        Ok((Regime::Supercritical, bg, critical))
    } else {
        Err(Error::config(format!(
            "alpha = {alpha} lies outside both regimes for d = {d} (need alpha < {critical} or {critical} <= alpha < {})",
            (1.0 + 2.0 / df).min(2.0)
        )))
    }
}

/// A gnuplot script drawing the median supremum against the resolution on log-log axes.
pub fn gnuplot_script(csv_name: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'resolution'\n\
         set ylabel 'median sup |u|'\n\
         set title '{title}'\n\
         set key left top\n\
         plot '{csv_name}' skip 1 using 2:4:5:6 with yerrorlines title 'median sup (95% CI)', \\\n\
         \x20    '' skip 1 using 2:7 with linespoints title 'median oscillation'\n"
    )
}
