//! Lévy space–time white noise on [0, T] × D.
//!
//! A realization is the finite set of jumps {(T_i, X_i, Z_i)} of the Poisson
//! random measure J restricted to |z| > ε, together with the drift that turns
//! the compensated small jumps ε < |z| ≤ 1 into uncompensated ones:
//! b_ε = −∫_{ε<|z|≤1} z ν(dz). Jumps with |z| ≤ ε are dropped.

mod io;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Integral, LevyMeasureSpec};
use crate::util::ser_f64_ext;

pub use sampling::{sample_prm, MarkSampler};

/// Spatial domain of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// The interval [0, π] with Dirichlet boundary.
    Interval,
    /// The box [−A, A]^d standing in for ℝ^d.
    Box { dim: usize, half_width: f64 },
}

/// Time horizon and spatial domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRegion {
    pub horizon: f64,
    pub domain: Domain,
}

pub const MAX_DIM: usize = 3;

impl SimRegion {
    pub fn interval(horizon: f64) -> Result<Self> {
        let r = SimRegion { horizon, domain: Domain::Interval };
        r.validate()?;
        Ok(r)
    }

    pub fn boxed(horizon: f64, dim: usize, half_width: f64) -> Result<Self> {
        let r = SimRegion { horizon, domain: Domain::Box { dim, half_width } };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if let Domain::Box { dim, half_width } = self.domain {
            if !(1..=MAX_DIM).contains(&dim) {
                return Err(Error::config(format!("box dimension must be 1..={MAX_DIM}, got {dim}")));
            }
            if !(half_width.is_finite() && half_width > 0.0) {
                return Err(Error::config("box half_width must be positive"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.domain {
            Domain::Interval => 1,
            Domain::Box { dim, .. } => dim,
        }
    }

    /// Lebesgue measure |D|.
    pub fn volume(&self) -> f64 {
        match self.domain {
            Domain::Interval => std::f64::consts::PI,
            Domain::Box { dim, half_width } => (2.0 * half_width).powi(dim as i32),
        }
    }

    /// Per-axis bounds of D.
    pub fn bounds(&self) -> (f64, f64) {
        match self.domain {
            Domain::Interval => (0.0, std::f64::consts::PI),
            Domain::Box { half_width, .. } => (-half_width, half_width),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bounds();
        x.len() == self.dim() && x.iter().all(|v| (lo..=hi).contains(v))
    }

    pub fn is_interval(&self) -> bool {
        matches!(self.domain, Domain::Interval)
    }
}

/// One atom of J: time, position (first `dim` coordinates used) and mark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub t: f64,
    pub x: [f64; MAX_DIM],
    pub z: f64,
}

impl Jump {
    pub fn new(t: f64, x: &[f64], z: f64) -> Self {
        let mut p = [0.0; MAX_DIM];
        p[..x.len()].copy_from_slice(x);
        Jump { t, x: p, z }
    }

    pub fn pos(&self, dim: usize) -> &[f64] {
        &self.x[..dim]
    }
}

/// Truncation of large jumps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LargeCutoff {
    None,
    /// Drop jumps with |z| > N.
    Fixed { n: f64 },
    /// Drop jumps with |z| > N (1 + |x|^η).
    Weighted { n: f64, eta: f64 },
}

impl LargeCutoff {
    pub fn keeps(&self, j: &Jump, dim: usize) -> bool {
        match *self {
            LargeCutoff::None => true,
            LargeCutoff::Fixed { n } => j.z.abs() <= n,
            LargeCutoff::Weighted { n, eta } => j.z.abs() <= n * weight(j.pos(dim), eta),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LargeCutoff::None => Ok(()),
            LargeCutoff::Fixed { n } if n > 0.0 => Ok(()),
            LargeCutoff::Weighted { n, eta } if n > 0.0 && eta > 0.0 => Ok(()),
            _ => Err(Error::config("large cutoff needs N > 0 (and eta > 0 when weighted)")),
        }
    }
}

/// h(x) = 1 + |x|^η.
pub fn weight(x: &[f64], eta: f64) -> f64 {
    let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1.0 + r.powf(eta)
}

/// A finite realization of the noise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMeasure {
    pub jumps: Vec<Jump>,
    pub region: SimRegion,
    /// ε: only jumps with |z| > ε are present.
    pub small_cutoff: f64,
    pub large_cutoff: LargeCutoff,
    /// Drift b of the noise.
    pub b: f64,
    /// Compensator of the retained small jumps, −∫_{ε<|z|≤1} z ν(dz).
    pub b_eps: f64,
    pub seed: u64,
}

impl PointMeasure {
    /// Build from explicit jumps; sorts them by time and validates positions.
    pub fn from_jumps(region: SimRegion, mut jumps: Vec<Jump>) -> Result<Self> {
        region.validate()?;
        let dim = region.dim();
        for j in &jumps {
            if !(j.t >= 0.0 && j.t <= region.horizon) || !region.contains(j.pos(dim)) || !j.z.is_finite() {
                return Err(Error::config(format!("jump {j:?} outside the simulation region")));
            }
        }
        jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
        separate_ties(&mut jumps);
        Ok(PointMeasure {
            jumps,
            region,
            small_cutoff: 0.0,
            large_cutoff: LargeCutoff::None,
            b: 0.0,
            b_eps: 0.0,
            seed: 0,
        })
    }

    /// A realization without jumps and without drift.
    pub fn empty(region: SimRegion) -> Self {
        PointMeasure {
            jumps: Vec::new(),
            region,
            small_cutoff: 0.0,
            large_cutoff: LargeCutoff::None,
            b: 0.0,
            b_eps: 0.0,
            seed: 0,
        }
    }

    pub fn with_drift(mut self, b: f64, b_eps: f64) -> Self {
        self.b = b;
        self.b_eps = b_eps;
        self
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Total drift density b + b_ε acting on dt dx.
    pub fn drift(&self) -> f64 {
        self.b + self.b_eps
    }

    /// Keep only jumps with |z| > `eps`, updating the compensator drift.
    ///
    /// Applied to a sample at cutoff ε₂ < ε, this yields a sample of the ε-noise.
    pub fn restrict_small(&self, spec: &LevyMeasureSpec, eps: f64) -> Result<Self> {
        if eps < self.small_cutoff {
            return Err(Error::precondition("restrict_small can only raise the cutoff"));
        }
        let mut out = self.clone();
        out.jumps.retain(|j| j.z.abs() > eps);
        out.small_cutoff = eps;
        out.b_eps = compensator_drift(spec, eps)?;
        Ok(out)
    }

    /// Remove every jump with |z| > N and return the truncated-noise drift
    /// b_N = b + ∫_{1<|z|≤N} z ν(dz).
    ///
    /// The returned measure keeps `b` unchanged: its large jumps are uncompensated,
    /// so dropping them needs no drift correction in this representation.
    pub fn truncate(&self, spec: &LevyMeasureSpec, n: f64) -> Result<(Self, f64)> {
        truncate_noise(self, spec, n)
    }
}

fn separate_ties(jumps: &mut [Jump]) {
    for i in 1..jumps.len() {
        if jumps[i].t <= jumps[i - 1].t {
            jumps[i].t = jumps[i - 1].t.next_up();
        }
    }
}

/// b_ε = −∫_{ε<|z|≤1} z ν(dz), zero when ε ≥ 1.
pub fn compensator_drift(spec: &LevyMeasureSpec, eps: f64) -> Result<f64> {
    if eps >= 1.0 {
        return Ok(0.0);
    }
    match spec.signed_first_moment(eps, 1.0)? {
        Integral::Finite(m) => Ok(-m),
        Integral::Divergent => Err(Error::precondition(
            "infinite activity requires cutoff: first moment over (eps, 1] diverges at eps = 0",
        )),
    }
}

/// First time a jump exceeds the truncation, with the index of that jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoppingTimeResult {
    #[serde(serialize_with = "ser_f64_ext")]
    pub tau: f64,
    pub triggering_jump: Option<usize>,
}

impl StoppingTimeResult {
    fn first(pm: &PointMeasure, mut violates: impl FnMut(&Jump) -> bool) -> Self {
        match pm.jumps.iter().position(|j| violates(j)) {
            Some(i) => StoppingTimeResult { tau: pm.jumps[i].t, triggering_jump: Some(i) },
            None => StoppingTimeResult { tau: f64::INFINITY, triggering_jump: None },
        }
    }
}

/// τ_N = inf{t : J([0,t] × D × [−N,N]^c) ≠ 0}.
pub fn tau_fixed(pm: &PointMeasure, n: f64) -> StoppingTimeResult {
    StoppingTimeResult::first(pm, |j| j.z.abs() > n)
}

/// τ_N = inf{t : some jump has |z| > N(1 + |x|^η)}.
pub fn tau_weighted(pm: &PointMeasure, n: f64, eta: f64) -> Result<StoppingTimeResult> {
    if !(eta > 0.0) {
        return Err(Error::precondition("tau_weighted needs eta > 0"));
    }
    let dim = pm.dim();
    Ok(StoppingTimeResult::first(pm, |j| j.z.abs() > n * weight(j.pos(dim), eta)))
}

/// Drop jumps with |z| > N; returns the truncated measure and b_N = b + ∫_{1<|z|≤N} z ν(dz).
pub fn truncate_noise(pm: &PointMeasure, spec: &LevyMeasureSpec, n: f64) -> Result<(PointMeasure, f64)> {
    if !(n >= 1.0) {
        return Err(Error::precondition(format!("truncation level must be >= 1, got {n}")));
    }
    let mut out = pm.clone();
    out.jumps.retain(|j| j.z.abs() <= n);
    out.large_cutoff = LargeCutoff::Fixed { n };
    let m = if n > 1.0 {
        spec.signed_first_moment(1.0, n)?.value()
    } else {
        0.0
    };
    Ok((out, pm.b + m))
}
