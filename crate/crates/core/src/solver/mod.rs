//! Mild solutions u = V + ∫∫ G(t−s; x, y) σ(u(s−, y)) L(ds, dy).
//!
//! With the noise represented by finitely many jumps plus a drift density
//! β = b + b_ε, the stochastic integral is the finite sum
//! Σ_{T_i<t} G(t−T_i; x, X_i) σ(u(T_i−, X_i)) Z_i plus β ∫₀^t ∫_D G σ(u) dy ds.

mod boxed;
mod homogeneous;
mod interval;
mod picard;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::KernelEngine;
use crate::noise::{PointMeasure, SimRegion};
use crate::util::fmt_f64;

pub use homogeneous::{homogeneous_part, Homogeneous};
pub use interval::interval_drift_profile;
pub use picard::{solve_picard, PicardOptions};

/// Name of a bounded Lipschitz nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedName {
    /// σ(u) = scale · tanh(u)
    Tanh,
    /// σ(u) = clamp(u, −scale, scale)
    Clamp,
}

/// The coefficient σ of the equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSpec {
    Constant { c: f64 },
    /// σ(u) = a·u + c
    Linear { a: f64, c: f64 },
    BoundedLipschitz { name: BoundedName, scale: f64 },
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Constant { c: 1.0 }
    }
}

impl SigmaSpec {
    pub fn tanh(scale: f64) -> Self {
        SigmaSpec::BoundedLipschitz { name: BoundedName::Tanh, scale }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            SigmaSpec::Constant { c } => c,
            SigmaSpec::Linear { a, c } => a * u + c,
            SigmaSpec::BoundedLipschitz { name: BoundedName::Tanh, scale } => scale * u.tanh(),
            SigmaSpec::BoundedLipschitz { name: BoundedName::Clamp, scale } => u.clamp(-scale, scale),
        }
    }

    pub fn lipschitz_constant(&self) -> f64 {
        match *self {
            SigmaSpec::Constant { .. } => 0.0,
            SigmaSpec::Linear { a, .. } => a.abs(),
            SigmaSpec::BoundedLipschitz { name: BoundedName::Tanh, scale } => scale.abs(),
            SigmaSpec::BoundedLipschitz { name: BoundedName::Clamp, .. } => 1.0,
        }
    }

    /// sup |σ|, infinite for non-constant linear σ.
    pub fn bound(&self) -> f64 {
        match *self {
            SigmaSpec::Constant { c } => c.abs(),
            SigmaSpec::Linear { a, c } => {
                if a == 0.0 {
                    c.abs()
                } else {
                    f64::INFINITY
                }
            }
            SigmaSpec::BoundedLipschitz { scale, .. } => scale.abs(),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match *self {
            SigmaSpec::Constant { c } => Some(c),
            SigmaSpec::Linear { a, c } if a == 0.0 => Some(c),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SigmaSpec::Constant { c } => c.is_finite(),
            SigmaSpec::Linear { a, c } => a.is_finite() && c.is_finite(),
            SigmaSpec::BoundedLipschitz { scale, .. } => scale.is_finite() && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid sigma {self:?}")))
        }
    }
}

/// A user-supplied initial condition on D.
#[derive(Clone)]
pub struct CustomInitial {
    pub name: String,
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

/// The initial condition u₀.
#[derive(Clone)]
pub enum InitialCondition {
    Zero,
    Constant { c: f64 },
    /// amplitude · sin(k x₁)
    SineMode { k: u32, amplitude: f64 },
    Custom(CustomInitial),
}

impl std::fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialCondition::Zero => write!(f, "Zero"),
            InitialCondition::Constant { c } => write!(f, "Constant({c})"),
            InitialCondition::SineMode { k, amplitude } => write!(f, "SineMode(k={k}, {amplitude})"),
            InitialCondition::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

impl PartialEq for InitialCondition {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (InitialCondition::Zero, InitialCondition::Zero) => true,
            (InitialCondition::Constant { c: a }, InitialCondition::Constant { c: b }) => a == b,
            (
                InitialCondition::SineMode { k: k1, amplitude: a1 },
                InitialCondition::SineMode { k: k2, amplitude: a2 },
            ) => k1 == k2 && a1 == a2,
            (InitialCondition::Custom(a), InitialCondition::Custom(b)) => Arc::ptr_eq(&a.f, &b.f),
            _ => false,
        }
    }
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Zero
    }
}

impl InitialCondition {
    pub fn custom(name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        InitialCondition::Custom(CustomInitial { name: name.to_string(), f: Arc::new(f) })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InitialCondition::Zero => 0.0,
            InitialCondition::Constant { c } => *c,
            InitialCondition::SineMode { k, amplitude } => amplitude * (*k as f64 * x[0]).sin(),
            InitialCondition::Custom(c) => (c.f)(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, InitialCondition::Zero | InitialCondition::Constant { .. })
    }

    /// Check boundedness of the parameters and, on the interval, the boundary values.
    pub fn validate_for(&self, region: &SimRegion) -> Result<()> {
        match self {
            InitialCondition::Zero => {}
            InitialCondition::Constant { c } => {
                if !c.is_finite() {
                    return Err(Error::config("u0 constant must be finite"));
                }
                if region.is_interval() && *c != 0.0 {
                    return Err(Error::config("u0 must vanish at 0 and pi on the interval; a nonzero constant does not"));
                }
            }
            InitialCondition::SineMode { k, amplitude } => {
                if *k == 0 || !amplitude.is_finite() {
                    return Err(Error::config("u0 sine mode needs k >= 1 and a finite amplitude"));
                }
            }
            InitialCondition::Custom(c) => {
                if region.is_interval() {
                    let (a, b) = ((c.f)(&[0.0]), (c.f)(&[PI]));
                    if a.abs() > 1e-12 || b.abs() > 1e-12 {
                        return Err(Error::config(format!(
                            "u0 '{}' must vanish at 0 and pi on the interval (got {a}, {b})",
                            c.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl Serialize for InitialCondition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match self {
            InitialCondition::Zero => RawInitial { kind: "zero".into(), c: None, k: None, amplitude: None, name: None },
            InitialCondition::Constant { c } => {
                RawInitial { kind: "constant".into(), c: Some(*c), k: None, amplitude: None, name: None }
            }
            InitialCondition::SineMode { k, amplitude } => RawInitial {
                kind: "sine_mode".into(),
                c: None,
                k: Some(*k),
                amplitude: Some(*amplitude),
                name: None,
            },
            InitialCondition::Custom(c) => {
                RawInitial { kind: "custom".into(), c: None, k: None, amplitude: None, name: Some(c.name.clone()) }
            }
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InitialCondition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInitial::deserialize(d)?;
        let only = |allowed: &[&str]| -> std::result::Result<(), D::Error> {
            let present = [("c", raw.c.is_some()), ("k", raw.k.is_some()), ("amplitude", raw.amplitude.is_some()), ("name", raw.name.is_some())];
            for (f, p) in present {
                if p && !allowed.contains(&f) {
                    return Err(de::Error::custom(format!("field '{f}' not allowed for u0 kind '{}'", raw.kind)));
                }
            }
            Ok(())
        };
        match raw.kind.as_str() {
            "zero" => {
                only(&[])?;
                Ok(InitialCondition::Zero)
            }
            "constant" => {
                only(&["c"])?;
                Ok(InitialCondition::Constant { c: raw.c.ok_or_else(|| de::Error::missing_field("c"))? })
            }
            "sine_mode" => {
                only(&["k", "amplitude"])?;
                Ok(InitialCondition::SineMode { k: raw.k.unwrap_or(1), amplitude: raw.amplitude.unwrap_or(1.0) })
            }
            "custom" => Err(de::Error::custom("custom initial conditions are code-only and cannot be loaded from JSON")),
            other => Err(de::Error::unknown_variant(other, &["zero", "constant", "sine_mode"])),
        }
    }
}

/// Tensor lattice of evaluation sites; the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub axes: Vec<Vec<f64>>,
}

impl Lattice {
    /// Sites kπ/M, k = 0..=M, on [0, π].
    pub fn interval(m: usize) -> Self {
        Lattice { axes: vec![(0..=m).map(|k| interval_site(k, m)).collect()] }
    }

    /// `n` equally spaced nodes per axis covering [lo, hi]^dim.
    pub fn uniform(dim: usize, lo: f64, hi: f64, n: usize) -> Self {
        let axis: Vec<f64> = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        };
        Lattice { axes: vec![axis; dim] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of flat site `k`.
    pub fn site(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for a in (0..self.dim()).rev() {
            let n = self.axes[a].len();
            out[a] = self.axes[a][k % n];
            k /= n;
        }
        out
    }

    pub fn sites(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.site(k)).collect()
    }

    /// Flat index of a site given exactly (up to 1e-12 relative), or `None`.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = 0;
        for (axis, &v) in self.axes.iter().zip(x) {
            let i = axis.iter().position(|&a| (a - v).abs() <= 1e-12 * a.abs().max(1.0))?;
            idx = idx * axis.len() + i;
        }
        Some(idx)
    }

    /// M when this is the standard interval lattice kπ/M.
    pub fn interval_intervals(&self) -> Option<usize> {
        if self.dim() != 1 || self.axes[0].len() < 3 {
            return None;
        }
        let m = self.axes[0].len() - 1;
        self.axes[0].iter().enumerate().all(|(k, &x)| x == interval_site(k, m)).then_some(m)
    }

    fn validate_in(&self, region: &SimRegion) -> Result<()> {
        if self.dim() != region.dim() || self.is_empty() {
            return Err(Error::config("lattice dimension does not match the region"));
        }
        let (lo, hi) = region.bounds();
        for axis in &self.axes {
            if axis.windows(2).any(|w| !(w[0] < w[1])) || axis.iter().any(|v| !(lo..=hi).contains(v)) {
                return Err(Error::config("lattice axes must be strictly increasing and inside the domain"));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn interval_site(k: usize, m: usize) -> f64 {
    if k == m {
        PI
    } else {
        PI * k as f64 / m as f64
    }
}

/// Evaluation grid: sorted times × lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub times: Vec<f64>,
    pub lattice: Lattice,
}

impl EvalGrid {
    pub const DEFAULT_INTERVAL_SITES: usize = 257;
    pub const DEFAULT_TIMES: usize = 513;
    pub const DEFAULT_BOX_SITES: usize = 129;

    /// `nt + 1` times jT/nt.
    pub fn uniform_times(horizon: f64, nt: usize) -> Vec<f64> {
        (0..=nt).map(|j| if j == nt { horizon } else { horizon * j as f64 / nt as f64 }).collect()
    }

    pub fn new(times: Vec<f64>, lattice: Lattice) -> Self {
        EvalGrid { times, lattice }
    }

    /// 257 sites × 513 times on the interval, 129^d sites × 513 times on a box.
    pub fn default_for(region: &SimRegion) -> Self {
        Self::with_sizes(region, Self::DEFAULT_TIMES - 1, if region.is_interval() { 256 } else { 128 })
    }

    /// `nt + 1` times and, per axis, `m` intervals (interval) or `m + 1` nodes (box).
    pub fn with_sizes(region: &SimRegion, nt: usize, m: usize) -> Self {
        let times = Self::uniform_times(region.horizon, nt);
        let lattice = if region.is_interval() {
            Lattice::interval(m)
        } else {
            let (lo, hi) = region.bounds();
            Lattice::uniform(region.dim(), lo, hi, m + 1)
        };
        EvalGrid { times, lattice }
    }

    pub fn validate_in(&self, region: &SimRegion) -> Result<()> {
        if self.times.is_empty()
            || self.times.windows(2).any(|w| !(w[0] < w[1]))
            || self.times[0] < 0.0
            || *self.times.last().unwrap() > region.horizon
        {
            return Err(Error::config("grid times must be strictly increasing within [0, T]"));
        }
        self.lattice.validate_in(region)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveKind {
    Additive,
    Multiplicative,
}

/// How a field was produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generation {
    pub kind: SolveKind,
    pub sigma: SigmaSpec,
    pub u0: InitialCondition,
    pub engine: KernelEngine,
    pub picard_iters: usize,
    pub picard_residual: f64,
    pub residual_history: Vec<f64>,
    pub seed: u64,
    pub small_cutoff: f64,
    /// β = b + b_ε, the drift density of the noise.
    pub drift: f64,
}

/// A jump landing exactly on a grid time: at that time the right value is the left
/// value plus `weight` · δ_x, which has no pointwise representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub time_index: usize,
    pub jump_index: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub weight: f64,
}

/// u(t_j, x_k) on an evaluation grid.
///
/// Values are pointwise. The jump of u at T_i is the atom σ(u(T_i−, X_i)) Z_i δ_{X_i},
/// which vanishes at every x ≠ X_i, so stored values are simultaneously u(t_j−, x_k)
/// and u(t_j, x_k); the distributional difference is listed in `atoms`.
#[derive(Clone, Debug, Serialize)]
pub struct FieldGrid {
    pub times: Vec<f64>,
    pub lattice: Lattice,
    /// Row-major: `values[j * lattice.len() + k]`.
    pub values: Vec<f64>,
    pub atoms: Vec<Atom>,
    /// σ(u(T_i−, X_i)) Z_i for every jump of the noise.
    pub weights: Vec<f64>,
    pub generation: Generation,
    #[serde(skip)]
    pub pm: Arc<PointMeasure>,
}

impl FieldGrid {
    pub fn n_sites(&self) -> usize {
        self.lattice.len()
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_sites() + k]
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let n = self.n_sites();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn region(&self) -> SimRegion {
        self.pm.region
    }

    /// Largest |u| over the grid.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Flat CSV with header `t,x1[,x2[,x3]],u`.
    pub fn to_csv(&self) -> String {
        let dim = self.lattice.dim();
        let mut out = String::from("t");
        for a in 1..=dim {
            out.push_str(&format!(",x{a}"));
        }
        out.push_str(",u\n");
        let sites = self.lattice.sites();
        for (j, &t) in self.times.iter().enumerate() {
            let ts = fmt_f64(t);
            for (k, s) in sites.iter().enumerate() {
                out.push_str(&ts);
                for v in s {
                    out.push(',');
                    out.push_str(&fmt_f64(*v));
                }
                out.push(',');
                out.push_str(&fmt_f64(self.value(j, k)));
                out.push('\n');
            }
        }
        out
    }

    /// Little-endian binary: u64 n_times, u64 dim, u64 per-axis sizes, then the
    /// times, the axis nodes (axis by axis) and the row-major values as f64.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (2 + self.values.len() + self.times.len()));
        out.extend_from_slice(&(self.times.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.lattice.dim() as u64).to_le_bytes());
        for a in &self.lattice.axes {
            out.extend_from_slice(&(a.len() as u64).to_le_bytes());
        }
        for v in self.times.iter().chain(self.lattice.axes.iter().flatten()).chain(&self.values) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn metadata(&self, config_hash: &str) -> FieldMetadata {
        FieldMetadata {
            config_hash: config_hash.to_string(),
            seed: self.generation.seed,
            n_times: self.times.len(),
            axis_sizes: self.lattice.axes.iter().map(Vec::len).collect(),
            jumps: self.pm.len(),
            atoms: self.atoms.clone(),
            generation: self.generation.clone(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.times.len() * self.n_sites() {
            return Err(Error::numerical("field grid dimensions are inconsistent"));
        }
        if let Some(p) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numerical(format!("non-finite solution value at flat index {p}")));
        }
        Ok(())
    }
}

/// JSON sidecar of an exported field.
#[derive(Clone, Debug, Serialize)]
pub struct FieldMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub n_times: usize,
    pub axis_sizes: Vec<usize>,
    pub jumps: usize,
    pub atoms: Vec<Atom>,
    pub generation: Generation,
}

/// A jump of the noise annotated on a section.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpMark {
    pub index: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub weight: f64,
}

/// t ↦ u(t, x) at a lattice site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSection {
    pub x: Vec<f64>,
    pub site_index: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Jumps with T_i inside [t_first, t_last].
    pub jumps: Vec<JumpMark>,
}

/// x ↦ u(t, x) at a grid time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceSection {
    pub t: f64,
    pub time_index: usize,
    pub sites: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Atoms carried exactly at this time.
    pub atoms: Vec<Atom>,
}

pub fn section_time(fg: &FieldGrid, x: &[f64]) -> Result<TimeSection> {
    let k = fg
        .lattice
        .index_of(x)
        .ok_or_else(|| Error::precondition(format!("x = {x:?} is not a lattice site; interpolation is refused")))?;
    let (t0, t1) = (fg.times[0], *fg.times.last().unwrap());
    let dim = fg.lattice.dim();
    let jumps = fg
        .pm
        .jumps
        .iter()
        .enumerate()
        .filter(|(_, j)| j.t >= t0 && j.t <= t1)
        .map(|(i, j)| JumpMark { index: i, t: j.t, x: j.pos(dim).to_vec(), weight: fg.weights[i] })
        .collect();
    Ok(TimeSection {
        x: fg.lattice.site(k),
        site_index: k,
        times: fg.times.clone(),
        values: (0..fg.times.len()).map(|j| fg.value(j, k)).collect(),
        jumps,
    })
}

pub fn section_space(fg: &FieldGrid, t: f64) -> Result<SpaceSection> {
    let j = fg
        .times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
        .ok_or_else(|| Error::precondition(format!("t = {t} is not a grid time; interpolation is refused")))?;
    Ok(SpaceSection {
        t: fg.times[j],
        time_index: j,
        sites: fg.lattice.sites(),
        values: fg.slice(j).to_vec(),
        atoms: fg.atoms.iter().filter(|a| a.time_index == j).cloned().collect(),
    })
}

fn atoms_for(pm: &PointMeasure, times: &[f64], weights: &[f64]) -> Vec<Atom> {
    let dim = pm.dim();
    let mut out = Vec::new();
    for (i, jmp) in pm.jumps.iter().enumerate() {
        if let Ok(j) = times.binary_search_by(|t| t.total_cmp(&jmp.t)) {
            out.push(Atom { time_index: j, jump_index: i, t: jmp.t, x: jmp.pos(dim).to_vec(), weight: weights[i] });
        }
    }
    out
}

/// The additive solution (σ ≡ 1) on a grid:
/// u(t, x) = V(t, x) + Σ_{T_i<t} G(t−T_i; x, X_i) Z_i + β ∫₀^t ∫_D G(t−s; x, y) dy ds.
pub fn solve_additive(
    pm: &PointMeasure,
    u0: &InitialCondition,
    engine: KernelEngine,
    grid: &EvalGrid,
) -> Result<FieldGrid> {
    solve_scaled(pm, u0, 1.0, SigmaSpec::Constant { c: 1.0 }, engine, grid, 0)
}

// σ ≡ c: the solution is V plus c times the additive noise terms.
pub(crate) fn solve_scaled(
    pm: &PointMeasure,
    u0: &InitialCondition,
    c: f64,
    sigma: SigmaSpec,
    engine: KernelEngine,
    grid: &EvalGrid,
    iters: usize,
) -> Result<FieldGrid> {
    let region = pm.region;
    grid.validate_in(&region)?;
    u0.validate_for(&region)?;
    let weights: Vec<f64> = pm.jumps.iter().map(|j| c * j.z).collect();
    let drift = c * pm.drift();
    let hom = Homogeneous::new(u0, &region)?;
    let values = if region.is_interval() {
        interval::additive_grid(pm, &weights, drift, &hom, engine, grid)?
    } else {
        boxed::additive_grid(pm, &weights, drift, &hom, engine, grid)?
    };
    let fg = FieldGrid {
        times: grid.times.clone(),
        lattice: grid.lattice.clone(),
        values,
        atoms: atoms_for(pm, &grid.times, &weights),
        weights,
        generation: Generation {
            kind: SolveKind::Additive,
            sigma,
            u0: u0.clone(),
            engine: resolved_engine(engine, &region),
            picard_iters: iters,
            picard_residual: 0.0,
            residual_history: Vec::new(),
            seed: pm.seed,
            small_cutoff: pm.small_cutoff,
            drift: pm.drift(),
        },
        pm: Arc::new(pm.clone()),
    };
    fg.check()?;
    Ok(fg)
}

/// Jump weights w_i = σ(u(T_i−, X_i)) Z_i by forward recursion over the jumps.
///
/// Exact for constant σ, and for any σ when the noise has no drift, since then
/// u(T_i−, X_i) = V(T_i, X_i) + Σ_{l<i} w_l G(T_i − T_l; X_i, X_l).
pub fn jump_weights(pm: &PointMeasure, u0: &InitialCondition, sigma: &SigmaSpec, engine: KernelEngine) -> Result<Vec<f64>> {
    if let Some(c) = sigma.constant_value() {
        return Ok(pm.jumps.iter().map(|j| c * j.z).collect());
    }
    if pm.drift() != 0.0 {
        return Err(Error::precondition(
            "exact jump weights for non-constant sigma need a drift-free noise (b + b_eps = 0); use the Picard solver",
        ));
    }
    let region = pm.region;
    u0.validate_for(&region)?;
    let hom = Homogeneous::new(u0, &region)?;
    let d = region.dim();
    let mut w: Vec<f64> = Vec::with_capacity(pm.len());
    for (i, ji) in pm.jumps.iter().enumerate() {
        let mut u = hom.value(ji.t, ji.pos(d));
        for (jl, wl) in pm.jumps[..i].iter().zip(&w) {
            u += wl * if region.is_interval() {
                engine.green_interval(ji.t - jl.t, ji.x[0], jl.x[0])?.value
            } else {
                let r2: f64 = ji.pos(d).iter().zip(jl.pos(d)).map(|(a, b)| (a - b) * (a - b)).sum();
                crate::kernels::gauss(ji.t - jl.t, r2, d)
            };
        }
        w.push(sigma.eval(u) * ji.z);
    }
    Ok(w)
}

/// Grid values of V + Σ_{T_i<t} w_i G(t − T_i; ·, X_i) + β·(drift profile) for given weights.
pub fn field_from_weights(
    pm: &PointMeasure,
    weights: &[f64],
    drift: f64,
    u0: &InitialCondition,
    engine: KernelEngine,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    let region = pm.region;
    grid.validate_in(&region)?;
    u0.validate_for(&region)?;
    if weights.len() != pm.len() {
        return Err(Error::precondition("one weight per jump is required"));
    }
    let hom = Homogeneous::new(u0, &region)?;
    if region.is_interval() {
        interval::additive_grid(pm, weights, drift, &hom, engine, grid)
    } else {
        boxed::additive_grid(pm, weights, drift, &hom, engine, grid)
    }
}

fn resolved_engine(engine: KernelEngine, region: &SimRegion) -> KernelEngine {
    if region.is_interval() {
        engine
    } else {
        KernelEngine::Gaussian
    }
}

/// Additive solution at scattered points (t, x), excluding jumps with T_i ≥ t.
pub fn additive_at(
    pm: &PointMeasure,
    u0: &InitialCondition,
    engine: KernelEngine,
    points: &[(f64, Vec<f64>)],
) -> Result<Vec<f64>> {
    let region = pm.region;
    u0.validate_for(&region)?;
    let hom = Homogeneous::new(u0, &region)?;
    let dim = region.dim();
    let beta = pm.drift();
    points
        .iter()
        .map(|(t, x)| {
            if x.len() != dim || !region.contains(x) || *t < 0.0 {
                return Err(Error::precondition(format!("point ({t}, {x:?}) outside the simulation region")));
            }
            let mut u = hom.value(*t, x);
            if region.is_interval() {
                for j in pm.jumps.iter().take_while(|j| j.t < *t) {
                    u += j.z * engine.green_interval(t - j.t, x[0], j.x[0])?.value;
                }
                u += beta * interval_drift_profile(*t, x[0]);
            } else {
                for j in pm.jumps.iter().take_while(|j| j.t < *t) {
                    let r2: f64 = x.iter().zip(&j.x).map(|(a, b)| (a - b) * (a - b)).sum();
                    u += j.z * crate::kernels::gauss(t - j.t, r2, dim);
                }
                u += beta * t;
            }
            Ok(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Jump;

    #[test]
    fn sigma_lipschitz_spot_checks() {
        let sigmas = [
            SigmaSpec::Constant { c: 2.0 },
            SigmaSpec::Linear { a: -0.5, c: 1.0 },
            SigmaSpec::tanh(1.5),
            SigmaSpec::BoundedLipschitz { name: BoundedName::Clamp, scale: 0.7 },
        ];
        let mut x = 0.123_f64;
        for s in sigmas {
            for _ in 0..500 {
                x = (x * 7919.0 + 0.31).fract();
                let (u, v) = (8.0 * x - 4.0, 8.0 * (x * 13.0).fract() - 4.0);
                assert!((s.eval(u) - s.eval(v)).abs() <= s.lipschitz_constant() * (u - v).abs() + 1e-15);
            }
        }
    }

    #[test]
    fn serde_forms() {
        let s: SigmaSpec = serde_json::from_str(r#"{"kind":"bounded_lipschitz","name":"tanh","scale":1.0}"#).unwrap();
        assert_eq!(s, SigmaSpec::tanh(1.0));
        let u: InitialCondition = serde_json::from_str(r#"{"kind":"sine_mode","k":2,"amplitude":0.5}"#).unwrap();
        assert_eq!(u, InitialCondition::SineMode { k: 2, amplitude: 0.5 });
        assert!(serde_json::from_str::<InitialCondition>(r#"{"kind":"zero","c":1}"#).is_err());
        assert!(serde_json::from_str::<InitialCondition>(r#"{"kind":"custom","name":"f"}"#).is_err());
        let back: InitialCondition = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn interval_needs_vanishing_u0() {
        let r = SimRegion::interval(1.0).unwrap();
        assert!(InitialCondition::Constant { c: 1.0 }.validate_for(&r).is_err());
        assert!(InitialCondition::custom("bump", |x| x[0].sin().powi(2)).validate_for(&r).is_ok());
        assert!(InitialCondition::custom("one", |_| 1.0).validate_for(&r).is_err());
    }

    #[test]
    fn lattice_indexing() {
        let l = Lattice::uniform(2, -1.0, 1.0, 5);
        assert_eq!(l.len(), 25);
        assert_eq!(l.site(7), vec![-0.5, 0.0]);
        assert_eq!(l.index_of(&[-0.5, 0.0]), Some(7));
        assert_eq!(l.index_of(&[-0.4, 0.0]), None);
        assert_eq!(Lattice::interval(8).interval_intervals(), Some(8));
    }

    #[test]
    fn sections_refuse_off_grid() {
        let r = SimRegion::interval(1.0).unwrap();
        let pm = PointMeasure::from_jumps(r, vec![Jump::new(0.5, &[PI / 2.0], 2.0)]).unwrap();
        let grid = EvalGrid::with_sizes(&r, 8, 8);
        let fg = solve_additive(&pm, &InitialCondition::Zero, KernelEngine::auto(), &grid).unwrap();
        assert!(section_time(&fg, &[1.0]).is_err());
        assert!(section_space(&fg, 0.3).is_err());
        let sec = section_time(&fg, &[PI / 2.0]).unwrap();
        assert_eq!(sec.jumps.len(), 1);
        assert_eq!(sec.values[5], fg.value(5, 4));
        let sp = section_space(&fg, 0.5).unwrap();
        assert_eq!(sp.atoms.len(), 1);
        assert_eq!(sp.atoms[0].weight, 2.0);
    }

    #[test]
    fn binary_layout() {
        let r = SimRegion::interval(1.0).unwrap();
        let grid = EvalGrid::with_sizes(&r, 2, 4);
        let fg = solve_additive(&PointMeasure::empty(r), &InitialCondition::SineMode { k: 1, amplitude: 1.0 }, KernelEngine::auto(), &grid).unwrap();
        let bin = fg.to_binary();
        assert_eq!(bin.len(), 8 * (3 + 3 + 5 + 15));
        assert_eq!(u64::from_le_bytes(bin[0..8].try_into().unwrap()), 3);
        let last = f64::from_le_bytes(bin[bin.len() - 8..].try_into().unwrap());
        assert_eq!(last, fg.values[14]);
        assert!(fg.to_csv().starts_with("t,x1,u\n0.0,0.0,0.0\n"));
    }
}
