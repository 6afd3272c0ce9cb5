//! Green's functions of the heat operator ∂_t − Δ.
//!
//! On ℝ^d the kernel is the Gaussian density g(t, x) = (4πt)^{−d/2} e^{−|x|²/(4t)} 1_{t≥0}.
//! On the interval [0, π] with Dirichlet boundary it is the sine series
//! G(t; x, y) = (2/π) Σ_k sin(kx) sin(ky) e^{−k²t}, with a method-of-images
//! evaluator serving as an independent oracle and as the small-t engine.

mod green;
mod mittag;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use green::{
    calibrate_domination, green_interval, green_interval_image, DecayTable, DominationCalibration,
    SpectralTruncation,
};
pub use mittag::mittag_leffler;

/// Gaussian heat kernel g(t, x) for x ∈ ℝ^d, d = `x.len()`.
///
/// Returns 0 for t ≤ 0 away from the origin; (t, x) = (0, 0) carries the
/// delta atom of g(0, ·) and has no pointwise value.
pub fn heat_kernel(t: f64, x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::precondition("heat_kernel: dimension must be at least 1"));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if t == 0.0 && r2 == 0.0 {
        return Err(Error::precondition("heat_kernel: delta atom at (0, 0); not a pointwise value"));
    }
    Ok(gauss(t, r2, x.len()))
}

/// g(t, ·) at squared distance `r2` in dimension `d`, no argument checks.
#[inline]
pub fn gauss(t: f64, r2: f64, d: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let e = (-r2 / (4.0 * t)).exp();
    match d {
        1 => e / (4.0 * PI * t).sqrt(),
        2 => e / (4.0 * PI * t),
        _ => e * (4.0 * PI * t).powf(-0.5 * d as f64),
    }
}

/// sup_{t ∈ [0, T]} g(t, x).
///
/// The map t ↦ g(t, x) increases up to t* = |x|²/(2d) and decreases after, so the
/// supremum is g(T, x) when T < t* and (d/(2πe))^{d/2} |x|^{−d} otherwise.
pub fn sup_heat_kernel(horizon: f64, x: &[f64]) -> Result<f64> {
    let d = x.len();
    if d == 0 {
        return Err(Error::precondition("sup_heat_kernel: dimension must be at least 1"));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::precondition("sup_heat_kernel: unbounded at x = 0"));
    }
    Ok(sup_gauss(horizon, r2, d))
}

/// sup over [0, T] at squared distance `r2 > 0`, no argument checks.
#[inline]
pub fn sup_gauss(horizon: f64, r2: f64, d: usize) -> f64 {
    let df = d as f64;
    let t_star = r2 / (2.0 * df);
    if horizon < t_star {
        gauss(horizon, r2, d)
    } else {
        (df / (2.0 * PI * std::f64::consts::E)).powf(0.5 * df) * r2.powf(-0.5 * df)
    }
}

/// Kernel engine selected by name in configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    Gaussian,
    Spectral,
    Image,
    Auto,
}

/// Engine with its truncation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum KernelEngine {
    Gaussian,
    SpectralInterval { modes: usize },
    ImageMethod { terms: usize },
    /// Spectral above the truncation's t_min, images below.
    Auto { modes: usize, terms: usize },
}

impl KernelEngine {
    pub const DEFAULT_MODES: usize = 256;
    pub const DEFAULT_TERMS: usize = 10;

    pub fn from_name(name: EngineName, modes: usize, terms: usize) -> Self {
        match name {
            EngineName::Gaussian => KernelEngine::Gaussian,
            EngineName::Spectral => KernelEngine::SpectralInterval { modes },
            EngineName::Image => KernelEngine::ImageMethod { terms },
            EngineName::Auto => KernelEngine::Auto { modes, terms },
        }
    }

    pub fn auto() -> Self {
        KernelEngine::Auto { modes: Self::DEFAULT_MODES, terms: Self::DEFAULT_TERMS }
    }

    /// Kernel on [0, π]; the Gaussian engine is refused there.
    pub fn green_interval(&self, t: f64, x: f64, y: f64) -> Result<KernelEval> {
        let value = match *self {
            KernelEngine::Gaussian => {
                return Err(Error::config("gaussian engine is the free-space kernel; use spectral/image/auto on the interval"))
            }
            KernelEngine::SpectralInterval { modes } => green_interval(t, x, y, SpectralTruncation::new(modes)?)?,
            KernelEngine::ImageMethod { terms } => green_interval_image(t, x, y, terms)?,
            KernelEngine::Auto { modes, terms } => {
                let tr = SpectralTruncation::new(modes)?;
                if t > tr.t_min() {
                    green_interval(t, x, y, tr)?
                } else if t <= 0.0 {
                    0.0
                } else {
                    green_interval_image(t, x, y, terms)?
                }
            }
        };
        Ok(KernelEval { value, engine: *self, t, x: vec![x], y: vec![y] })
    }

    /// Kernel on ℝ^d; only the Gaussian engine applies.
    pub fn green_free(&self, t: f64, x: &[f64], y: &[f64]) -> Result<KernelEval> {
        if *self != KernelEngine::Gaussian && !matches!(self, KernelEngine::Auto { .. }) {
            return Err(Error::config("spectral/image engines are interval-only; use gaussian on boxes"));
        }
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(KernelEval {
            value: heat_kernel(t, &diff)?,
            engine: KernelEngine::Gaussian,
            t,
            x: x.to_vec(),
            y: y.to_vec(),
        })
    }
}

/// A single kernel value with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub engine: KernelEngine,
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}
