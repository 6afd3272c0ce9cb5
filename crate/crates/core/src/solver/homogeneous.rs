use std::f64::consts::PI;
use std::sync::Arc;

use super::InitialCondition;
use crate::dst::{fold_mode, Dst1};
use crate::error::{Error, Result};
use crate::noise::SimRegion;
use crate::quad::composite_gauss_legendre;

// Fine grid used to expand a custom u₀ on [0, π] in sines.
const CUSTOM_GRID: usize = 4096;
const CUSTOM_MODES: usize = 2048;

type Fun = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

enum Kind {
    Zero,
    Constant(f64),
    Sine { k: f64, amp: f64 },
    /// Sine coefficients a_n(u₀), n = 1.., with u₀ itself for t = 0.
    IntervalSeries { coeffs: Vec<f64>, f: Fun },
    /// E[u₀(x + √(2t) N)] by tensor quadrature against the standard normal.
    BoxCustom { f: Fun, nodes: Vec<f64>, weights: Vec<f64> },
}

/// V(t, x) = ∫_D G(t; x, y) u₀(y) dy, prepared for repeated evaluation.
pub struct Homogeneous {
    kind: Kind,
    interval: bool,
}

impl Homogeneous {
    pub fn new(u0: &InitialCondition, region: &SimRegion) -> Result<Self> {
        let interval = region.is_interval();
        let kind = match u0 {
            InitialCondition::Zero => Kind::Zero,
            InitialCondition::Constant { c } => {
                if interval && *c != 0.0 {
                    return Err(Error::config("nonzero constant u0 does not vanish on the interval boundary"));
                }
                Kind::Constant(*c)
            }
            InitialCondition::SineMode { k, amplitude } => Kind::Sine { k: *k as f64, amp: *amplitude },
            InitialCondition::Custom(c) if interval => {
                let m = CUSTOM_GRID;
                let samples: Vec<f64> = (1..m).map(|i| (c.f)(&[PI * i as f64 / m as f64])).collect();
                let mut y = vec![0.0; m - 1];
                Dst1::new(m).apply(&samples, &mut y);
                let scale = (2.0 / PI).sqrt() * PI / m as f64;
                let coeffs = y[..CUSTOM_MODES].iter().map(|v| v * scale).collect();
                Kind::IntervalSeries { coeffs, f: c.f.clone() }
            }
            InitialCondition::Custom(c) => {
                let (nodes, w) = composite_gauss_legendre(-8.5, 8.5, 4, 16);
                let weights = nodes
                    .iter()
                    .zip(&w)
                    .map(|(z, w)| w * (-0.5 * z * z).exp() / (2.0 * PI).sqrt())
                    .collect();
                Kind::BoxCustom { f: c.f.clone(), nodes, weights }
            }
        };
        Ok(Homogeneous { kind, interval })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero) || matches!(self.kind, Kind::Constant(c) if c == 0.0)
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Constant(c) => *c,
            Kind::Sine { k, amp } => amp * (-k * k * t).exp() * (k * x[0]).sin(),
            Kind::IntervalSeries { coeffs, f } => {
                if t == 0.0 {
                    return f(x);
                }
                let s: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let n = (i + 1) as f64;
                        a * (-n * n * t).exp() * (n * x[0]).sin()
                    })
                    .sum();
                (2.0 / PI).sqrt() * s
            }
            Kind::BoxCustom { f, nodes, weights } => {
                if t == 0.0 {
                    return f(x);
                }
                let s = (2.0 * t).sqrt();
                let d = x.len();
                let n = nodes.len();
                let mut y = vec![0.0; d];
                let mut total = 0.0;
                for flat in 0..n.pow(d as u32) {
                    let mut rest = flat;
                    let mut w = 1.0;
                    for a in 0..d {
                        let i = rest % n;
                        rest /= n;
                        y[a] = x[a] + s * nodes[i];
                        w *= weights[i];
                    }
                    total += w * f(&y);
                }
                total
            }
        }
    }

    /// V(t, ·) at the interval sites kπ/M, k = 0..=M.
    pub fn interval_slice(&self, t: f64, dst: &mut Dst1) -> Vec<f64> {
        debug_assert!(self.interval);
        let m = dst.intervals();
        let mut out = vec![0.0; m + 1];
        match &self.kind {
            Kind::Zero | Kind::Constant(_) => {}
            Kind::IntervalSeries { coeffs, .. } if t > 0.0 => {
                let mut folded = vec![0.0; m - 1];
                for (i, a) in coeffs.iter().enumerate() {
                    let n = i + 1;
                    let decay = (-((n * n) as f64) * t).exp();
                    if decay == 0.0 {
                        break;
                    }
                    if let Some((r, s)) = fold_mode(n, m) {
                        folded[r - 1] += s * a * decay;
                    }
                }
                dst.apply(&folded, &mut out[1..m]);
                for v in &mut out[1..m] {
                    *v *= (2.0 / PI).sqrt();
                }
            }
            _ => {
                for (k, v) in out.iter_mut().enumerate().take(m).skip(1) {
                    *v = self.value(t, &[super::interval_site(k, m)]);
                }
            }
        }
        out
    }
}

/// V(t, x) = ∫_D G(t; x, y) u₀(y) dy for t ≥ 0.
///
/// Closed forms for the zero, constant (ℝ^d only) and sine-mode data; a sine
/// expansion (interval) or Gaussian quadrature (box) for custom data.
pub fn homogeneous_part(u0: &InitialCondition, region: &SimRegion, t: f64, x: &[f64]) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::precondition(format!("homogeneous_part needs t >= 0, got {t}")));
    }
    if x.len() != region.dim() {
        return Err(Error::precondition("point dimension does not match the region"));
    }
    Ok(Homogeneous::new(u0, region)?.value(t, x))
}
