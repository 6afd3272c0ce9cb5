use std::f64::consts::PI;

use serde::Serialize;

use super::{gauss, KernelEngine};
use crate::error::{Error, Result};

/// Machine-level tail target used to pick the smallest reliable time.
const TAU_MACHINE: f64 = 1e-16;

/// Number of sine modes kept in the spectral Green's function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralTruncation {
    pub modes: usize,
}

impl SpectralTruncation {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::config("spectral truncation needs at least one mode"));
        }
        Ok(SpectralTruncation { modes })
    }

    /// Below this time the series needs more modes than retained.
    pub fn t_min(&self) -> f64 {
        let k = self.modes as f64;
        (1.0 / TAU_MACHINE).ln() / (k * k)
    }

    /// Σ_{k>K} e^{−k²t} ≤ e^{−K²t} / (1 − e^{−(2K+1)t}).
    pub fn tail_bound(&self, t: f64) -> f64 {
        let k = self.modes as f64;
        (-k * k * t).exp() / (1.0 - (-(2.0 * k + 1.0) * t).exp())
    }
}

fn check_site(x: f64, name: &str) -> Result<()> {
    if !(0.0..=PI).contains(&x) {
        return Err(Error::precondition(format!("{name} = {x} outside [0, π]")));
    }
    Ok(())
}

/// Spectral Dirichlet Green's function on [0, π]: (2/π) Σ_{k≤K} sin(kx) sin(ky) e^{−k²t}.
pub fn green_interval(t: f64, x: f64, y: f64, trunc: SpectralTruncation) -> Result<f64> {
    check_site(x, "x")?;
    check_site(y, "y")?;
    if t <= trunc.t_min() {
        return Err(Error::precondition(format!(
            "spectral truncation unreliable near t=0 (t = {t} <= t_min = {:.3e}); use image oracle",
            trunc.t_min()
        )));
    }
    if x == 0.0 || y == 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for k in 1..=trunc.modes {
        let kf = k as f64;
        let decay = (-kf * kf * t).exp();
        if decay == 0.0 {
            break;
        }
        s += (kf * x).sin() * (kf * y).sin() * decay;
    }
    Ok(2.0 / PI * s)
}

/// Method-of-images value Σ_{|k|≤terms} [g(t, x−y−2kπ) − g(t, x+y−2kπ)].
pub fn green_interval_image(t: f64, x: f64, y: f64, terms: usize) -> Result<f64> {
    check_site(x, "x")?;
    check_site(y, "y")?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    // sum from the outermost images inwards so the leading terms are added last
    for j in (0..=terms).rev() {
        let shift = 2.0 * PI * j as f64;
        let pair = [shift, -shift];
        let shifts = if j == 0 { &pair[..1] } else { &pair[..] };
        for &k in shifts {
            let a = x - y - k;
            let b = x + y - k;
            s += gauss(t, a * a, 1) - gauss(t, b * b, 1);
        }
    }
    Ok(s)
}

/// Cached decay factors e^{−k²t}, k = 1..=K, for one time lag.
#[derive(Clone, Debug)]
pub struct DecayTable {
    pub t: f64,
    pub factors: Vec<f64>,
}

impl DecayTable {
    pub fn new(t: f64, modes: usize) -> Self {
        let factors = (1..=modes)
            .map(|k| {
                let kf = k as f64;
                (-kf * kf * t).exp()
            })
            .collect();
        DecayTable { t, factors }
    }

    /// G(t; x, y) from cached factors and caller-supplied sin(k·y), k = 1..=K.
    pub fn green_with_sines(&self, x: f64, sin_ky: &[f64]) -> f64 {
        let mut s = 0.0;
        for (k, (f, sy)) in self.factors.iter().zip(sin_ky).enumerate() {
            s += ((k + 1) as f64 * x).sin() * sy * f;
        }
        2.0 / PI * s
    }
}

/// Calibrated constants in c·g(t, x−y) ≤ G(t; x, y) ≤ C·g(t, x−y).
#[derive(Clone, Debug, Serialize)]
pub struct DominationCalibration {
    /// max G/g over the whole grid.
    pub upper: f64,
    /// min G/g over sites at least `interior_margin` away from the boundary.
    pub lower_interior: f64,
    pub interior_margin: f64,
    pub times: Vec<f64>,
    pub sites_per_axis: usize,
    pub engine: KernelEngine,
}

/// Scan G/g on an n×n grid of (x, y) ∈ (0, π)² and the given times.
pub fn calibrate_domination(
    times: &[f64],
    sites_per_axis: usize,
    interior_margin: f64,
    engine: KernelEngine,
) -> Result<DominationCalibration> {
    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    let h = PI / (sites_per_axis as f64 + 1.0);
    for &t in times {
        for i in 1..=sites_per_axis {
            let x = i as f64 * h;
            for j in 1..=sites_per_axis {
                let y = j as f64 * h;
                let g = gauss(t, (x - y) * (x - y), 1);
                if g < 1e-250 {
                    continue;
                }
                let gd = engine.green_interval(t, x, y)?.value;
                let r = gd / g;
                upper = upper.max(r);
                let interior = |v: f64| v >= interior_margin && v <= PI - interior_margin;
                if interior(x) && interior(y) {
                    lower = lower.min(r);
                }
            }
        }
    }
    Ok(DominationCalibration {
        upper,
        lower_interior: lower,
        interior_margin,
        times: times.to_vec(),
        sites_per_axis,
        engine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectral_basic_properties() {
        let tr = SpectralTruncation::new(50).unwrap();
        assert_eq!(green_interval(0.3, 0.0, 1.0, tr).unwrap(), 0.0);
        let a = green_interval(0.3, 0.4, 2.2, tr).unwrap();
        let b = green_interval(0.3, 2.2, 0.4, tr).unwrap();
        assert_eq!(a, b);
        assert!(green_interval(1e-4, 1.0, 1.0, tr).is_err());
        assert!(green_interval(0.3, -0.1, 1.0, tr).is_err());
    }

    #[test]
    fn images_match_spectral() {
        let tr = SpectralTruncation::new(100).unwrap();
        for &t in &[0.05, 0.5, 2.0] {
            for &(x, y) in &[(0.3, 0.4), (1.5, 2.9), (3.0, 0.1)] {
                let s = green_interval(t, x, y, tr).unwrap();
                let i = green_interval_image(t, x, y, 10).unwrap();
                assert!((s - i).abs() < 1e-12, "t={t} x={x} y={y}: {s} vs {i}");
            }
        }
    }

    #[test]
    fn decay_table_agrees() {
        let tr = SpectralTruncation::new(64).unwrap();
        let tab = DecayTable::new(0.2, 64);
        let y = 1.1;
        let sines: Vec<f64> = (1..=64).map(|k| (k as f64 * y).sin()).collect();
        assert_relative_eq!(
            tab.green_with_sines(2.0, &sines),
            green_interval(0.2, 2.0, y, tr).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let tr = SpectralTruncation::new(5).unwrap();
        let t = 0.05;
        let tail: f64 = (6..2000).map(|k| (-(k as f64).powi(2) * t).exp()).sum();
        assert!(tail <= tr.tail_bound(t));
    }
}
