//! Grid evaluation on [0, π].
//!
//! Jump contributions are carried as sine coefficients
//! S_k(t) = Σ_{T_l ≤ t − t_min} w_l sin(k X_l) e^{−k²(t−T_l)}, advanced in time by
//! exact decay and synthesized on the lattice kπ/M with one DST per slice.
//! Jumps younger than t_min, where the truncated series is not accurate, are
//! summed with the image kernel instead.

use std::f64::consts::PI;

use super::{EvalGrid, Homogeneous};
use crate::dst::{fold_mode, Dst1};
use crate::error::{Error, Result};
use crate::kernels::{green_interval_image, KernelEngine, SpectralTruncation};
use crate::noise::{Jump, PointMeasure};

/// w(t, x) = ∫₀^t ∫₀^π G(s; x, y) dy ds, the response to a unit drift density.
///
/// Uses w = x(π−x)/2 − Σ_{k odd} 4/(πk³) sin(kx) e^{−k²t}, whose series converges
/// exponentially for t > 0.
pub fn interval_drift_profile(t: f64, x: f64) -> f64 {
    if t <= 0.0 || x <= 0.0 || x >= PI {
        return 0.0;
    }
    let kmax = drift_modes(t);
    let mut s = 0.0;
    let mut k = kmax | 1;
    while k >= 1 {
        let kf = k as f64;
        s += 4.0 / (PI * kf * kf * kf) * (kf * x).sin() * (-kf * kf * t).exp();
        if k == 1 {
            break;
        }
        k -= 2;
    }
    0.5 * x * (PI - x) - s
}

fn drift_modes(t: f64) -> usize {
    // e^{−k²t} < e^{−40} beyond this, capped where the k^{−3} tail is below 1e-13
    ((40.0 / t).sqrt().ceil() as usize).clamp(1, 1 << 22)
}

/// w(t, ·) at the sites kπ/M.
pub(crate) fn drift_profile_slice(t: f64, dst: &mut Dst1) -> Vec<f64> {
    let m = dst.intervals();
    let mut out = vec![0.0; m + 1];
    if t <= 0.0 {
        return out;
    }
    let mut folded = vec![0.0; m - 1];
    let kmax = drift_modes(t);
    for k in (1..=kmax).step_by(2) {
        let kf = k as f64;
        let c = 4.0 / (PI * kf * kf * kf) * (-kf * kf * t).exp();
        if let Some((r, s)) = fold_mode(k, m) {
            folded[r - 1] += s * c;
        }
    }
    dst.apply(&folded, &mut out[1..m]);
    for (i, v) in out.iter_mut().enumerate().take(m).skip(1) {
        let x = super::interval_site(i, m);
        *v = 0.5 * x * (PI - x) - *v;
    }
    out
}

/// Split of an interval engine into spectral modes, the age below which images
/// are used, and the number of image pairs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Split {
    pub modes: usize,
    pub t_min: f64,
    pub terms: usize,
}

impl Split {
    pub fn new(engine: KernelEngine) -> Result<Self> {
        match engine {
            KernelEngine::Gaussian => Err(Error::config(
                "gaussian engine is the free-space kernel; use spectral/image/auto on the interval",
            )),
            KernelEngine::SpectralInterval { modes } => {
                SpectralTruncation::new(modes)?;
                Ok(Split { modes, t_min: 0.0, terms: KernelEngine::DEFAULT_TERMS })
            }
            KernelEngine::ImageMethod { terms } => Ok(Split { modes: 0, t_min: f64::INFINITY, terms }),
            KernelEngine::Auto { modes, terms } => {
                Ok(Split { modes, t_min: SpectralTruncation::new(modes)?.t_min(), terms })
            }
        }
    }
}

/// Jump contributions on the lattice and at the jumps' own left limits.
pub(crate) struct JumpSweep<'a> {
    jumps: &'a [Jump],
    split: Split,
    /// sin(k X_l), k = 1..=modes, row per jump.
    sines: Vec<f64>,
}

pub(crate) struct SweepOut {
    /// Row-major `times × (M + 1)`.
    pub grid: Vec<f64>,
    /// Σ_{T_l<T_i} G(T_i − T_l; X_i, X_l) w_l per jump; empty unless requested.
    pub left: Vec<f64>,
}

enum Event {
    Slice(usize),
    Jump(usize),
}

impl<'a> JumpSweep<'a> {
    pub fn new(jumps: &'a [Jump], split: Split) -> Self {
        let k = split.modes;
        let mut sines = vec![0.0; jumps.len() * k];
        for (row, j) in sines.chunks_mut(k.max(1)).zip(jumps) {
            if k == 0 {
                break;
            }
            for (i, s) in row.iter_mut().enumerate() {
                *s = ((i + 1) as f64 * j.x[0]).sin();
            }
        }
        JumpSweep { jumps, split, sines }
    }

    fn sin_row(&self, l: usize) -> &[f64] {
        let k = self.split.modes;
        &self.sines[l * k..(l + 1) * k]
    }

    pub fn run(&self, weights: &[f64], times: &[f64], dst: &mut Dst1, want_left: bool) -> Result<SweepOut> {
        let m = dst.intervals();
        let ns = m + 1;
        let kmax = self.split.modes;
        let n = self.jumps.len();
        let mut grid = vec![0.0; times.len() * ns];
        let mut left = if want_left { vec![0.0; n] } else { Vec::new() };

        let mut events: Vec<(f64, Event)> = times.iter().enumerate().map(|(j, &t)| (t, Event::Slice(j))).collect();
        if want_left {
            events.extend(self.jumps.iter().enumerate().map(|(i, jmp)| (jmp.t, Event::Jump(i))));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut s = vec![0.0; kmax];
        let mut t_cur = 0.0;
        let mut next_old = 0;
        let mut first_future = 0;
        let mut folded = vec![0.0; m - 1];
        let mut synth = vec![0.0; m - 1];

        for (tau, ev) in events {
            if tau > t_cur {
                let dt = tau - t_cur;
                for (k, v) in s.iter_mut().enumerate() {
                    let kf = (k + 1) as f64;
                    *v *= (-kf * kf * dt).exp();
                }
                t_cur = tau;
            }
            while first_future < n && self.jumps[first_future].t < tau {
                first_future += 1;
            }
            while next_old < first_future && self.jumps[next_old].t <= tau - self.split.t_min {
                let jl = &self.jumps[next_old];
                let w = weights[next_old];
                let lag = tau - jl.t;
                for (k, (v, sn)) in s.iter_mut().zip(self.sin_row(next_old)).enumerate() {
                    let kf = (k + 1) as f64;
                    *v += w * sn * (-kf * kf * lag).exp();
                }
                next_old += 1;
            }
            match ev {
                Event::Slice(j) => {
                    let row = &mut grid[j * ns..(j + 1) * ns];
                    if kmax > 0 && next_old > 0 {
                        folded.iter_mut().for_each(|v| *v = 0.0);
                        for (k, v) in s.iter().enumerate() {
                            if let Some((r, sg)) = fold_mode(k + 1, m) {
                                folded[r - 1] += sg * v;
                            }
                        }
                        dst.apply(&folded, &mut synth);
                        for (o, v) in row[1..m].iter_mut().zip(&synth) {
                            *o = 2.0 / PI * v;
                        }
                    }
                    for l in next_old..first_future {
                        let jl = &self.jumps[l];
                        let lag = tau - jl.t;
                        for (i, o) in row.iter_mut().enumerate().take(m).skip(1) {
                            let x = super::interval_site(i, m);
                            *o += weights[l] * green_interval_image(lag, x, jl.x[0], self.split.terms)?;
                        }
                    }
                }
                Event::Jump(i) => {
                    let xi = self.jumps[i].x[0];
                    let mut v = 2.0 / PI * s.iter().zip(self.sin_row(i)).map(|(a, b)| a * b).sum::<f64>();
                    for l in next_old..first_future {
                        let jl = &self.jumps[l];
                        v += weights[l] * green_interval_image(tau - jl.t, xi, jl.x[0], self.split.terms)?;
                    }
                    left[i] = v;
                }
            }
        }
        Ok(SweepOut { grid, left })
    }
}

/// Additive grid values with jump weights `weights` and drift density `drift`.
pub(crate) fn additive_grid(
    pm: &PointMeasure,
    weights: &[f64],
    drift: f64,
    hom: &Homogeneous,
    engine: KernelEngine,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    let split = Split::new(engine)?;
    let Some(m) = grid.lattice.interval_intervals() else {
        return scattered(pm, weights, drift, hom, engine, grid);
    };
    let mut dst = Dst1::new(m);
    let sweep = JumpSweep::new(&pm.jumps, split);
    let mut values = sweep.run(weights, &grid.times, &mut dst, false)?.grid;
    let ns = m + 1;
    for (j, &t) in grid.times.iter().enumerate() {
        let row = &mut values[j * ns..(j + 1) * ns];
        if !hom.is_zero() {
            for (o, v) in row.iter_mut().zip(hom.interval_slice(t, &mut dst)) {
                *o += v;
            }
        }
        if drift != 0.0 {
            for (o, w) in row.iter_mut().zip(drift_profile_slice(t, &mut dst)) {
                *o += drift * w;
            }
        }
    }
    Ok(values)
}

// Lattices other than kπ/M: evaluate every site directly.
fn scattered(
    pm: &PointMeasure,
    weights: &[f64],
    drift: f64,
    hom: &Homogeneous,
    engine: KernelEngine,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    let xs = &grid.lattice.axes[0];
    let mut out = Vec::with_capacity(grid.times.len() * xs.len());
    for &t in &grid.times {
        for &x in xs {
            let mut u = hom.value(t, &[x]) + drift * interval_drift_profile(t, x);
            for (j, w) in pm.jumps.iter().zip(weights).take_while(|(j, _)| j.t < t) {
                u += w * engine.green_interval(t - j.t, x, j.x[0])?.value;
            }
            out.push(u);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::green_interval;
    use crate::noise::SimRegion;

    #[test]
    fn drift_profile_solves_the_stationary_problem() {
        // for large t, w → x(π−x)/2; at small t, w ≈ t away from the boundary
        assert!((interval_drift_profile(50.0, 1.0) - 0.5 * (PI - 1.0)).abs() < 1e-14);
        assert!((interval_drift_profile(1e-3, PI / 2.0) - 1e-3).abs() < 1e-13);
        assert_eq!(interval_drift_profile(0.3, 0.0), 0.0);
        // the k-series form (1 − e^{−k²t})/k³ summed directly
        let (t, x) = (0.37, 1.3);
        let direct: f64 = (0..200_000)
            .map(|i| {
                let k = (2 * i + 1) as f64;
                4.0 / (PI * k * k * k) * (k * x).sin() * (1.0 - (-k * k * t).exp())
            })
            .sum();
        assert!((interval_drift_profile(t, x) - direct).abs() < 1e-10);
        let mut d = Dst1::new(32);
        let slice = drift_profile_slice(t, &mut d);
        let x7 = 7.0 * PI / 32.0;
        assert!((slice[7] - interval_drift_profile(t, x7)).abs() < 1e-14);
    }

    #[test]
    fn sweep_matches_pointwise_kernels() {
        let r = SimRegion::interval(1.0).unwrap();
        let jumps = vec![
            Jump::new(0.1, &[0.4], 1.0),
            Jump::new(0.5, &[1.9], -2.0),
            Jump::new(0.9999, &[2.5], 0.7),
        ];
        let pm = PointMeasure::from_jumps(r, jumps).unwrap();
        let w: Vec<f64> = pm.jumps.iter().map(|j| j.z).collect();
        let times = vec![0.0, 0.3, 0.5, 1.0];
        let m = 64;
        let mut dst = Dst1::new(m);
        let eng = KernelEngine::auto();
        let out = JumpSweep::new(&pm.jumps, Split::new(eng).unwrap()).run(&w, &times, &mut dst, true).unwrap();
        for (j, &t) in times.iter().enumerate() {
            for k in [1usize, 17, 40, 63] {
                let x = PI * k as f64 / m as f64;
                let mut exact = 0.0;
                for jl in pm.jumps.iter().filter(|jl| jl.t < t) {
                    exact += jl.z * green_interval_image(t - jl.t, x, jl.x[0], 20).unwrap();
                }
                assert!((out.grid[j * (m + 1) + k] - exact).abs() < 1e-12, "t={t} k={k}");
            }
        }
        let exact_left = 1.0 * green_interval(0.4, 1.9, 0.4, SpectralTruncation::new(400).unwrap()).unwrap();
        assert!((out.left[1] - exact_left).abs() < 1e-13);
        assert_eq!(out.left[0], 0.0);
    }
}
