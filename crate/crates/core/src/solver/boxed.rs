//! Grid evaluation on boxes standing in for ℝ^d: direct Gaussian sums, factored per axis.

use std::f64::consts::PI;

use super::{EvalGrid, Homogeneous, Lattice};
use crate::error::Result;
use crate::kernels::{gauss, KernelEngine};
use crate::noise::{Jump, PointMeasure};

/// Add w · g(lag, · − y) to `out` over the lattice.
pub(crate) fn add_gaussian(lattice: &Lattice, y: &[f64], lag: f64, w: f64, out: &mut [f64]) {
    if lag <= 0.0 || w == 0.0 {
        return;
    }
    let d = lattice.dim();
    let scale = w * (4.0 * PI * lag).powf(-0.5 * d as f64);
    // per-axis factors and the index range where they do not underflow
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut ranges = Vec::with_capacity(d);
    for (axis, &ya) in lattice.axes.iter().zip(y) {
        let f: Vec<f64> = axis.iter().map(|x| (-(x - ya) * (x - ya) / (4.0 * lag)).exp()).collect();
        let lo = f.iter().position(|&v| v > 0.0);
        let Some(lo) = lo else { return };
        let hi = f.iter().rposition(|&v| v > 0.0).unwrap();
        factors.push(f);
        ranges.push((lo, hi));
    }
    accumulate(&factors, &ranges, lattice, 0, 0, scale, out);
}

fn accumulate(
    factors: &[Vec<f64>],
    ranges: &[(usize, usize)],
    lattice: &Lattice,
    axis: usize,
    base: usize,
    scale: f64,
    out: &mut [f64],
) {
    let n = lattice.axes[axis].len();
    let (lo, hi) = ranges[axis];
    if axis + 1 == factors.len() {
        for i in lo..=hi {
            out[base * n + i] += scale * factors[axis][i];
        }
    } else {
        for i in lo..=hi {
            accumulate(factors, ranges, lattice, axis + 1, base * n + i, scale * factors[axis][i], out);
        }
    }
}

/// V(t, ·) on the lattice.
pub(crate) fn homogeneous_slice(hom: &Homogeneous, t: f64, lattice: &Lattice) -> Vec<f64> {
    if hom.is_zero() {
        return vec![0.0; lattice.len()];
    }
    (0..lattice.len()).map(|k| hom.value(t, &lattice.site(k))).collect()
}

/// Σ_{T_l<t} w_l g(t − T_l, · − X_l) for every grid time.
pub(crate) fn jump_grid(jumps: &[Jump], weights: &[f64], times: &[f64], lattice: &Lattice) -> Vec<f64> {
    let ns = lattice.len();
    let d = lattice.dim();
    let mut out = vec![0.0; times.len() * ns];
    for (j, &t) in times.iter().enumerate() {
        let row = &mut out[j * ns..(j + 1) * ns];
        for (jl, &w) in jumps.iter().zip(weights).take_while(|(jl, _)| jl.t < t) {
            add_gaussian(lattice, jl.pos(d), t - jl.t, w, row);
        }
    }
    out
}

/// Σ_{l<i} w_l g(T_i − T_l, X_i − X_l) for each jump i.
pub(crate) fn jump_left_limits(jumps: &[Jump], weights: &[f64], d: usize) -> Vec<f64> {
    (0..jumps.len())
        .map(|i| {
            let ji = &jumps[i];
            jumps[..i]
                .iter()
                .zip(weights)
                .map(|(jl, w)| {
                    let r2: f64 = ji.pos(d).iter().zip(jl.pos(d)).map(|(a, b)| (a - b) * (a - b)).sum();
                    w * gauss(ji.t - jl.t, r2, d)
                })
                .sum()
        })
        .collect()
}

pub(crate) fn additive_grid(
    pm: &PointMeasure,
    weights: &[f64],
    drift: f64,
    hom: &Homogeneous,
    _engine: KernelEngine,
    grid: &EvalGrid,
) -> Result<Vec<f64>> {
    let ns = grid.lattice.len();
    let mut values = jump_grid(&pm.jumps, weights, &grid.times, &grid.lattice);
    for (j, &t) in grid.times.iter().enumerate() {
        let row = &mut values[j * ns..(j + 1) * ns];
        for (o, v) in row.iter_mut().zip(homogeneous_slice(hom, t, &grid.lattice)) {
            *o += v + drift * t;
        }
    }
    Ok(values)
}

/// Discrete heat semigroup on a lattice: per-axis Gaussian weights normalized to
/// sum to one, so constants are preserved as on ℝ^d.
pub(crate) struct LatticeSemigroup {
    // per axis: row-major (n × n) weight matrix
    mats: Vec<Vec<f64>>,
}

impl LatticeSemigroup {
    pub fn new(lattice: &Lattice, lag: f64) -> Self {
        let mats = lattice
            .axes
            .iter()
            .map(|axis| {
                let n = axis.len();
                let mut m = vec![0.0; n * n];
                for (i, xi) in axis.iter().enumerate() {
                    let row = &mut m[i * n..(i + 1) * n];
                    if lag <= 0.0 {
                        row[i] = 1.0;
                        continue;
                    }
                    // trapezoid cell widths make the weights a quadrature of g
                    for (k, xk) in axis.iter().enumerate() {
                        let h = cell_width(axis, k);
                        let e = (xi - xk) * (xi - xk) / (4.0 * lag);
                        // drop weights below e^{−40} relative to the centre
                        row[k] = if e > 40.0 { 0.0 } else { h * (-e).exp() };
                    }
                    let s: f64 = row.iter().sum();
                    if s > 0.0 {
                        row.iter_mut().for_each(|v| *v /= s);
                    } else {
                        row[i] = 1.0;
                    }
                }
                m
            })
            .collect();
        LatticeSemigroup { mats }
    }

    pub fn apply(&self, lattice: &Lattice, f: &[f64]) -> Vec<f64> {
        let mut cur = f.to_vec();
        let dims: Vec<usize> = lattice.axes.iter().map(Vec::len).collect();
        for (a, mat) in self.mats.iter().enumerate() {
            let n = dims[a];
            let inner: usize = dims[a + 1..].iter().product();
            let outer: usize = dims[..a].iter().product();
            let mut next = vec![0.0; cur.len()];
            for o in 0..outer {
                for i in 0..n {
                    let row = &mat[i * n..(i + 1) * n];
                    for (k, w) in row.iter().enumerate() {
                        if *w == 0.0 {
                            continue;
                        }
                        let src = (o * n + k) * inner;
                        let dst = (o * n + i) * inner;
                        for q in 0..inner {
                            next[dst + q] += w * cur[src + q];
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

fn cell_width(axis: &[f64], k: usize) -> f64 {
    let n = axis.len();
    if n == 1 {
        return 1.0;
    }
    let left = if k > 0 { axis[k] - axis[k - 1] } else { 0.0 };
    let right = if k + 1 < n { axis[k + 1] - axis[k] } else { 0.0 };
    0.5 * (left + right)
}

/// Multilinear interpolation of lattice values at `x` (clamped to the lattice hull).
pub(crate) fn interpolate(lattice: &Lattice, values: &[f64], x: &[f64]) -> f64 {
    let d = lattice.dim();
    let mut idx = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for a in 0..d {
        let axis = &lattice.axes[a];
        if axis.len() == 1 {
            continue;
        }
        let v = x[a].clamp(axis[0], *axis.last().unwrap());
        let i = axis.partition_point(|&p| p <= v).saturating_sub(1).min(axis.len() - 2);
        idx[a] = i;
        frac[a] = (v - axis[i]) / (axis[i + 1] - axis[i]);
    }
    let mut total = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut flat = 0;
        for a in 0..d {
            let n = lattice.axes[a].len();
            let up = (corner >> a) & 1 == 1;
            if up && n == 1 {
                w = 0.0;
                break;
            }
            w *= if up { frac[a] } else { 1.0 - frac[a] };
            flat = flat * n + idx[a] + usize::from(up);
        }
        if w != 0.0 {
            total += w * values[flat];
        }
    }
    total
}
