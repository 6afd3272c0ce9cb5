//! Fractional Sobolev norms.
//!
//! On [0, π]: a_n(f) = √(2/π) ∫₀^π f(x) sin(nx) dx and
//! ‖f‖²_{H_r} = Σ_{n≥1} (1+n²)^r a_n(f)². A point mass δ_x has a_n = √(2/π) sin(nx)
//! and lies in H_r exactly when r < −1/2.
//!
//! On boxes the norm is the windowed grid version of ∫ (1+|ξ|²)^r |F f(ξ)|² dξ.

mod fourier;
mod skorohod;
mod trajectory;

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::dst::Dst1;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

pub use fourier::{delta_fourier, fourier_coeffs, tukey, TUKEY_ALPHA};
pub use skorohod::{skorohod_modulus, SkorohodConfig, SkorohodReport};
pub use trajectory::{additive_sine_coeffs, sine_frames, trajectory_from_field, JumpAnnotation, SobolevTrajectory};

/// Coefficients of a function or distribution in one of the two bases.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffVector {
    /// a_1, …, a_{n_max} on [0, π].
    Sine { coeffs: Vec<f64> },
    /// Unitary grid Fourier transform F̂(ξ) over the frequency lattice of a box grid.
    Fourier {
        values: Vec<Complex64>,
        /// |ξ|² for each entry.
        xi_sq: Arc<Vec<f64>>,
        /// Volume Δξ^d of one frequency cell.
        cell: f64,
        dims: Vec<usize>,
    },
}

impl CoeffVector {
    pub fn len(&self) -> usize {
        match self {
            CoeffVector::Sine { coeffs } => coeffs.len(),
            CoeffVector::Fourier { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn basis_name(&self) -> &'static str {
        match self {
            CoeffVector::Sine { .. } => "sine",
            CoeffVector::Fourier { .. } => "fourier_grid",
        }
    }

    /// self − other in the common basis.
    pub fn sub(&self, other: &CoeffVector) -> Result<CoeffVector> {
        match (self, other) {
            (CoeffVector::Sine { coeffs: a }, CoeffVector::Sine { coeffs: b }) if a.len() == b.len() => {
                Ok(CoeffVector::Sine { coeffs: a.iter().zip(b).map(|(x, y)| x - y).collect() })
            }
            (
                CoeffVector::Fourier { values: a, xi_sq, cell, dims },
                CoeffVector::Fourier { values: b, dims: d2, .. },
            ) if dims == d2 => Ok(CoeffVector::Fourier {
                values: a.iter().zip(b).map(|(x, y)| x - y).collect(),
                xi_sq: xi_sq.clone(),
                cell: *cell,
                dims: dims.clone(),
            }),
            _ => Err(Error::precondition("coefficient vectors live in different bases or sizes")),
        }
    }

    pub fn scale(&self, lambda: f64) -> CoeffVector {
        match self {
            CoeffVector::Sine { coeffs } => CoeffVector::Sine { coeffs: coeffs.iter().map(|v| lambda * v).collect() },
            CoeffVector::Fourier { values, xi_sq, cell, dims } => CoeffVector::Fourier {
                values: values.iter().map(|v| v * lambda).collect(),
                xi_sq: xi_sq.clone(),
                cell: *cell,
                dims: dims.clone(),
            },
        }
    }

    /// ‖·‖²_{H_r}.
    pub fn hr_norm_sq(&self, r: f64) -> f64 {
        match self {
            CoeffVector::Sine { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let n = (i + 1) as f64;
                    (1.0 + n * n).powf(r) * a * a
                })
                .sum(),
            CoeffVector::Fourier { values, xi_sq, cell, .. } => {
                values.iter().zip(xi_sq.iter()).map(|(v, x2)| (1.0 + x2).powf(r) * v.norm_sqr()).sum::<f64>() * cell
            }
        }
    }
}

/// ‖cv‖_{H_r}.
pub fn hr_norm(cv: &CoeffVector, r: f64) -> f64 {
    cv.hr_norm_sq(r).sqrt()
}

/// a_1..a_{n_max} of a function on [0, π] by composite Gauss–Legendre quadrature
/// resolving the highest mode.
pub fn sine_coeffs_fn<F: Fn(f64) -> f64>(f: F, n_max: usize) -> Result<CoeffVector> {
    if n_max == 0 {
        return Err(Error::precondition("n_max must be at least 1"));
    }
    let panels = (2 * n_max).max(64);
    let (gx, gw) = gauss_legendre(16);
    let h = PI / panels as f64;
    let mut coeffs = vec![0.0; n_max];
    let mut sines = vec![0.0; n_max];
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let xq = a + 0.5 * h * (x + 1.0);
            let fw = f(xq) * w * 0.5 * h;
            if fw == 0.0 {
                continue;
            }
            fill_sines(xq, &mut sines);
            for (c, s) in coeffs.iter_mut().zip(&sines) {
                *c += fw * s;
            }
        }
    }
    let norm = (2.0 / PI).sqrt();
    coeffs.iter_mut().for_each(|c| *c *= norm);
    Ok(CoeffVector::Sine { coeffs })
}

// sin(nx), n = 1..=len, by the Chebyshev recurrence
fn fill_sines(x: f64, out: &mut [f64]) {
    let c2 = 2.0 * x.cos();
    let (mut prev, mut cur) = (0.0, x.sin());
    for o in out.iter_mut() {
        *o = cur;
        let next = c2 * cur - prev;
        prev = cur;
        cur = next;
    }
}

/// a_1..a_{n_max} of samples at the sites kπ/M, k = 0..=M, by the sine transform.
pub fn sine_coeffs_samples(samples: &[f64], n_max: usize) -> Result<CoeffVector> {
    if samples.len() < 3 {
        return Err(Error::precondition("need at least three samples on [0, pi]"));
    }
    let m = samples.len() - 1;
    if n_max == 0 || n_max > m - 1 {
        return Err(Error::precondition(format!(
            "n_max = {n_max} exceeds the Nyquist limit M - 1 = {} of the sampled input",
            m - 1
        )));
    }
    let mut y = vec![0.0; m - 1];
    Dst1::new(m).apply(&samples[1..m], &mut y);
    let scale = (2.0 / PI).sqrt() * PI / m as f64;
    Ok(CoeffVector::Sine { coeffs: y[..n_max].iter().map(|v| v * scale).collect() })
}

/// Coefficients of δ_{x0}: b_n = √(2/π) sin(n x0).
pub fn delta_coeffs(x0: f64, n_max: usize) -> Result<CoeffVector> {
    if !(x0 > 0.0 && x0 < PI) {
        return Err(Error::precondition(format!("delta position must lie in (0, pi), got {x0}")));
    }
    let norm = (2.0 / PI).sqrt();
    Ok(CoeffVector::Sine { coeffs: (1..=n_max).map(|n| norm * (n as f64 * x0).sin()).collect() })
}

/// Whether δ fails to lie in H_r(ℝ^d)-type spaces: r ≥ −d/2.
pub fn delta_divergent(r: f64, d: usize) -> bool {
    r >= -0.5 * d as f64
}

/// Bound on the omitted tail Σ_{n>n_max} (1+n²)^r b_n² of a delta, b_n² ≤ 2/π.
pub fn delta_tail_bound(r: f64, n_max: usize) -> f64 {
    if delta_divergent(r, 1) {
        return f64::INFINITY;
    }
    // ∫_{n_max}^∞ s^{2r} ds
    2.0 / PI * (n_max as f64).powf(2.0 * r + 1.0) / (-2.0 * r - 1.0)
}

/// Truncated H_r norm of δ_{x0} with the divergence diagnosis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaNorm {
    pub x0: f64,
    pub r: f64,
    pub n_max: usize,
    pub partial_sq: f64,
    /// Partial sum at n_max / 1000 (or 1), for the growth comparison.
    pub coarse_partial_sq: f64,
    #[serde(serialize_with = "crate::util::ser_f64_ext")]
    pub tail_bound: f64,
    pub divergent: bool,
}

pub fn delta_norm(x0: f64, r: f64, n_max: usize) -> Result<DeltaNorm> {
    let cv = delta_coeffs(x0, n_max)?;
    let CoeffVector::Sine { coeffs } = &cv else { unreachable!() };
    let coarse_n = (n_max / 1000).max(1);
    let coarse = CoeffVector::Sine { coeffs: coeffs[..coarse_n].to_vec() };
    let partial_sq = cv.hr_norm_sq(r);
    let coarse_partial_sq = coarse.hr_norm_sq(r);
    Ok(DeltaNorm {
        x0,
        r,
        n_max,
        partial_sq,
        coarse_partial_sq,
        tail_bound: delta_tail_bound(r, n_max),
        divergent: delta_divergent(r, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_mode_coefficients() {
        let cv = sine_coeffs_fn(|x| (2.0 * x).sin(), 8).unwrap();
        let CoeffVector::Sine { coeffs } = &cv else { panic!() };
        assert_relative_eq!(coeffs[1], (PI / 2.0).sqrt(), epsilon = 1e-13);
        for (i, c) in coeffs.iter().enumerate() {
            if i != 1 {
                assert!(c.abs() < 1e-12);
            }
        }
        assert_relative_eq!(hr_norm(&cv, 0.0), (PI / 2.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(hr_norm(&cv, -1.0), (PI / 10.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn constant_function_coefficients() {
        let cv = sine_coeffs_fn(|_| 1.0, 9).unwrap();
        let CoeffVector::Sine { coeffs } = &cv else { panic!() };
        for (i, c) in coeffs.iter().enumerate() {
            let n = (i + 1) as f64;
            let exact = (2.0 / PI).sqrt() * (1.0 - (n * PI).cos()) / n;
            assert!((c - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn samples_match_callable() {
        let f = |x: f64| x * (PI - x) * (x - 1.0);
        let m = 1024;
        let samples: Vec<f64> = (0..=m).map(|k| f(PI * k as f64 / m as f64)).collect();
        let a = sine_coeffs_samples(&samples, 20).unwrap();
        let b = sine_coeffs_fn(f, 20).unwrap();
        let d = a.sub(&b).unwrap();
        assert!(hr_norm(&d, 0.0) < 1e-5);
        assert!(sine_coeffs_samples(&samples, m).is_err());
    }

    #[test]
    fn delta_norms() {
        let d = delta_norm(PI / 2.0, -1.0, 1_000_000).unwrap();
        // (2/π) Σ_{odd n} (1+n²)^{−1}
        let oracle: f64 = (0..500_000).map(|i| {
            let n = (2 * i + 1) as f64;
            2.0 / PI / (1.0 + n * n)
        }).sum();
        assert!((d.partial_sq - oracle).abs() < 1e-10);
        assert!(!d.divergent);
        let half = delta_norm(PI / 2.0, -0.5, 1_000_000).unwrap();
        assert!(half.divergent);
        assert!(half.partial_sq - half.coarse_partial_sq > 0.1);
        assert!(delta_coeffs(0.0, 3).is_err());
    }

    #[test]
    fn slow_tail_just_below_the_threshold() {
        // r = −0.6 converges, but the odd-n tail decays like n^{−0.2}
        let a = delta_norm(PI / 2.0, -0.6, 100_000).unwrap();
        let b = delta_norm(PI / 2.0, -0.6, 1_000_000).unwrap();
        let diff = b.partial_sq - a.partial_sq;
        let oracle = (1e5f64.powf(-0.2) - 1e6f64.powf(-0.2)) / (0.2 * PI);
        assert!((diff - oracle).abs() < 1e-3 * oracle, "{diff} vs {oracle}");
        assert!(diff > 0.05 && diff < a.tail_bound);
    }
}
