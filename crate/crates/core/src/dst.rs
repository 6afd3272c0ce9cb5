//! Discrete sine transform (type I) through a complex FFT of the odd extension.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Y_k = Σ_{m=1}^{M−1} f_m sin(π k m / M), k = 1..M−1, for a fixed M.
///
/// The transform is its own inverse up to the factor 2/M.
pub struct Dst1 {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Dst1 {
    /// `m` is the number of intervals; inputs and outputs have length `m − 1`.
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "DST-I needs at least two intervals");
        let fft = FftPlanner::new().plan_fft_forward(2 * m);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Dst1 { m, fft, buf: vec![Complex64::new(0.0, 0.0); 2 * m], scratch }
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    /// Apply the transform; `input.len() == output.len() == m − 1`.
    pub fn apply(&mut self, input: &[f64], output: &mut [f64]) {
        let m = self.m;
        assert_eq!(input.len(), m - 1);
        assert_eq!(output.len(), m - 1);
        self.buf[0] = Complex64::new(0.0, 0.0);
        self.buf[m] = Complex64::new(0.0, 0.0);
        for (i, &v) in input.iter().enumerate() {
            self.buf[i + 1] = Complex64::new(v, 0.0);
            self.buf[2 * m - 1 - i] = Complex64::new(-v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        // FFT of the odd extension is −2i·Y_k
        for (k, o) in output.iter_mut().enumerate() {
            *o = -0.5 * self.buf[k + 1].im;
        }
    }
}

/// Fold a mode index k ≥ 1 onto the grid with M intervals: sin(k·mπ/M) = sign·sin(r·mπ/M).
///
/// Returns `None` when the mode vanishes at every grid point.
#[inline]
pub fn fold_mode(k: usize, m: usize) -> Option<(usize, f64)> {
    let r = k % (2 * m);
    if r == 0 || r == m {
        None
    } else if r < m {
        Some((r, 1.0))
    } else {
        Some((2 * m - r, -1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(f: &[f64], m: usize) -> Vec<f64> {
        (1..m)
            .map(|k| {
                f.iter()
                    .enumerate()
                    .map(|(i, v)| v * (std::f64::consts::PI * k as f64 * (i + 1) as f64 / m as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_sum() {
        for &m in &[2usize, 5, 16, 33] {
            let f: Vec<f64> = (1..m).map(|i| (i as f64 * 0.37).cos() + 0.1 * i as f64).collect();
            let mut out = vec![0.0; m - 1];
            Dst1::new(m).apply(&f, &mut out);
            for (a, b) in out.iter().zip(naive(&f, m)) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn involution_up_to_scale() {
        let m = 64;
        let f: Vec<f64> = (1..m).map(|i| ((i * i) as f64).sin()).collect();
        let mut d = Dst1::new(m);
        let mut y = vec![0.0; m - 1];
        let mut back = vec![0.0; m - 1];
        d.apply(&f, &mut y);
        d.apply(&y, &mut back);
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b * 2.0 / m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn folding_reproduces_high_modes() {
        let m = 8;
        for k in 1..40 {
            for j in 1..m {
                let x = std::f64::consts::PI * j as f64 / m as f64;
                let direct = (k as f64 * x).sin();
                let folded = fold_mode(k, m).map_or(0.0, |(r, s)| s * (r as f64 * x).sin());
                assert!((direct - folded).abs() < 1e-12, "k={k} j={j}");
            }
        }
    }
}
