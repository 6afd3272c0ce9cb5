//! Browser bindings: a solution heatmap on [0, π], its H_r trajectory, and
//! Green's function profiles from the three kernel engines.

use shelab::kernels::{gauss, green_interval, green_interval_image, KernelEngine, SpectralTruncation};
use shelab::levy::LevyMeasureSpec;
use shelab::noise::{sample_prm, LargeCutoff, PointMeasure, SimRegion};
use shelab::sobolev::trajectory_from_field;
use shelab::solver::{solve_picard, EvalGrid, FieldGrid, InitialCondition, PicardOptions, SigmaSpec};
use wasm_bindgen::prelude::*;

fn js(e: shelab::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// A simulated field u(t, x) on a uniform grid, row-major in time.
#[wasm_bindgen]
pub struct Field {
    nt: usize,
    nx: usize,
    horizon: f64,
    values: Vec<f64>,
    jump_t: Vec<f64>,
    jump_x: Vec<f64>,
    jump_z: Vec<f64>,
    grid: FieldGrid,
}

#[wasm_bindgen]
impl Field {
    #[wasm_bindgen(getter)]
    pub fn nt(&self) -> usize {
        self.nt
    }
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[wasm_bindgen(getter)]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
    pub fn jump_times(&self) -> Vec<f64> {
        self.jump_t.clone()
    }
    pub fn jump_positions(&self) -> Vec<f64> {
        self.jump_x.clone()
    }
    pub fn jump_sizes(&self) -> Vec<f64> {
        self.jump_z.clone()
    }

    /// ‖u(t_j)‖_{H_r} for every grid time, from n_max sine coefficients.
    pub fn sobolev_norms(&self, r: f64, n_max: usize) -> Result<Vec<f64>, JsValue> {
        Ok(trajectory_from_field(&self.grid, r, n_max).map_err(js)?.norms)
    }

    /// Times of the jumps flagged on the H_r trajectory.
    pub fn annotated_jump_times(&self, r: f64, n_max: usize) -> Result<Vec<f64>, JsValue> {
        let tr = trajectory_from_field(&self.grid, r, n_max).map_err(js)?;
        Ok(tr.jump_annotations.iter().map(|a| a.t).collect())
    }
}

fn noise(alpha: f64, eps: f64, horizon: f64, seed: u64) -> Result<PointMeasure, shelab::Error> {
    let spec = LevyMeasureSpec::stable(alpha)?;
    sample_prm(&spec, SimRegion::interval(horizon)?, eps, LargeCutoff::None, seed)
}

/// Solve on [0, T] × [0, π] with symmetric α-stable noise truncated below `eps`.
///
/// `tanh_scale` = 0 gives the additive equation; otherwise σ(u) = scale · tanh(u).
#[wasm_bindgen]
pub fn simulate(
    alpha: f64,
    eps: f64,
    horizon: f64,
    tanh_scale: f64,
    seed: u64,
    nt: usize,
    nx: usize,
) -> Result<Field, JsValue> {
    if nt * (nx + 1) > 4_000_000 {
        return Err(JsValue::from_str("grid too large for the browser"));
    }
    let pm = noise(alpha, eps, horizon, seed).map_err(js)?;
    let sigma = if tanh_scale == 0.0 { SigmaSpec::Constant { c: 1.0 } } else { SigmaSpec::tanh(tanh_scale) };
    let region = SimRegion::interval(horizon).map_err(js)?;
    let grid = EvalGrid::with_sizes(&region, nt, nx);
    let fg = solve_picard(&pm, &InitialCondition::Zero, sigma, KernelEngine::auto(), &grid, PicardOptions::default())
        .map_err(js)?;
    Ok(Field {
        nt: fg.times.len(),
        nx: fg.n_sites(),
        horizon,
        values: fg.values.clone(),
        jump_t: pm.jumps.iter().map(|j| j.t).collect(),
        jump_x: pm.jumps.iter().map(|j| j.pos(1)[0]).collect(),
        jump_z: pm.jumps.iter().map(|j| j.z).collect(),
        grid: fg,
    })
}

/// G(t; x, y) on `n` points x ∈ [0, π] as [spectral..., image..., free Gaussian...].
#[wasm_bindgen]
pub fn green_profiles(t: f64, y: f64, n: usize, modes: usize, terms: usize) -> Result<Vec<f64>, JsValue> {
    let trunc = SpectralTruncation::new(modes).map_err(js)?;
    let xs: Vec<f64> = (0..n).map(|i| std::f64::consts::PI * i as f64 / (n - 1).max(1) as f64).collect();
    let mut out = Vec::with_capacity(3 * n);
    for &x in &xs {
        out.push(green_interval(t, x, y, trunc).map_err(js)?);
    }
    for &x in &xs {
        out.push(green_interval_image(t, x, y, terms).map_err(js)?);
    }
    for &x in &xs {
        out.push(gauss(t, (x - y) * (x - y), 1));
    }
    Ok(out)
}
