use std::f64::consts::PI;

use serde::Serialize;

use super::fourier::{delta_fourier, fourier_coeffs, TUKEY_ALPHA};
use super::{delta_coeffs, delta_divergent, delta_tail_bound, fill_sines, sine_coeffs_fn, sine_coeffs_samples, CoeffVector};
use crate::error::{Error, Result};
use crate::noise::Jump;
use crate::solver::{FieldGrid, InitialCondition, SolveKind};

/// ‖u(T_i) − u(T_i−)‖_{H_r} for one jump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpAnnotation {
    pub index: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub weight: f64,
    pub size: f64,
}

/// t ↦ ‖u(t, ·)‖_{H_r} along the grid times.
#[derive(Clone, Debug, Serialize)]
pub struct SobolevTrajectory {
    pub basis: &'static str,
    pub r: f64,
    pub n_max: usize,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub jump_annotations: Vec<JumpAnnotation>,
    /// δ ∉ H_r: jump sizes and frames holding atoms are truncation-dependent.
    pub divergent: bool,
    /// Bound on the omitted tail of each squared delta norm (sine basis).
    #[serde(serialize_with = "crate::util::ser_f64_ext")]
    pub delta_tail_bound: f64,
    /// Tukey taper used on boxes.
    pub window: Option<f64>,
    #[serde(skip)]
    pub frames: Vec<CoeffVector>,
}

/// Exact sine coefficients of V + Σ_{T_i≤t} w_i G(t−T_i; ·, X_i) + β w(t, ·) at the
/// sorted `times`, truncated at n_max. Jumps at T_i = t are included, so frames
/// are right-continuous.
pub fn sine_frames(
    jumps: &[Jump],
    weights: &[f64],
    u0: &InitialCondition,
    beta: f64,
    times: &[f64],
    n_max: usize,
) -> Result<Vec<CoeffVector>> {
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::precondition("frame times must be sorted"));
    }
    let phi = (2.0 / PI).sqrt();
    let u0_coeffs: Option<Vec<f64>> = match u0 {
        InitialCondition::Zero => None,
        InitialCondition::Constant { c } if *c == 0.0 => None,
        InitialCondition::Constant { .. } => {
            return Err(Error::config("nonzero constant u0 does not vanish on the interval boundary"))
        }
        InitialCondition::SineMode { k, amplitude } => {
            let mut v = vec![0.0; n_max];
            if (*k as usize) <= n_max {
                v[*k as usize - 1] = amplitude * (PI / 2.0).sqrt();
            }
            Some(v)
        }
        InitialCondition::Custom(c) => {
            let f = c.f.clone();
            match sine_coeffs_fn(move |x| f(&[x]), n_max)? {
                CoeffVector::Sine { coeffs } => Some(coeffs),
                CoeffVector::Fourier { .. } => unreachable!(),
            }
        }
    };
    let mut s = vec![0.0; n_max];
    let mut t_cur = 0.0;
    let mut next = 0;
    let mut sines = vec![0.0; n_max];
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > t_cur {
            for (k, v) in s.iter_mut().enumerate() {
                let kf = (k + 1) as f64;
                *v *= (-kf * kf * (t - t_cur)).exp();
            }
            t_cur = t;
        }
        while next < jumps.len() && jumps[next].t <= t {
            let lag = t - jumps[next].t;
            fill_sines(jumps[next].x[0], &mut sines);
            for (k, (v, sn)) in s.iter_mut().zip(&sines).enumerate() {
                let kf = (k + 1) as f64;
                *v += weights[next] * phi * sn * (-kf * kf * lag).exp();
            }
            next += 1;
        }
        let mut frame = s.clone();
        if let Some(a) = &u0_coeffs {
            for (k, (f, a)) in frame.iter_mut().zip(a).enumerate() {
                let kf = (k + 1) as f64;
                *f += a * (-kf * kf * t).exp();
            }
        }
        if beta != 0.0 {
            // ∫₀^π Φ_k = √(2/π)·2/k for odd k
            for k in (1..=n_max).step_by(2) {
                let kf = k as f64;
                frame[k - 1] += beta * phi * (2.0 / kf) * (-(-kf * kf * t).exp_m1()) / (kf * kf);
            }
        }
        out.push(CoeffVector::Sine { coeffs: frame });
    }
    Ok(out)
}

/// Closed-form sine frames of an additive interval solution at `times`.
pub fn additive_sine_coeffs(fg: &FieldGrid, times: &[f64], n_max: usize) -> Result<Vec<CoeffVector>> {
    if !fg.region().is_interval() {
        return Err(Error::precondition("sine coefficients need the interval domain"));
    }
    if fg.generation.kind != SolveKind::Additive {
        return Err(Error::precondition("closed-form coefficients exist only for additive (constant sigma) fields"));
    }
    let c = fg.generation.sigma.constant_value().unwrap_or(1.0);
    sine_frames(&fg.pm.jumps, &fg.weights, &fg.generation.u0, c * fg.generation.drift, times, n_max)
}

/// H_r trajectory of a solved field.
///
/// Interval fields use sine frames, exact for additive fields and transformed
/// from the grid otherwise; box fields use the windowed grid Fourier transform.
pub fn trajectory_from_field(fg: &FieldGrid, r: f64, n_max: usize) -> Result<SobolevTrajectory> {
    let region = fg.region();
    let dim = region.dim();
    let (t0, t1) = (fg.times[0], *fg.times.last().unwrap());
    let in_range: Vec<usize> = (0..fg.pm.len()).filter(|&i| (t0..=t1).contains(&fg.pm.jumps[i].t)).collect();
    let (frames, basis, window) = if region.is_interval() {
        let frames = if fg.generation.kind == SolveKind::Additive {
            additive_sine_coeffs(fg, &fg.times, n_max)?
        } else {
            let mut frames = Vec::with_capacity(fg.times.len());
            for j in 0..fg.times.len() {
                let mut cv = sine_coeffs_samples(fg.slice(j), n_max)?;
                for a in fg.atoms.iter().filter(|a| a.time_index == j) {
                    cv = cv.sub(&delta_coeffs(a.x[0], n_max)?.scale(-a.weight))?;
                }
                frames.push(cv);
            }
            frames
        };
        (frames, "sine", None)
    } else {
        let mut frames = Vec::with_capacity(fg.times.len());
        for j in 0..fg.times.len() {
            let mut cv = fourier_coeffs(&fg.lattice, fg.slice(j), TUKEY_ALPHA)?;
            for a in fg.atoms.iter().filter(|a| a.time_index == j) {
                cv = cv.sub(&delta_fourier(&fg.lattice, &a.x, -a.weight, TUKEY_ALPHA)?)?;
            }
            frames.push(cv);
        }
        (frames, "fourier_grid", Some(TUKEY_ALPHA))
    };
    let norms = frames.iter().map(|f| f.hr_norm_sq(r).sqrt()).collect();
    let mut jump_annotations = Vec::with_capacity(in_range.len());
    for i in in_range {
        let j = &fg.pm.jumps[i];
        let x = j.pos(dim).to_vec();
        let w = fg.weights[i];
        let size = if region.is_interval() {
            if j.x[0] <= 0.0 || j.x[0] >= PI {
                0.0
            } else {
                w.abs() * delta_coeffs(j.x[0], n_max)?.hr_norm_sq(r).sqrt()
            }
        } else {
            delta_fourier(&fg.lattice, &x, w, TUKEY_ALPHA)?.hr_norm_sq(r).sqrt()
        };
        jump_annotations.push(JumpAnnotation { index: i, t: j.t, x, weight: w, size });
    }
    Ok(SobolevTrajectory {
        basis,
        r,
        n_max,
        times: fg.times.clone(),
        norms,
        jump_annotations,
        divergent: delta_divergent(r, dim),
        delta_tail_bound: if region.is_interval() { delta_tail_bound(r, n_max) } else { f64::NAN },
        window,
        frames,
    })
}

impl SobolevTrajectory {
    /// CSV `t,norm_r` (one column per trajectory when several share the times).
    pub fn to_csv(trajectories: &[&SobolevTrajectory]) -> Result<String> {
        let Some(first) = trajectories.first() else {
            return Err(Error::precondition("no trajectories to export"));
        };
        if trajectories.iter().any(|t| t.times != first.times) {
            return Err(Error::precondition("trajectories do not share their times"));
        }
        let mut out = String::from("t");
        for t in trajectories {
            out.push_str(&format!(",norm_{}", crate::util::fmt_f64(t.r)));
        }
        out.push('\n');
        for (j, t) in first.times.iter().enumerate() {
            out.push_str(&crate::util::fmt_f64(*t));
            for tr in trajectories {
                out.push(',');
                out.push_str(&crate::util::fmt_f64(tr.norms[j]));
            }
            out.push('\n');
        }
        Ok(out)
    }
}
