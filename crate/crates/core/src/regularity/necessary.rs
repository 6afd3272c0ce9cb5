//! I(ε) = ∫_ε^t ∫_{ℝ^d} (sup_{x ∈ B_{x0}(δ)} g(s, x − y))^α dy ds.
//!
//! The sup over the ball is g(s, (|y − x0| − δ)_+), so the inner integral is radial:
//! A(s) = (4πs)^{−αd/2} [|B_δ| + |S^{d−1}| ∫₀^∞ (ρ+δ)^{d−1} e^{−αρ²/(4s)} dρ],
//! with the Gaussian moments in closed form. Near s = 0, A(s) ~ s^{−αd/2}, so I(ε)
//! diverges logarithmically at α = 2/d and like ε^{1−αd/2} above.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::special::gamma;
use crate::stats::ols;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NecessaryConditionParams {
    pub alpha: f64,
    pub d: usize,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_cutoffs")]
    pub inner_cutoffs: Vec<f64>,
}

fn default_delta() -> f64 {
    1.0
}
fn default_t() -> f64 {
    1.0
}
/// 10^{−4}, 10^{−4.5}, …, 10^{−10}: far enough in that the O(√ε) and O(ε) corrections
/// are negligible next to the divergent term.
pub fn default_cutoffs() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-4.0 - 0.5 * k as f64)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthLaw {
    Logarithmic,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogFit {
    /// I ≈ intercept + slope · ln(1/ε)
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub aic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    /// I ≈ prefactor · ε^exponent
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub aic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub alpha: f64,
    pub d: usize,
    pub delta: f64,
    pub t: f64,
    pub cutoffs: Vec<f64>,
    pub values: Vec<f64>,
    pub log_fit: LogFit,
    pub power_fit: PowerFit,
    /// The law with the smaller AIC; both AICs use residuals on the scale of I.
    pub preferred: GrowthLaw,
}

/// A(s) = ∫ (sup_{x∈B_δ} g(s, x − y))^α dy.
pub fn ball_sup_integral(s: f64, alpha: f64, d: usize, delta: f64) -> f64 {
    let df = d as f64;
    let a = alpha / (4.0 * s);
    let ball = PI.powf(0.5 * df) / gamma(0.5 * df + 1.0) * delta.powi(d as i32);
    let sphere = 2.0 * PI.powf(0.5 * df) / gamma(0.5 * df);
    // ∫₀^∞ (ρ+δ)^{d−1} e^{−aρ²} dρ = Σ_k C(d−1,k) δ^{d−1−k} Γ((k+1)/2) / (2 a^{(k+1)/2})
    let mut shell = 0.0;
    let mut binom = 1.0;
    for k in 0..d {
        let kf = k as f64;
        shell += binom * delta.powi((d - 1 - k) as i32) * gamma(0.5 * (kf + 1.0)) / (2.0 * a.powf(0.5 * (kf + 1.0)));
        binom = binom * (df - 1.0 - kf) / (kf + 1.0);
    }
    (4.0 * PI * s).powf(-0.5 * alpha * df) * (ball + sphere * shell)
}

/// I(ε) for each inner cutoff, with logarithmic and power fits of the growth.
pub fn necessary_condition_integral(
    alpha: f64,
    d: usize,
    ball: (&[f64], f64),
    t: f64,
    inner_cutoffs: &[f64],
) -> Result<DivergenceReport> {
    if d == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    let df = d as f64;
    let upper = (1.0 + 2.0 / df).min(2.0);
    if !(alpha >= 2.0 / df && alpha < upper) {
        return Err(Error::config(format!(
            "alpha = {alpha} is outside [2/d, min(1 + 2/d, 2)) = [{}, {upper}); the integral converges or the regime does not apply",
            2.0 / df
        )));
    }
    let (x0, delta) = ball;
    if x0.len() != d || !(delta > 0.0) || !(t > 0.0) {
        return Err(Error::config("need a center in R^d, delta > 0 and t > 0"));
    }
    if inner_cutoffs.len() < 3 || inner_cutoffs.iter().any(|e| !(*e > 0.0 && *e < t)) {
        return Err(Error::config("need at least three cutoffs in (0, t)"));
    }
    let values: Vec<f64> = inner_cutoffs
        .iter()
        .map(|&eps| {
            // s = e^u spreads the singular end over a finite range
            integrate(|u| { let s = u.exp(); ball_sup_integral(s, alpha, d, delta) * s }, eps.ln(), t.ln(), 1e-12, 0.0)
                .map(|(v, _)| v)
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let x: Vec<f64> = inner_cutoffs.iter().map(|e| -e.ln()).collect();
    let lf = ols(&x, &values);
    let aic = |rss: f64| n * (rss / n).ln() + 4.0;
    let log_fit = LogFit { slope: lf.slope, intercept: lf.intercept, r_squared: lf.r_squared, aic: aic(lf.rss) };
    let ln_e: Vec<f64> = inner_cutoffs.iter().map(|e| e.ln()).collect();
    let ln_i: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let pf = ols(&ln_e, &ln_i);
    let prefactor = pf.intercept.exp();
    let rss_pow: f64 = inner_cutoffs
        .iter()
        .zip(&values)
        .map(|(e, v)| (v - prefactor * e.powf(pf.slope)).powi(2))
        .sum();
    let power_fit = PowerFit { exponent: pf.slope, prefactor, r_squared: pf.r_squared, aic: aic(rss_pow) };
    let preferred = if log_fit.aic <= power_fit.aic { GrowthLaw::Logarithmic } else { GrowthLaw::Power };
    Ok(DivergenceReport {
        alpha,
        d,
        delta,
        t,
        cutoffs: inner_cutoffs.to_vec(),
        values,
        log_fit,
        power_fit,
        preferred,
    })
}

impl DivergenceReport {
    /// CSV `eps,integral`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,integral\n");
        for (e, v) in self.cutoffs.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", crate::util::fmt_f64(*e), crate::util::fmt_f64(*v)));
        }
        out
    }
}
