//! Lévy measures ν on ℝ∖{0}: parametric families, moment integrals,
//! Blumenthal–Getoor index and the integrability hypotheses used for
//! existence on ℝ^d and on bounded domains.

mod hypothesis;
mod moments;
mod serde_impl;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hypothesis::{check_hypothesis_h, check_hypothesis_h_prime, find_admissible_pq, HypothesisReport};
pub use moments::{blumenthal_getoor_bisection, Integral};

/// Distribution of a single jump for compound Poisson noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    Dirac { value: f64 },
    /// ±scale with probability 1/2 each.
    Rademacher { scale: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(format!("jump_law: {m}")));
        match self {
            JumpLaw::Dirac { value } => {
                if !value.is_finite() || *value == 0.0 {
                    return bad("dirac value must be finite and non-zero (ν({0}) = 0)");
                }
            }
            JumpLaw::Rademacher { scale } => {
                if !scale.is_finite() || *scale <= 0.0 {
                    return bad("rademacher scale must be positive");
                }
            }
            JumpLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return bad("uniform needs finite low < high");
                }
            }
            JumpLaw::Normal { mean, std } => {
                if !(mean.is_finite() && std.is_finite() && *std > 0.0) {
                    return bad("normal needs finite mean and std > 0");
                }
            }
            JumpLaw::Discrete { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return bad("discrete needs equally long non-empty values/weights");
                }
                if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
                    return bad("discrete values must be finite and non-zero (ν({0}) = 0)");
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                    return bad("discrete weights must be non-negative with positive sum");
                }
            }
        }
        Ok(())
    }
}

/// A user supplied Lévy density on `support = (lo, hi)`, `lo < 0 < hi` or one-sided.
#[derive(Clone)]
pub struct CustomDensity {
    pub name: String,
    pub density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub support: (f64, f64),
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum LevyKind {
    /// ν(dz) = c₊ z^{−1−α} dz on z > 0 and c₋ |z|^{−1−α} dz on z < 0.
    Stable { alpha: f64, c_plus: f64, c_minus: f64 },
    /// Stable density damped by e^{−λ|z|}.
    TemperedStable { alpha: f64, lambda: f64, c_plus: f64, c_minus: f64 },
    /// ν(dz) = shape · z^{−1} e^{−rate·z} dz on z > 0.
    Gamma { shape: f64, rate: f64 },
    /// ν = total_mass · law.
    CompoundPoisson { total_mass: f64, jump_law: JumpLaw },
    Custom(CustomDensity),
}

/// Parametric Lévy measure together with the drift `b` of the noise.
#[derive(Clone, Debug)]
pub struct LevyMeasureSpec {
    pub kind: LevyKind,
    pub b: f64,
    /// Free-form note on the behavior of f near 0 when ν(dz) = f(z)|z|^{−α−1}dz.
    pub f_at_zero: Option<String>,
}

impl LevyMeasureSpec {
    pub fn new(kind: LevyKind) -> Result<Self> {
        let s = LevyMeasureSpec { kind, b: 0.0, f_at_zero: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_drift(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    /// Symmetric α-stable measure with c₊ = c₋ = 1.
    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(LevyKind::Stable { alpha, c_plus: 1.0, c_minus: 1.0 })
    }

    pub fn stable_asym(alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        Self::new(LevyKind::Stable { alpha, c_plus, c_minus })
    }

    pub fn tempered_stable(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(LevyKind::TemperedStable { alpha, lambda, c_plus: 1.0, c_minus: 1.0 })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(LevyKind::Gamma { shape, rate })
    }

    pub fn compound_poisson(total_mass: f64, jump_law: JumpLaw) -> Result<Self> {
        Self::new(LevyKind::CompoundPoisson { total_mass, jump_law })
    }

    pub fn custom(
        name: impl Into<String>,
        support: (f64, f64),
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(LevyKind::Custom(CustomDensity {
            name: name.into(),
            density: Arc::new(density),
            support,
        }))
    }

    /// Stability index where the family has one.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            LevyKind::Stable { alpha, .. } | LevyKind::TemperedStable { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            LevyKind::Stable { .. } => "stable",
            LevyKind::TemperedStable { .. } => "tempered_stable",
            LevyKind::Gamma { .. } => "gamma",
            LevyKind::CompoundPoisson { .. } => "compound_poisson",
            LevyKind::Custom(_) => "custom",
        }
    }

    /// True when ν is a finite measure.
    pub fn is_finite_activity(&self) -> bool {
        matches!(self.kind, LevyKind::CompoundPoisson { .. })
    }

    /// True when ν(−A) = ν(A) for all A, so odd moments over symmetric windows vanish.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            LevyKind::Stable { c_plus, c_minus, .. } | LevyKind::TemperedStable { c_plus, c_minus, .. } => {
                c_plus == c_minus
            }
            LevyKind::Gamma { .. } => false,
            LevyKind::CompoundPoisson { jump_law, .. } => match jump_law {
                JumpLaw::Rademacher { .. } => true,
                JumpLaw::Uniform { low, high } => *low == -*high,
                JumpLaw::Normal { mean, .. } => *mean == 0.0,
                _ => false,
            },
            LevyKind::Custom(_) => false,
        }
    }

    /// Check the Lévy-measure axioms and the family's parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::config("drift b must be finite"));
        }
        let stable_params = |alpha: f64, cp: f64, cm: f64| -> Result<()> {
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::config(format!("stability index must lie in (0, 2), got {alpha}")));
            }
            if !(cp >= 0.0 && cm >= 0.0 && cp.is_finite() && cm.is_finite()) || cp + cm == 0.0 {
                return Err(Error::config("c_plus, c_minus must be non-negative and not both zero"));
            }
            Ok(())
        };
        match &self.kind {
            LevyKind::Stable { alpha, c_plus, c_minus } => stable_params(*alpha, *c_plus, *c_minus),
            LevyKind::TemperedStable { alpha, lambda, c_plus, c_minus } => {
                stable_params(*alpha, *c_plus, *c_minus)?;
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::config("tempering rate lambda must be positive"));
                }
                Ok(())
            }
            LevyKind::Gamma { shape, rate } => {
                if !(shape.is_finite() && *shape > 0.0 && rate.is_finite() && *rate > 0.0) {
                    return Err(Error::config("gamma shape and rate must be positive"));
                }
                Ok(())
            }
            LevyKind::CompoundPoisson { total_mass, jump_law } => {
                if !(total_mass.is_finite() && *total_mass > 0.0) {
                    return Err(Error::config("compound Poisson total_mass must be positive and finite"));
                }
                jump_law.validate()
            }
            LevyKind::Custom(c) => {
                let (lo, hi) = c.support;
                if !(lo <= 0.0 && hi >= 0.0 && lo < hi) {
                    return Err(Error::config("custom support must contain 0 in its closure"));
                }
                // ∫ (z² ∧ 1) ν(dz) < ∞
                if !moments::small_abs_moment(self, 2.0)?.is_finite() {
                    return Err(Error::config(format!(
                        "custom density '{}' is not a Lévy measure: ∫_{{|z|≤1}} z² ν(dz) diverges",
                        c.name
                    )));
                }
                if !moments::large_abs_moment(self, 0.0)?.is_finite() {
                    return Err(Error::config(format!(
                        "custom density '{}' is not a Lévy measure: ν(|z|>1) is infinite",
                        c.name
                    )));
                }
                Ok(())
            }
        }
    }

    /// ∫_{|z|≤1} |z|^p ν(dz).
    pub fn small_jump_moment(&self, p: f64) -> Result<Integral> {
        if !(p > 0.0) {
            return Err(Error::precondition(format!("small_jump_moment needs p > 0, got {p}")));
        }
        moments::small_abs_moment(self, p)
    }

    /// ∫_{|z|>1} |z|^q ν(dz).
    pub fn large_jump_moment(&self, q: f64) -> Result<Integral> {
        if !(q > 0.0) {
            return Err(Error::precondition(format!("large_jump_moment needs q > 0, got {q}")));
        }
        moments::large_abs_moment(self, q)
    }

    /// ν({|z| > ε}).
    pub fn tail_mass(&self, eps: f64) -> Result<Integral> {
        moments::tail_mass(self, eps)
    }

    /// ∫_{a<|z|≤b} z ν(dz) for 0 ≤ a < b ≤ ∞.
    pub fn signed_first_moment(&self, a: f64, b: f64) -> Result<Integral> {
        moments::signed_first_moment(self, a, b)
    }

    /// ∫_{a<|z|≤b} |z|^p ν(dz) for 0 ≤ a < b ≤ ∞.
    pub fn abs_moment_window(&self, p: f64, a: f64, b: f64) -> Result<Integral> {
        moments::abs_moment_window(self, p, a, b)
    }

    /// b₀ = b − ∫_{|z|≤1} z ν(dz), defined when ∫_{|z|≤1}|z| ν(dz) < ∞.
    pub fn b0(&self) -> Result<Option<f64>> {
        match self.signed_first_moment(0.0, 1.0)? {
            Integral::Finite(m) => Ok(Some(self.b - m)),
            Integral::Divergent => Ok(None),
        }
    }

    /// inf{p > 0 : ∫_{|z|≤1}|z|^p ν(dz) < ∞}.
    pub fn blumenthal_getoor_index(&self) -> Result<f64> {
        match self.kind {
            LevyKind::Stable { alpha, .. } | LevyKind::TemperedStable { alpha, .. } => Ok(alpha),
            LevyKind::Gamma { .. } | LevyKind::CompoundPoisson { .. } => Ok(0.0),
            LevyKind::Custom(_) => blumenthal_getoor_bisection(self, 1e-6),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(LevyMeasureSpec::stable(2.0).is_err());
        assert!(LevyMeasureSpec::stable(0.0).is_err());
        assert!(LevyMeasureSpec::stable_asym(1.0, 0.0, 0.0).is_err());
        assert!(LevyMeasureSpec::gamma(-1.0, 1.0).is_err());
        assert!(LevyMeasureSpec::compound_poisson(1.0, JumpLaw::Dirac { value: 0.0 }).is_err());
        assert!(LevyMeasureSpec::custom("too singular", (-1.0, 1.0), |z: f64| z.abs().powf(-3.5)).is_err());
    }

    #[test]
    fn symmetry_detection() {
        assert!(LevyMeasureSpec::stable(0.5).unwrap().is_symmetric());
        assert!(!LevyMeasureSpec::stable_asym(0.5, 1.0, 0.0).unwrap().is_symmetric());
        assert!(LevyMeasureSpec::compound_poisson(1.0, JumpLaw::Rademacher { scale: 1.0 })
            .unwrap()
            .is_symmetric());
    }
}
