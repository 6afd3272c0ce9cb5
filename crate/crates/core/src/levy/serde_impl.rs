use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::{JumpLaw, LevyKind, LevyMeasureSpec};

// Flat wire form; which fields are allowed depends on `kind`.
#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Raw {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jump_law: Option<JumpLaw>,
    #[serde(default)]
    b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_at_zero: Option<String>,
}

impl Serialize for LevyMeasureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut raw = Raw {
            kind: self.kind_name().to_string(),
            b: self.b,
            f_at_zero: self.f_at_zero.clone(),
            ..Default::default()
        };
        match &self.kind {
            LevyKind::Stable { alpha, c_plus, c_minus } => {
                raw.alpha = Some(*alpha);
                raw.c_plus = Some(*c_plus);
                raw.c_minus = Some(*c_minus);
            }
            LevyKind::TemperedStable { alpha, lambda, c_plus, c_minus } => {
                raw.alpha = Some(*alpha);
                raw.lambda = Some(*lambda);
                raw.c_plus = Some(*c_plus);
                raw.c_minus = Some(*c_minus);
            }
            LevyKind::Gamma { shape, rate } => {
                raw.shape = Some(*shape);
                raw.rate = Some(*rate);
            }
            LevyKind::CompoundPoisson { total_mass, jump_law } => {
                raw.total_mass = Some(*total_mass);
                raw.jump_law = Some(jump_law.clone());
            }
            LevyKind::Custom(c) => {
                return Err(serde::ser::Error::custom(format!(
                    "custom density '{}' holds a closure and cannot be serialized",
                    c.name
                )))
            }
        }
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LevyMeasureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Raw::deserialize(d)?;
        let present = [
            ("alpha", raw.alpha.is_some()),
            ("c_plus", raw.c_plus.is_some()),
            ("c_minus", raw.c_minus.is_some()),
            ("lambda", raw.lambda.is_some()),
            ("shape", raw.shape.is_some()),
            ("rate", raw.rate.is_some()),
            ("total_mass", raw.total_mass.is_some()),
            ("jump_law", raw.jump_law.is_some()),
        ];
        let allowed: &[&str] = match raw.kind.as_str() {
            "stable" => &["alpha", "c_plus", "c_minus"],
            "tempered_stable" => &["alpha", "lambda", "c_plus", "c_minus"],
            "gamma" => &["shape", "rate"],
            "compound_poisson" => &["total_mass", "jump_law"],
            other => {
                return Err(de::Error::custom(format!(
                    "unknown levy kind '{other}' (expected stable, tempered_stable, gamma, compound_poisson)"
                )))
            }
        };
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                return Err(de::Error::custom(format!("field '{name}' is not valid for kind '{}'", raw.kind)));
            }
        }
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| de::Error::custom(format!("kind '{}' requires field '{name}'", raw.kind)))
        };
        let kind = match raw.kind.as_str() {
            "stable" => LevyKind::Stable {
                alpha: need(raw.alpha, "alpha")?,
                c_plus: raw.c_plus.unwrap_or(1.0),
                c_minus: raw.c_minus.unwrap_or(1.0),
            },
            "tempered_stable" => LevyKind::TemperedStable {
                alpha: need(raw.alpha, "alpha")?,
                lambda: need(raw.lambda, "lambda")?,
                c_plus: raw.c_plus.unwrap_or(1.0),
                c_minus: raw.c_minus.unwrap_or(1.0),
            },
            "gamma" => LevyKind::Gamma {
                shape: need(raw.shape, "shape")?,
                rate: need(raw.rate, "rate")?,
            },
            _ => LevyKind::CompoundPoisson {
                total_mass: need(raw.total_mass, "total_mass")?,
                jump_law: raw
                    .jump_law
                    .clone()
                    .ok_or_else(|| de::Error::custom("kind 'compound_poisson' requires field 'jump_law'"))?,
            },
        };
        let spec = LevyMeasureSpec { kind, b: raw.b, f_at_zero: raw.f_at_zero };
        spec.validate().map_err(de::Error::custom)?;
        Ok(spec)
    }
}
