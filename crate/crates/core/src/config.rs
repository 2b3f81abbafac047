//! JSON family description.
//!
//! ```json
//! {
//!   "family_kind": "additive-forced",
//!   "omega": "golden",
//!   "parameters": { "alpha": 10000, "p": 2, "forcing": "cos", "amplitude": 0.5 },
//!   "E": [-0.00055, 0.00055],
//!   "C": [0.0565, 0.9435],
//!   "constants": { "alpha": 100, "S": 3.2, "s": 2, "ell": 0.5, "L": 2 }
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::circle::{golden_mean, CircleInterval, DiophantineSpec};
use crate::error::{Error, Result};
use crate::maps::{ApProfile, FamilyConstants, Fibre, Forcing, Profile, QpfFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Rigid,
    UnforcedArnold,
    AdditiveForced,
    ForcedArnold,
    Harper,
    UserDefined,
}

/// `"golden"` or an explicit value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaField {
    Value(f64),
    Named(String),
}

impl Default for OmegaField {
    fn default() -> Self {
        OmegaField::Named("golden".into())
    }
}

impl OmegaField {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            OmegaField::Value(v) if v.is_finite() => Ok(crate::circle::reduce(*v)),
            OmegaField::Value(v) => Err(Error::NonFinite(*v)),
            OmegaField::Named(s) if s == "golden" => Ok(golden_mean()),
            OmegaField::Named(s) => Err(Error::InvalidParameter(format!("unknown omega '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    None,
    Cos,
    ArctanSin,
    ArctanStep,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<ForcingKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsField {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "S")]
    pub big_s: f64,
    #[serde(rename = "s")]
    pub small_s: f64,
    pub ell: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub family_kind: FamilyKind,
    #[serde(default)]
    pub omega: OmegaField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default)]
    pub parameters: Parameters,
    /// endpoints `[e⁻, e⁺]`, the right one possibly unwrapped
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<[f64; 2]>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsField>,
}

fn required(v: Option<f64>, what: &str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(Error::NonFinite(x)),
        None => Err(Error::InvalidParameter(format!("parameters.{what} is required"))),
    }
}

impl FamilyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("family file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family file serialises")
    }

    pub fn diophantine(&self) -> Result<DiophantineSpec> {
        let d = DiophantineSpec::golden();
        let spec = DiophantineSpec {
            omega: self.omega.resolve()?,
            gamma: self.gamma.unwrap_or(d.gamma),
            nu: self.nu.unwrap_or(d.nu),
        };
        if !(spec.gamma > 0.0) || !(spec.nu >= 1.0) {
            return Err(Error::InvalidParameter("need gamma > 0 and nu >= 1".into()));
        }
        Ok(spec)
    }

    fn forcing(&self) -> Result<Forcing> {
        let p = &self.parameters;
        Ok(match p.forcing.unwrap_or(ForcingKind::None) {
            ForcingKind::None => Forcing::None,
            ForcingKind::Cos => Forcing::Cos {
                amplitude: p.amplitude.unwrap_or(1.0),
                phase: p.phase.unwrap_or(0.0),
            },
            ForcingKind::ArctanSin => Forcing::ArctanSin {
                beta: required(p.beta, "beta")?,
            },
            ForcingKind::ArctanStep => Forcing::ArctanStep {
                beta: required(p.beta, "beta")?,
                center: p.center.unwrap_or(0.0),
                half_width: required(p.half_width, "half_width")?,
            },
        })
    }

    pub fn fibre(&self) -> Result<Fibre> {
        let p = &self.parameters;
        Ok(match self.family_kind {
            FamilyKind::Rigid => Fibre::Additive {
                profile: Profile::Identity,
                forcing: self.forcing()?,
            },
            FamilyKind::UnforcedArnold => Fibre::UnforcedArnold {
                alpha: required(p.alpha, "alpha")?,
            },
            FamilyKind::AdditiveForced => Fibre::Additive {
                profile: Profile::Ap(ApProfile::new(p.p.unwrap_or(2.0), required(p.alpha, "alpha")?)?),
                forcing: self.forcing()?,
            },
            FamilyKind::ForcedArnold => Fibre::ForcedArnold {
                alpha: required(p.alpha, "alpha")?,
                beta: required(p.beta, "beta")?,
            },
            FamilyKind::Harper => Fibre::Harper {
                lambda: required(p.lambda, "lambda")?,
            },
            FamilyKind::UserDefined => {
                let src = p
                    .expression
                    .as_deref()
                    .ok_or_else(|| Error::InvalidParameter("parameters.expression is required".into()))?;
                Fibre::user_defined(src)?
            }
        })
    }

    pub fn family_constants(&self) -> Result<Option<FamilyConstants>> {
        let (e, c, k) = match (&self.e, &self.c, &self.constants) {
            (Some(e), Some(c), Some(k)) => (e, c, k),
            (None, None, None) => return Ok(None),
            _ => {
                return Err(Error::InvalidParameter(
                    "E, C and constants must be given together".into(),
                ))
            }
        };
        let fc = FamilyConstants {
            alpha: k.alpha.or(self.parameters.alpha).ok_or_else(|| {
                Error::InvalidParameter("constants.alpha is required for this family".into())
            })?,
            p: k.p.or(self.parameters.p).unwrap_or(2.0),
            big_s: k.big_s,
            small_s: k.small_s,
            ell: k.ell,
            big_l: k.big_l,
            e: CircleInterval::from_endpoints(e[0], e[1])?,
            c: CircleInterval::from_endpoints(c[0], c[1])?,
        };
        fc.validate()?;
        Ok(Some(fc))
    }

    pub fn build(&self) -> Result<QpfFamily> {
        QpfFamily::new(self.diophantine()?, self.fibre()?, self.family_constants()?)
    }
}
