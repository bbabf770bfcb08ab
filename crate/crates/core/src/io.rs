//! File formats: profile JSON, table import, and shared float formatting.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Chebyshev;
use crate::profile::{to_besse, BesseForm, BesseShape, Profile, TableProfile, DEFAULT_NODES};

pub const PROFILE_FORMAT: &str = "revspec-profile-v1";

/// A float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Besse block of a profile file. Exactly one field is expected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BesseJson {
    /// Monomial coefficients of `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// Chebyshev coefficients of `q` on [-1, 1], where `f = 1 + (1 − x²) q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_chebyshev: Option<Vec<f64>>,
    /// Axis ratio of an ellipsoid of revolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spheroid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub r: Vec<f64>,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub besse: Option<BesseJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

impl ProfileJson {
    pub fn from_profile(p: &Profile) -> Self {
        let b = p.besse();
        let besse = match &b.shape {
            BesseShape::Polynomial(_) => BesseJson {
                coeffs: b.f_coeffs(),
                ..Default::default()
            },
            BesseShape::Chebyshev(c) => BesseJson {
                q_chebyshev: Some(c.coeffs().to_vec()),
                ..Default::default()
            },
            BesseShape::Spheroid(c) => BesseJson {
                spheroid: Some(*c),
                ..Default::default()
            },
        };
        Self {
            format: Some(PROFILE_FORMAT.to_string()),
            tag: Some(b.tag.clone()),
            besse: Some(besse),
            table: None,
            nodes: Some(p.nodes()),
        }
    }

    pub fn to_profile(&self) -> Result<Profile> {
        if let Some(f) = &self.format {
            if f != PROFILE_FORMAT {
                return Err(Error::input(format!("unsupported profile format '{f}'")));
            }
        }
        let nodes = self.nodes.unwrap_or(DEFAULT_NODES);
        let tag = self.tag.clone().unwrap_or_else(|| "file".to_string());
        let besse = match (&self.besse, &self.table) {
            (Some(b), None) => besse_from_json(b, &tag)?,
            (None, Some(t)) => {
                let mut b = to_besse(&TableProfile::new(&t.r, &t.a)?)?;
                b.tag = tag;
                b
            }
            _ => return Err(Error::input("profile file needs exactly one of 'besse' or 'table'")),
        };
        besse.validate()?;
        Profile::from_besse(besse, nodes)
    }
}

fn besse_from_json(b: &BesseJson, tag: &str) -> Result<BesseForm> {
    match (&b.coeffs, &b.q_chebyshev, b.spheroid) {
        (Some(c), None, None) => BesseForm::from_f_coeffs(c, tag),
        (None, Some(c), None) => {
            if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::input("q_chebyshev must be finite and nonempty"));
            }
            Ok(BesseForm::chebyshev(Chebyshev::new(c.clone(), -1.0, 1.0), tag))
        }
        (None, None, Some(c)) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::input("spheroid ratio must be positive"));
            }
            Ok(BesseForm::spheroid(c))
        }
        _ => Err(Error::input(
            "besse block needs exactly one of 'coeffs', 'q_chebyshev', 'spheroid'",
        )),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<Profile> {
    read_json::<ProfileJson>(path)?.to_profile()
}

pub fn write_profile(path: &Path, p: &Profile) -> Result<()> {
    write_json(path, &ProfileJson::from_profile(p))
}
