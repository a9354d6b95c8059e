//! JSON measure spec files.
//!
//! ```json
//! {"domain": "real",
//!  "atoms": [{"pos": 0.0, "mass": 0.25}],
//!  "named": {"family": "semicircle", "params": [0.0, 2.0], "nodes": 512}}
//! ```
//!
//! `named` and `grid` are mutually exclusive; either may be combined with atoms.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Domain, Measure, NamedFamily, DEFAULT_NODES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub domain: Domain,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named: Option<NamedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub pos: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSpec {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NamedSpec {
    fn family(&self) -> Result<NamedFamily> {
        let p = &self.params;
        let want = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Spec(format!(
                    "family {} takes {n} parameters, got {}",
                    self.family,
                    p.len()
                )))
            }
        };
        match self.family.to_ascii_lowercase().as_str() {
            "semicircle" => {
                want(2)?;
                Ok(NamedFamily::Semicircle { center: p[0], radius: p[1] })
            }
            "arcsine" => {
                want(2)?;
                Ok(NamedFamily::Arcsine { a: p[0], b: p[1] })
            }
            "uniform_interval" | "uniform" => {
                want(2)?;
                Ok(NamedFamily::UniformInterval { a: p[0], b: p[1] })
            }
            "haar_circle" | "haar" => {
                want(0)?;
                Ok(NamedFamily::HaarCircle)
            }
            "point" => {
                want(1)?;
                Ok(NamedFamily::Point(p[0]))
            }
            other => Err(Error::Spec(format!("unknown family '{other}'"))),
        }
    }
}

impl MeasureSpec {
    pub fn to_measure(&self) -> Result<Measure> {
        let atoms: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.pos, a.mass)).collect();
        match (&self.named, &self.grid) {
            (Some(_), Some(_)) => Err(Error::Spec("'named' and 'grid' cannot be combined".into())),
            (Some(named), None) => Measure::with_family(
                self.domain,
                &atoms,
                named.family()?,
                named.nodes.unwrap_or(DEFAULT_NODES),
            ),
            (None, Some(grid)) => {
                if grid.nodes.len() != grid.weights.len() {
                    return Err(Error::Spec(format!(
                        "grid has {} nodes but {} weights",
                        grid.nodes.len(),
                        grid.weights.len()
                    )));
                }
                let pairs: Vec<(f64, f64)> =
                    grid.nodes.iter().copied().zip(grid.weights.iter().copied()).collect();
                Measure::with_grid(self.domain, &atoms, &pairs)
            }
            (None, None) => Measure::atomic(&atoms, self.domain),
        }
    }
}

impl Measure {
    pub fn from_spec_json(text: &str) -> Result<Measure> {
        let spec: MeasureSpec =
            serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.to_measure()
    }

    pub fn from_spec_file(path: &Path) -> Result<Measure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        Measure::from_spec_json(&text)
    }
}
