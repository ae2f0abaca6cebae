//! JSON chain files.
//!
//! ```json
//! {"name": "L", "vertices": [[0, 0], [1, 0], [1, 1]]}
//! {"lengths": [1, 1], "angles": [3.141592653589793], "pose": {"origin": [0, 0], "heading": 0}}
//! ```
//!
//! Angles are radians. Unknown fields are rejected, so a stray
//! `"degrees": true` or `"angles_deg"` is an error rather than a silent
//! misreading.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Chain, ChainError, Pose};
use crate::geometry::{Point, Tolerance};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot parse chain document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("chain document must give either `vertices` or `lengths` with `angles`, not both")]
    BothRepresentations,
    #[error("chain document gives neither `vertices` nor `lengths` with `angles`")]
    NoRepresentation,
    #[error("clearance must be finite and positive, got {0}")]
    BadClearance(f64),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Overrides the caller's default clearance for this chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Point<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    /// Bend angles in radians, one per interior joint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    /// Placement for the lengths form; defaults to the origin heading along +x.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<Pose<f64>>,
}

/// Which representation [`ChainDocument::from_chain`] writes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Representation {
    #[default]
    Vertices,
    LengthsAngles,
}

impl ChainDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| DocumentError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DocumentError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| DocumentError::Io { path: path.display().to_string(), source })
    }

    /// Pretty JSON with one vertex (or one number list) per line.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("document serializes");
        let mut out = String::from("{\n");
        let fields = value.as_object().expect("document is an object");
        for (k, (key, v)) in fields.iter().enumerate() {
            let sep = if k + 1 == fields.len() { "" } else { "," };
            let body = match v {
                serde_json::Value::Array(items) if items.iter().any(|i| i.is_array()) => {
                    let rows: Vec<String> = items.iter().map(|i| format!("    {i}")).collect();
                    format!("[\n{}\n  ]", rows.join(",\n"))
                }
                other => other.to_string(),
            };
            out.push_str(&format!("  {}: {body}{sep}\n", serde_json::Value::from(key.as_str())));
        }
        out.push_str("}\n");
        out
    }

    /// Clearance to use: the document's own, else `fallback`.
    pub fn tolerance(&self, fallback: Tolerance<f64>) -> Result<Tolerance<f64>, DocumentError> {
        match self.clearance {
            Some(c) => Tolerance::new(c).ok_or(DocumentError::BadClearance(c)),
            None => Ok(fallback),
        }
    }

    /// Validates the document into a chain, using `fallback` unless the
    /// document sets its own clearance.
    pub fn to_chain(&self, fallback: Tolerance<f64>) -> Result<Chain<f64>, DocumentError> {
        self.to_chain_with(self.tolerance(fallback)?)
    }

    /// Validates the document into a chain with exactly `tol`, ignoring the
    /// document's clearance.
    pub fn to_chain_with(&self, tol: Tolerance<f64>) -> Result<Chain<f64>, DocumentError> {
        match (&self.vertices, &self.lengths, &self.angles) {
            (Some(v), None, None) if self.pose.is_none() => Ok(Chain::from_vertices(v, tol)?),
            (None, Some(l), Some(a)) => Ok(Chain::from_lengths_angles(l, a, self.pose.unwrap_or_default(), tol)?),
            (None, _, _) => Err(DocumentError::NoRepresentation),
            _ => Err(DocumentError::BothRepresentations),
        }
    }

    pub fn from_chain(chain: &Chain<f64>, repr: Representation) -> Self {
        let clearance = Some(chain.tolerance().clearance).filter(|&c| c != Tolerance::<f64>::default().clearance);
        match repr {
            Representation::Vertices => {
                ChainDocument { clearance, vertices: Some(chain.vertices().to_vec()), ..Default::default() }
            }
            Representation::LengthsAngles => ChainDocument {
                clearance,
                lengths: Some(chain.lengths().to_vec()),
                angles: Some(chain.angles().to_vec()),
                pose: Some(chain.pose()),
                ..Default::default()
            },
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn load(text: &str) -> Result<Chain<f64>, DocumentError> {
        ChainDocument::parse(text)?.to_chain(Tolerance::default())
    }

    #[test]
    fn vertex_form() {
        let c = load(r#"{"vertices": [[0,0],[1,0],[1,1]]}"#).unwrap();
        assert_eq!(c.joint_count(), 1);
        assert!((c.angle(1) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn lengths_angles_form() {
        let c = load(r#"{"lengths":[1,1],"angles":[3.141592653589793]}"#).unwrap();
        assert_eq!(c.angle(1), PI);
        assert!(c.vertices()[2].dist(Point::new(2.0, 0.0)) < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            load(r#"{"vertices": [[0,0],[0,0],[1,1]]}"#),
            Err(DocumentError::Chain(ChainError::DegenerateLink { index: 0, .. }))
        ));
        assert!(matches!(load(r#"{"vertices": [[0,0],[1,0]], "degrees": true}"#), Err(DocumentError::Parse(_))));
        assert!(matches!(
            load(r#"{"lengths":[1,1],"angles":[90]}"#),
            Err(DocumentError::Chain(ChainError::AngleOutOfRange { .. }))
        ));
        assert!(matches!(load(r#"{"name": "x"}"#), Err(DocumentError::NoRepresentation)));
        assert!(matches!(
            load(r#"{"vertices": [[0,0],[1,0]], "lengths": [1], "angles": []}"#),
            Err(DocumentError::BothRepresentations)
        ));
        assert!(matches!(load(r#"{"vertices": [[0,0],[1,0]], "clearance": -1}"#), Err(DocumentError::BadClearance(_))));
        assert!(matches!(load("{"), Err(DocumentError::Parse(_))));
        assert!(matches!(
            load(r#"{"vertices": [[0,0],[2,0],[1,1],[1,-1]]}"#),
            Err(DocumentError::Chain(ChainError::NotStronglySimple(0, 2)))
        ));
    }

    #[test]
    fn round_trip_both_forms() {
        let c = load(r#"{"vertices": [[0,0],[1,0],[1.5,0.7],[0.2,1.1]]}"#).unwrap();
        for repr in [Representation::Vertices, Representation::LengthsAngles] {
            let text = ChainDocument::from_chain(&c, repr).to_json();
            let back = load(&text).unwrap();
            for (p, q) in c.vertices().iter().zip(back.vertices()) {
                assert!(p.dist(*q) <= 1e-12);
            }
        }
    }

    #[test]
    fn document_clearance_wins_over_fallback() {
        let doc = ChainDocument::parse(r#"{"vertices": [[0,0],[1,0]], "clearance": 0.001}"#).unwrap();
        let c = doc.to_chain(Tolerance::default()).unwrap();
        assert_eq!(c.tolerance().clearance, 0.001);
        let text = ChainDocument::from_chain(&c, Representation::Vertices).to_json();
        assert!(text.contains("0.001"));
    }
}
