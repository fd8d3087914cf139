//! JSON instance files.
//!
//! ```json
//! {"format_version": 1, "kind": "portfolio",
//!  "shapes": {"n": 3}, "rho": 1.0, "beta": 1.0,
//!  "matrices": {"Q": [...], "mu": [...]},
//!  "rng": {"name": "chacha8", "seed": 7}}
//! ```
//!
//! Matrices are flat row-major arrays. Dictionary files carry
//! `shapes: {n, l, m}` and matrices `Z` (`n × m`) and optionally `C0`
//! (`l × m`) and `D0` (`l × n`).

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DictionaryInstance, PortfolioInstance, RngInfo};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed instance at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Portfolio(PortfolioInstance),
    Dictionary(DictionaryInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Portfolio(_) => "portfolio",
            Instance::Dictionary(_) => "dictionary",
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            Instance::Portfolio(p) => p.rho,
            Instance::Dictionary(d) => d.rho,
        }
    }

    pub fn problem(&self) -> crate::Result<crate::SpoProblem> {
        match self {
            Instance::Portfolio(p) => super::portfolio_problem(p),
            Instance::Dictionary(d) => super::dictionary_problem(d),
        }
    }

    pub fn start_point(&self) -> Vec<f64> {
        match self {
            Instance::Portfolio(p) => p.start_point(),
            Instance::Dictionary(d) => d.start_point(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_instance()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    kind: String,
    shapes: Shapes,
    rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    matrices: Matrices,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<RngInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Shapes {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Matrices {
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<Vec<f64>>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    z: Option<Vec<f64>>,
    #[serde(rename = "C0", default, skip_serializing_if = "Option::is_none")]
    c0: Option<Vec<f64>>,
    #[serde(rename = "D0", default, skip_serializing_if = "Option::is_none")]
    d0: Option<Vec<f64>>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn matrix(name: &str, data: Option<Vec<f64>>, rows: usize, cols: usize) -> Result<DMatrix<f64>, InstanceError> {
    let data = data.ok_or_else(|| InstanceError::Invalid(format!("missing matrix {name}")))?;
    if data.len() != rows * cols {
        return Err(InstanceError::Invalid(format!(
            "matrix {name} has {} entries, expected {rows}x{cols} = {}",
            data.len(),
            rows * cols
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn unexpected(name: &str, present: bool, kind: &str) -> Result<(), InstanceError> {
    if present {
        Err(InstanceError::Invalid(format!("{name} is not allowed in a {kind} instance")))
    } else {
        Ok(())
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        match inst {
            Instance::Portfolio(p) => InstanceFile {
                format_version: FORMAT_VERSION,
                kind: "portfolio".into(),
                shapes: Shapes {
                    n: p.dim(),
                    l: None,
                    m: None,
                },
                rho: p.rho,
                beta: Some(p.beta),
                matrices: Matrices {
                    q: Some(row_major(&p.q)),
                    mu: Some(p.mu.as_slice().to_vec()),
                    ..Default::default()
                },
                rng: p.rng.clone(),
            },
            Instance::Dictionary(d) => InstanceFile {
                format_version: FORMAT_VERSION,
                kind: "dictionary".into(),
                shapes: Shapes {
                    n: d.n(),
                    l: Some(d.l),
                    m: Some(d.m()),
                },
                rho: d.rho,
                beta: None,
                matrices: Matrices {
                    z: Some(row_major(&d.z)),
                    c0: d.c0.as_ref().map(row_major),
                    d0: d.d0.as_ref().map(row_major),
                    ..Default::default()
                },
                rng: d.rng.clone(),
            },
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance, InstanceError> {
        if self.format_version != FORMAT_VERSION {
            return Err(InstanceError::Invalid(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let n = self.shapes.n;
        let mats = self.matrices;
        let inst = match self.kind.as_str() {
            "portfolio" => {
                unexpected("shapes.l", self.shapes.l.is_some(), "portfolio")?;
                unexpected("shapes.m", self.shapes.m.is_some(), "portfolio")?;
                unexpected("matrix Z", mats.z.is_some(), "portfolio")?;
                unexpected("matrix C0", mats.c0.is_some(), "portfolio")?;
                unexpected("matrix D0", mats.d0.is_some(), "portfolio")?;
                let q = matrix("Q", mats.q, n, n)?;
                let mu = matrix("mu", mats.mu, n, 1)?;
                let p = PortfolioInstance {
                    q,
                    mu: DVector::from_column_slice(mu.as_slice()),
                    beta: self.beta.unwrap_or(1.0),
                    rho: self.rho,
                    rng: self.rng,
                };
                p.validate().map_err(|e| InstanceError::Invalid(e.to_string()))?;
                Instance::Portfolio(p)
            }
            "dictionary" => {
                unexpected("beta", self.beta.is_some(), "dictionary")?;
                unexpected("matrix Q", mats.q.is_some(), "dictionary")?;
                unexpected("matrix mu", mats.mu.is_some(), "dictionary")?;
                let missing = |f: &str| InstanceError::Invalid(format!("missing shapes.{f}"));
                let l = self.shapes.l.ok_or_else(|| missing("l"))?;
                let m = self.shapes.m.ok_or_else(|| missing("m"))?;
                let d = DictionaryInstance {
                    z: matrix("Z", mats.z, n, m)?,
                    l,
                    rho: self.rho,
                    c0: mats.c0.map(|c| matrix("C0", Some(c), l, m)).transpose()?,
                    d0: mats.d0.map(|d| matrix("D0", Some(d), l, n)).transpose()?,
                    rng: self.rng,
                };
                d.validate().map_err(|e| InstanceError::Invalid(e.to_string()))?;
                Instance::Dictionary(d)
            }
            other => {
                return Err(InstanceError::Invalid(format!(
                    "unknown kind {other:?} (expected \"portfolio\" or \"dictionary\")"
                )))
            }
        };
        Ok(inst)
    }
}

pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, inst.to_json()).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Instance::from_json(&text)
}

/// Lowercase hex SHA-256 of the canonical (compact) serialization.
pub fn instance_hash(inst: &Instance) -> String {
    Sha256::digest(inst.to_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
