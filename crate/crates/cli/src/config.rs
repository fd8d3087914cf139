//! Run configuration.
//!
//! A config file is a JSON object. The optional `profile` key names a preset
//! (`portfolio-paper` or `dictionary-paper`); the remaining keys are merged
//! over it, objects recursively. Without a profile the preset matching
//! `kind` is used, and `portfolio-paper` when `kind` is absent.
//!
//! ```json
//! {"profile": "dictionary-paper", "dims": [{"n": 20, "l": 30, "m": 40}],
//!  "seeds": [1, 2], "protocol": {"inner": {"max_iter": 2000}}}
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use l0pen::{FamilySpec, InnerSolver, PenaltyFamily, Protocol};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const PROFILE_NAMES: [&str; 2] = ["portfolio-paper", "dictionary-paper"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Portfolio,
    Dictionary,
}

impl Kind {
    pub fn profile(self) -> &'static str {
        match self {
            Kind::Portfolio => PROFILE_NAMES[0],
            Kind::Dictionary => PROFILE_NAMES[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "pen-spg")]
    PenSpg,
    #[serde(rename = "pen-prox")]
    PenProx,
    #[serde(rename = "l0-prox")]
    L0Prox,
    #[serde(rename = "l1-prox")]
    L1Prox,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::PenSpg, Method::PenProx, Method::L0Prox, Method::L1Prox];

    pub fn name(self) -> &'static str {
        match self {
            Method::PenSpg => "pen-spg",
            Method::PenProx => "pen-prox",
            Method::L0Prox => "l0-prox",
            Method::L1Prox => "l1-prox",
        }
    }

    pub fn is_penalty(self) -> bool {
        matches!(self, Method::PenSpg | Method::PenProx)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown method '{s}' (valid: {})",
                    Method::ALL.map(Method::name).join(", ")
                )
            })
    }
}

/// Problem size: `n` for portfolios, `{n, l, m}` for dictionaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    Assets(usize),
    Dictionary { n: usize, l: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default = "default_family")]
    pub family: String,
    /// Inner solver of the penalty method when `solve` is given no method.
    #[serde(default = "default_inner")]
    pub inner: InnerSolver,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub dims: Vec<Dims>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub protocol: Protocol,
}

fn default_family() -> String {
    "quadratic".into()
}

fn default_inner() -> InnerSolver {
    InnerSolver::Spg
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bench-out")
}

fn preset(name: &str) -> CliResult<Protocol> {
    match name {
        "portfolio-paper" => Ok(Protocol::portfolio()),
        "dictionary-paper" => Ok(Protocol::dictionary()),
        other => Err(CliError::Config(format!(
            "unknown profile '{other}' (valid: {})",
            PROFILE_NAMES.join(", ")
        ))),
    }
}

/// Recursive merge of `over` into `base`; non-object values replace.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Config {
    /// Resolves a user config object. `profile_override` replaces the
    /// `profile` key of the object.
    pub fn from_value(user: Value, profile_override: Option<&str>) -> CliResult<Self> {
        let Value::Object(mut user) = user else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let kind = match user.get("kind") {
            Some(k) => Some(
                serde_json::from_value::<Kind>(k.clone())
                    .map_err(|e| CliError::Config(format!("kind: {e}")))?,
            ),
            None => None,
        };
        let profile = match (profile_override, user.remove("profile")) {
            (Some(p), _) => p.to_string(),
            (None, Some(Value::String(p))) => p,
            (None, Some(other)) => {
                return Err(CliError::Config(format!("profile must be a string, got {other}")))
            }
            (None, None) => kind.unwrap_or(Kind::Portfolio).profile().to_string(),
        };
        let protocol = preset(&profile)?;
        let mut base = Map::new();
        base.insert("profile".into(), Value::String(profile));
        base.insert(
            "protocol".into(),
            serde_json::to_value(protocol).expect("protocol serializes"),
        );
        let mut merged = Value::Object(base);
        merge(&mut merged, Value::Object(user));
        let config: Config =
            serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, profile_override: Option<&str>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
        })?;
        Self::from_value(value, profile_override)
    }

    /// Preset for `kind` with every other field at its default.
    pub fn for_kind(kind: Kind, profile_override: Option<&str>) -> CliResult<Self> {
        let value = serde_json::json!({ "kind": kind });
        Self::from_value(value, profile_override)
    }

    pub fn family_spec(&self) -> CliResult<FamilySpec> {
        self.family
            .parse::<FamilySpec>()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn family(&self, rho: f64) -> CliResult<PenaltyFamily> {
        Ok(self.family_spec()?.build(rho)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.family_spec()?;
        let p = &self.protocol;
        for (name, opts) in [("protocol.inner", &p.inner), ("protocol.baseline", &p.baseline)] {
            opts.validate()
                .map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        }
        p.outer
            .validate()
            .map_err(|e| CliError::Config(format!("protocol.outer: {e}")))?;
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        Ok(())
    }

    /// Extra checks for `bench`: a kind, and nonempty `dims` and `seeds`
    /// whose shapes match the kind.
    pub fn validate_bench(&self) -> CliResult<Kind> {
        let kind = self
            .kind
            .ok_or_else(|| CliError::Config("bench needs \"kind\"".into()))?;
        if self.dims.is_empty() {
            return Err(CliError::Config("dims must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must not be empty".into()));
        }
        for d in &self.dims {
            match (kind, d) {
                (Kind::Portfolio, Dims::Assets(_)) | (Kind::Dictionary, Dims::Dictionary { .. }) => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "dims entry {} does not fit kind {kind:?}",
                        serde_json::to_string(d).expect("dims serialize")
                    )))
                }
            }
        }
        Ok(kind)
    }

    /// Lowercase hex SHA-256 of the resolved config as compact JSON.
    pub fn hash(&self) -> String {
        hex_sha256(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
