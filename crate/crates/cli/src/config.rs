//! Run configuration file.
//!
//! ```toml
//! seed = 7
//! budget = 100000000
//! format = "json"
//! out = "bundle"
//! scenario = "union-ld"
//!
//! [params]
//! copies = [4, 8, 16]
//! ```
//!
//! Every key is optional and command-line flags win. The file text is kept
//! so scenario bundles can carry it verbatim.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Deserialize;

use crate::Format;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    seed: Option<u64>,
    /// Integer, or a decimal string for budgets beyond `i64`.
    budget: Option<toml::Value>,
    format: Option<Format>,
    out: Option<PathBuf>,
    scenario: Option<String>,
    params: Option<toml::Table>,
}

pub struct Config {
    pub seed: Option<u64>,
    pub budget: Option<u128>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub scenario: Option<String>,
    pub params: Option<serde_json::Value>,
    /// The file as read.
    pub text: String,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: String) -> anyhow::Result<Self> {
        let raw: Raw = toml::from_str(&text).map_err(|e| invalid(e.to_string()))?;
        let budget = match raw.budget {
            None => None,
            Some(toml::Value::Integer(v)) if v > 0 => Some(v as u128),
            Some(toml::Value::String(s)) => Some(s.parse().map_err(|_| invalid(format!("bad budget {s:?}")))?),
            Some(v) => return Err(invalid(format!("bad budget {v}"))),
        };
        let params = raw.params.map(serde_json::to_value).transpose()?;
        Ok(Self { seed: raw.seed, budget, format: raw.format, out: raw.out, scenario: raw.scenario, params, text })
    }
}

fn invalid(msg: String) -> anyhow::Error {
    anyhow!(sparse_ld::Error::Parse(msg))
}
