//! Scripted scenarios that reproduce the convergence examples end to end,
//! and the report bundles they produce.
//!
//! A scenario is fixed by its name, a seed and a parameter table. Running
//! it yields a [`Bundle`]: named JSON/CSV files plus a PASS/FAIL verdict
//! computed from module outputs. Re-running with the same inputs produces
//! byte-identical files.

mod scenarios;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use scenarios::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    C4c6PartitionNotLeft,
    ExpanderRightNotPartition,
    RegularBipartiteLeftNotRight,
    UnionLd,
    LatticeLd,
    HardcoreSoftcore,
    Variational,
    SigmaKRate,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        Self::C4c6PartitionNotLeft,
        Self::ExpanderRightNotPartition,
        Self::RegularBipartiteLeftNotRight,
        Self::UnionLd,
        Self::LatticeLd,
        Self::HardcoreSoftcore,
        Self::Variational,
        Self::SigmaKRate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::C4c6PartitionNotLeft => "c4c6-partition-not-left",
            Self::ExpanderRightNotPartition => "expander-right-not-partition",
            Self::RegularBipartiteLeftNotRight => "regular-bipartite-left-not-right",
            Self::UnionLd => "union-ld",
            Self::LatticeLd => "lattice-ld",
            Self::HardcoreSoftcore => "hardcore-softcore",
            Self::Variational => "variational",
            Self::SigmaKRate => "sigma-k-rate",
        }
    }
}

impl std::str::FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| Error::Parse(format!("unknown scenario {s:?}")))
    }
}

impl std::fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of one scenario; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    C4c6(C4c6Params),
    Expander(ExpanderParams),
    RegularBipartite(RegularBipartiteParams),
    UnionLd(UnionLdParams),
    LatticeLd(LatticeLdParams),
    HardcoreSoftcore(HardcoreSoftcoreParams),
    Variational(VariationalParams),
    SigmaKRate(SigmaKRateParams),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub seed: u64,
    pub params: ScenarioParams,
}

impl Scenario {
    /// Default parameters for `name`.
    pub fn new(name: ScenarioName, seed: u64) -> Self {
        Self::from_json(name, seed, serde_json::Value::Object(Default::default())).expect("defaults parse")
    }

    /// Parameters from a JSON object; absent keys take their defaults and
    /// unknown keys are rejected.
    pub fn from_json(name: ScenarioName, seed: u64, params: serde_json::Value) -> Result<Self> {
        use ScenarioName as N;
        let params = match name {
            N::C4c6PartitionNotLeft => ScenarioParams::C4c6(serde_json::from_value(params)?),
            N::ExpanderRightNotPartition => ScenarioParams::Expander(serde_json::from_value(params)?),
            N::RegularBipartiteLeftNotRight => ScenarioParams::RegularBipartite(serde_json::from_value(params)?),
            N::UnionLd => ScenarioParams::UnionLd(serde_json::from_value(params)?),
            N::LatticeLd => ScenarioParams::LatticeLd(serde_json::from_value(params)?),
            N::HardcoreSoftcore => ScenarioParams::HardcoreSoftcore(serde_json::from_value(params)?),
            N::Variational => ScenarioParams::Variational(serde_json::from_value(params)?),
            N::SigmaKRate => ScenarioParams::SigmaKRate(serde_json::from_value(params)?),
        };
        Ok(Self { name, seed, params })
    }
}

/// Files and verdict of one scenario run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bundle {
    pub scenario: ScenarioName,
    pub seed: u64,
    pub passed: bool,
    /// The PASS condition, in words.
    pub criterion: String,
    /// Set when a step ran out of budget; later steps were skipped.
    pub truncated: Option<String>,
    /// File name to contents.
    #[serde(skip)]
    pub files: BTreeMap<String, String>,
}

impl Bundle {
    /// `summary.json`: the verdict and the list of files.
    pub fn summary(&self) -> String {
        let mut v = serde_json::to_value(self).expect("bundle serializes");
        v["files"] = self.files.keys().cloned().collect::<Vec<_>>().into();
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    /// Writes `summary.json` and every file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.json"), self.summary())?;
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
        }
        Ok(())
    }

    /// Adds a file, e.g. the verbatim configuration text.
    pub fn attach(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }
}

/// Collects files while a scenario runs.
#[derive(Default)]
pub struct Emitter {
    files: BTreeMap<String, String>,
}

impl Emitter {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.files.insert(name.to_string(), s);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.files.insert(name.to_string(), String::from_utf8(bytes).expect("csv is utf-8"));
        Ok(())
    }
}

/// Outcome of a scenario body: verdict plus the condition checked.
pub struct Verdict {
    pub passed: bool,
    pub criterion: String,
}

fn is_budget(e: &Error) -> bool {
    matches!(e, Error::BudgetExceeded { .. } | Error::ExactSearchInfeasible { .. })
}

/// Runs a scenario. Running out of budget gives a truncated, failing
/// bundle holding whatever was emitted; other errors are returned.
pub fn run_scenario(s: &Scenario, budget: u128) -> Result<Bundle> {
    let mut out = Emitter::default();
    out.json("params.json", &s.params)?;
    let result = match &s.params {
        ScenarioParams::C4c6(p) => c4c6_partition_not_left(p, budget, &mut out),
        ScenarioParams::Expander(p) => expander_right_not_partition(p, s.seed, budget, &mut out),
        ScenarioParams::RegularBipartite(p) => regular_bipartite_left_not_right(p, s.seed, budget, &mut out),
        ScenarioParams::UnionLd(p) => union_ld(p, budget, &mut out),
        ScenarioParams::LatticeLd(p) => lattice_ld(p, budget, &mut out),
        ScenarioParams::HardcoreSoftcore(p) => hardcore_softcore(p, budget, &mut out),
        ScenarioParams::Variational(p) => variational(p, budget, &mut out),
        ScenarioParams::SigmaKRate(p) => sigma_k_rate(p, s.seed, budget, &mut out),
    };
    let (passed, criterion, truncated) = match result {
        Ok(v) => (v.passed, v.criterion, None),
        Err(e) if is_budget(&e) => (false, String::new(), Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(Bundle { scenario: s.name, seed: s.seed, passed, criterion, truncated, files: out.files })
}
