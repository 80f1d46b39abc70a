//! The JSON result document written by `--json` and read back by `verify`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use superlat_core::isosearch::SearchStats;
use superlat_core::{CandidateIsometry, Certificate, GradedDecomposition, QMatrix, QVector, SearchOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Decompose,
    Factorize,
    Obstruct,
    Oracle,
}

/// Echo of everything the result was computed from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<QMatrix>,
    #[serde(default, rename = "Bprime", skip_serializing_if = "Option::is_none")]
    pub bprime: Option<QMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<QVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<QVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<QMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SearchOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_bound: Option<u32>,
    /// Obstruction inputs: `family` or `value` plus `squares`, all as strings.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub command: Command,
    pub input: Input,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<SearchStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateIsometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_matrices: Option<Vec<QMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<GradedDecomposition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub timing: Timing,
}

impl ResultDocument {
    pub fn new(command: Command, input: Input) -> Self {
        ResultDocument {
            command,
            input,
            stats: None,
            candidates: Vec::new(),
            oracle_matrices: None,
            decomposition: None,
            certificate: None,
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}
