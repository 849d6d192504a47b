//! JSON report schema.

use std::collections::BTreeMap;

use hamiltonize_core::constructions::HamiltonizationResult;
use hamiltonize_core::exterior::TensorJson;
use hamiltonize_core::verify::FlowReport;
use hamiltonize_core::{Certificate, Chart, SamplerConfig, Verdict};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "hamiltonize-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub chart: ChartJson,
    pub tasks: Vec<TaskReport>,
    pub flows: Vec<FlowResult>,
    pub verdict: Verdict,
    pub passed: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartJson {
    pub coords: Vec<String>,
    pub params: BTreeMap<String, Option<String>>,
    pub exclude: Vec<String>,
}

impl ChartJson {
    pub fn of(c: &Chart) -> ChartJson {
        ChartJson {
            coords: c.coords().iter().map(|s| s.to_string()).collect(),
            params: c
                .params()
                .iter()
                .map(|(n, v)| (n.to_string(), v.as_ref().map(|q| q.to_string())))
                .collect(),
            exclude: c.exclude().iter().map(|e| e.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectJson {
    Tensor(TensorJson),
    Exprs(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub expect: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verdict: Option<Verdict>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub results: Vec<ResultJson>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub objects: BTreeMap<String, ObjectJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<f64>,
}

impl TaskReport {
    /// Every certificate in the task, results first.
    pub fn all_certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.results
            .iter()
            .flat_map(|r| r.certificates.iter())
            .chain(self.certificates.iter())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub construction: String,
    pub pi: TensorJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family_index: Option<usize>,
    pub certified: bool,
    pub certificates: Vec<Certificate>,
}

impl ResultJson {
    pub fn of(r: &HamiltonizationResult) -> ResultJson {
        ResultJson {
            construction: r.construction.to_string(),
            pi: r.pi.to_json(),
            h: r.h.as_ref().map(|h| h.to_expr().to_string()),
            lambda: r.lambda.as_ref().map(|l| l.to_expr().to_string()),
            family_index: r.family_index.map(|i| i + 1),
            certified: r.certified(),
            certificates: r.certificates().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
    pub field: String,
    pub invariants: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<FlowReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub passed: bool,
}
