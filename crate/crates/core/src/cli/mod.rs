//! Scenario files, reports and exit codes for the `subgrad` binary.
//!
//! Every subcommand is turned into a [`Scenario`] and run through the same
//! dispatcher, so a command line and the equivalent scenario file produce
//! the same report.

mod corpus;
mod render;
mod scenario;

pub use corpus::{corpus_run, CorpusRow, CorpusSummary};
pub use scenario::{run_scenario, run_scenario_value, Overrides, PlanOverrides, Scenario, ScenarioKind};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::Inconclusive => 2,
            Outcome::Error => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    pub outcome: Outcome,
    pub exit_code: i32,
    pub result: Value,
    /// Human-readable rendering; not part of the JSON report.
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub(crate) fn new(name: &str, kind: &str, claim: Option<String>, outcome: Outcome, result: Value, text: String) -> Self {
        Report { name: name.into(), kind: kind.into(), claim, outcome, exit_code: outcome.exit_code(), result, text }
    }

    pub(crate) fn error(name: &str, kind: &str, err: &crate::Error) -> Self {
        let msg = err.to_string();
        Report::new(name, kind, None, Outcome::Error, serde_json::json!({ "error": msg }), format!("error: {msg}\n"))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
