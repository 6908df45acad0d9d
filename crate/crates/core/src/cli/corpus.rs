use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{run_scenario, Overrides};
use super::{Outcome, Report};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusRow {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    pub outcome: Outcome,
    pub expect: Outcome,
    pub pass: bool,
}

/// Rows in lexicographic order of file name. Wall times are kept out of the
/// JSON so that reports are byte-identical across runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    pub reports: Vec<Report>,
    pub all_pass: bool,
    #[serde(skip)]
    pub wall: Vec<Duration>,
}

impl CorpusSummary {
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries serialize")
    }

    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$}  {:<22}  {:<12}  {:<12}  {:>9}\n", "name", "claim", "outcome", "expected", "wall ms");
        for (r, t) in self.rows.iter().zip(&self.wall) {
            let claim = r.claim.clone().unwrap_or_else(|| r.kind.clone());
            let flag = if r.pass { "" } else { "  <-- FAIL" };
            let _ = std::fmt::Write::write_fmt(
                &mut out,
                format_args!(
                    "{:<width$}  {:<22}  {:<12}  {:<12}  {:>9.1}{flag}\n",
                    r.name,
                    claim,
                    word(r.outcome),
                    word(r.expect),
                    t.as_secs_f64() * 1e3
                ),
            );
        }
        let passed = self.rows.iter().filter(|r| r.pass).count();
        out.push_str(&format!("{passed}/{} scenarios as expected\n", self.rows.len()));
        out
    }
}

fn word(o: Outcome) -> &'static str {
    match o {
        Outcome::Holds => "holds",
        Outcome::Fails => "fails",
        Outcome::Inconclusive => "inconclusive",
        Outcome::Error => "error",
    }
}

fn expected(path: &Path) -> Outcome {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v.get("expect").cloned())
        .and_then(|e| serde_json::from_value(e).ok())
        .unwrap_or(Outcome::Holds)
}

/// Runs every `*.json` scenario in `dir` whose file name matches `filter`.
/// An empty selection is an input error.
pub fn corpus_run(dir: &Path, filter: Option<&str>, ov: &Overrides) -> Result<CorpusSummary> {
    let pattern = match filter {
        Some(f) => Some(glob::Pattern::new(f).map_err(|e| Error::Invalid(format!("bad filter `{f}`: {e}")))?),
        None => None,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            pattern.as_ref().map_or(true, |pat| pat.matches(&name))
        })
        .collect();
    if files.is_empty() {
        return Err(Error::Invalid(format!("no scenarios in {}", dir.display())));
    }
    files.sort();
    let runs: Vec<(Report, Outcome, Duration)> = files
        .par_iter()
        .map(|p| {
            let start = Instant::now();
            let report = run_scenario(p, ov);
            (report, expected(p), start.elapsed())
        })
        .collect();
    let mut rows = Vec::with_capacity(runs.len());
    let mut reports = Vec::with_capacity(runs.len());
    let mut wall = Vec::with_capacity(runs.len());
    for (r, expect, t) in runs {
        rows.push(CorpusRow {
            name: r.name.clone(),
            kind: r.kind.clone(),
            claim: r.claim.clone(),
            outcome: r.outcome,
            expect,
            pass: r.outcome == expect,
        });
        reports.push(r);
        wall.push(t);
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(CorpusSummary { rows, reports, all_pass, wall })
}
