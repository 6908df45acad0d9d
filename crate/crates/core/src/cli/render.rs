//! Plain-text reports.

use std::fmt::Write;

use super::Outcome;
use crate::calculus::{Certificate, Verdict};
use crate::dinioracle::{DiniEstimate, ProbeVerdict, Witness};
use crate::funcmodel::HypothesisReport;
use crate::optimality::{InclusionResult, OptimalityCertificate, OptimalityVerdict, Qualification};
use crate::polykernel::{Polyhedron, RationalVector};

fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Holds => "HOLDS",
        Outcome::Fails => "FAILS",
        Outcome::Inconclusive => "INCONCLUSIVE",
        Outcome::Error => "ERROR",
    }
}

fn hypotheses(out: &mut String, r: &HypothesisReport) {
    let _ = writeln!(out, "hypotheses:");
    for h in &r.items {
        let status = serde_json::to_value(h.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let prov = serde_json::to_value(h.provenance).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(out, "  [{status}] {} ({prov}): {}", h.name, h.detail);
    }
}

pub(super) fn subdiff(x: &RationalVector, set: &Polyhedron, hyp: &HypothesisReport) -> String {
    let mut out = format!("subdifferential at {x}: {set}\n");
    hypotheses(&mut out, hyp);
    out
}

pub(super) fn certificate(claim: &str, x: &RationalVector, c: &Certificate, o: Outcome) -> String {
    let mut out = format!("claim {claim} at {x}: {}\n", outcome_word(o));
    let _ = writeln!(out, "  lhs = {}", c.lhs);
    let _ = writeln!(out, "  rhs = {}", c.rhs);
    let verdict = match &c.verdict {
        Verdict::Equal => format!("{} = {}", c.lhs, c.rhs),
        Verdict::StrictInclusion { witness } => format!("lhs strictly inside rhs; {witness} ∈ rhs \\ lhs"),
        Verdict::Fails { witness: Some(w) } => format!("inclusion fails; {w} ∈ lhs \\ rhs"),
        Verdict::Fails { witness: None } => "statements disagree".into(),
    };
    let _ = writeln!(out, "  verdict: {verdict}");
    let _ = writeln!(out, "  theorem certified: {}", c.theorem_certified);
    hypotheses(&mut out, &c.hypothesis_report);
    for n in &c.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

fn inclusion(r: &InclusionResult) -> String {
    match r {
        InclusionResult::Holds => "holds".into(),
        InclusionResult::Fails { witness } => format!("fails at vertex {witness}"),
    }
}

pub(super) fn optimality(x: &RationalVector, c: &OptimalityCertificate) -> String {
    let verdict = match &c.verdict {
        OptimalityVerdict::BluntMinimizerAllEps => "BluntMinimizerAllEps".to_string(),
        OptimalityVerdict::NotBluntMinimizer { witness } => format!(
            "NotBluntMinimizer: direction {} has rate {}, decrease verified at t = {}",
            witness.direction, witness.rate, witness.step
        ),
        OptimalityVerdict::Inconclusive { reason } => format!("Inconclusive: {reason}"),
    };
    let mut out = format!("certify at {x}: {verdict}\n");
    let q = match &c.qualification {
        Qualification::Holds { cone } => format!("holds (cone {cone})"),
        Qualification::Fails { cone } => format!("fails (cone {cone})"),
        Qualification::Undetermined { reason } => format!("undetermined: {reason}"),
    };
    let _ = writeln!(out, "  qualification: {q}");
    let _ = writeln!(out, "  N(A, x̄) direct: {}", c.normal_cone_direct);
    if let Some(l) = &c.normal_cone_lagrange {
        let _ = writeln!(out, "  N(A, x̄) multipliers: {l} (agree: {})", c.routes_agree);
    }
    let _ = writeln!(out, "  ∂h ⊆ ∂g + N(A, x̄): {}", inclusion(&c.inclusion28));
    let _ = writeln!(out, "  ∂h ⊆ ∂(g + δ_A): {}", inclusion(&c.inclusion30));
    hypotheses(&mut out, &c.hypothesis_report);
    for n in &c.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

fn witness(w: &Witness) -> String {
    serde_json::to_string(w).unwrap_or_default()
}

pub(super) fn probe(which: &str, x: &RationalVector, v: &ProbeVerdict, o: Outcome) -> String {
    let mut out = format!("{which} probe at {x}: {}\n", outcome_word(o));
    if let Some(r) = &v.reason {
        let _ = writeln!(out, "  {r}");
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(out, "  witness: {}", witness(w));
    }
    if let (Some(first), Some(last)) = (v.shells.first(), v.shells.last()) {
        let _ = writeln!(out, "  {} shells, radius {:e} down to {:e}", v.shells.len(), first.radius, last.radius);
    }
    let _ = writeln!(out, "hypotheses: none (sampling probe)");
    out
}

pub(super) fn dini(which: &str, x: &RationalVector, e: &DiniEstimate, o: Outcome) -> String {
    let mut out = format!("{which} probe at {x}: {}\n", outcome_word(o));
    let _ = writeln!(out, "  estimate {} (stable: {}, diverges: {})", e.estimate, e.stable, e.diverges);
    if let Some(w) = &e.witness {
        let _ = writeln!(out, "  most negative quotient: {}", witness(w));
    }
    let _ = writeln!(out, "hypotheses: none (sampling probe)");
    out
}
