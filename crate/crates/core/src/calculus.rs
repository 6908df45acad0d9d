//! Checkers for the subdifferential calculus of DC functions.
//!
//! Each checker computes its left-hand side from the definition (polar
//! reduction, or direct PA sums) and its right-hand side from the formula
//! under test (erosions of ε-subdifferentials), then compares the two sets
//! exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::{DCFunction, HypothesisReport, HypothesisStatus, PAConvexFunction, Provenance};
use crate::polykernel::{
    contains_point, contains_polyhedron, dual_norm_ball, int, intersect_all, minkowski_sum, star_difference,
    Containment, NormSpec, Polyhedron, Rational, RationalVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    SumRule12,
    Inclusion13,
    Equality22,
    Equality26,
    Intersection27,
    Cor11,
    Cor12a,
    Cor12b,
    LocalMinNecessary,
}

impl ClaimId {
    /// Claims asserting `lhs ⊆ rhs` rather than `lhs = rhs`.
    pub fn is_inclusion(&self) -> bool {
        matches!(self, ClaimId::SumRule12 | ClaimId::Inclusion13 | ClaimId::LocalMinNecessary)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    /// `lhs ⊊ rhs`; the witness lies in `rhs \ lhs`.
    StrictInclusion { witness: RationalVector },
    /// The claimed relation fails; a witness in `lhs \ rhs` when the failure
    /// is a set-theoretic one.
    Fails { witness: Option<RationalVector> },
}

impl Verdict {
    /// Whether the verdict supports the claim `id`.
    pub fn supports(&self, id: ClaimId) -> bool {
        match self {
            Verdict::Equal => true,
            Verdict::StrictInclusion { .. } => id.is_inclusion(),
            Verdict::Fails { .. } => false,
        }
    }
}

/// The three statements of the optimality equivalence, evaluated separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cor11Findings {
    pub exists_eta: bool,
    pub zero_in_subdifferential: bool,
    pub zero_in_star_difference: bool,
    pub for_all_eta: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub claim_id: ClaimId,
    pub lhs: Polyhedron,
    pub rhs: Polyhedron,
    pub verdict: Verdict,
    pub hypothesis_report: HypothesisReport,
    pub theorem_certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cor11: Option<Cor11Findings>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(claim_id: ClaimId, lhs: Polyhedron, rhs: Polyhedron, report: HypothesisReport) -> Result<Self> {
        let verdict = compare(&lhs, &rhs)?;
        Ok(Certificate {
            claim_id,
            lhs: lhs.dual_description()?,
            rhs: rhs.dual_description()?,
            verdict,
            theorem_certified: report.theorem_certified(),
            hypothesis_report: report,
            cor11: None,
            notes: vec![],
        })
    }

    pub fn holds(&self) -> bool {
        self.verdict.supports(self.claim_id)
    }

    /// Recomputes the verdict from the stored sets.
    pub fn recheck(&self) -> Result<Verdict> {
        compare(&self.lhs, &self.rhs)
    }
}

/// `Equal`, `StrictInclusion` (lhs ⊊ rhs) or `Fails` (lhs ⊄ rhs).
pub fn compare(lhs: &Polyhedron, rhs: &Polyhedron) -> Result<Verdict> {
    if let Containment::NotContained { witness } = contains_polyhedron(rhs, lhs)? {
        return Ok(Verdict::Fails { witness: Some(witness) });
    }
    Ok(match contains_polyhedron(lhs, rhs)? {
        Containment::Contained => Verdict::Equal,
        Containment::NotContained { witness } => Verdict::StrictInclusion { witness },
    })
}

fn nonneg(x: &Rational) -> Result<()> {
    if x < &int(0) {
        Err(Error::NegativeEps)
    } else {
        Ok(())
    }
}

fn convexity_report(names: &[&str]) -> HypothesisReport {
    let mut r = HypothesisReport::default();
    for n in names {
        r.push(&format!("{n} convex"), HypothesisStatus::Satisfied, Provenance::ExactByConvexity, "PA convex input");
    }
    r
}

/// `∂_ε f(x̄) + ∂_η g(x̄) ⊆ ∂_{ε+η}(f + g)(x̄)`.
pub fn check_sum_rule(
    f: &PAConvexFunction,
    g: &PAConvexFunction,
    x_bar: &RationalVector,
    eps: &Rational,
    eta: &Rational,
    norm: NormSpec,
) -> Result<Certificate> {
    nonneg(eps)?;
    nonneg(eta)?;
    if !f.in_domain(x_bar)? || !g.in_domain(x_bar)? {
        return Err(Error::PointOutsideDomain);
    }
    let lhs = minkowski_sum(&f.eps_subdifferential_at(x_bar, eps, norm)?, &g.eps_subdifferential_at(x_bar, eta, norm)?)?;
    let rhs = f.add(g)?.eps_subdifferential_at(x_bar, &(eps + eta), norm)?;
    let cert = Certificate::new(ClaimId::SumRule12, lhs, rhs, convexity_report(&["f", "g"]))?;
    if let Verdict::Fails { witness } = &cert.verdict {
        return Err(Error::Internal(format!("sum rule inclusion failed for convex inputs at {witness:?}")));
    }
    Ok(cert)
}

/// Definitional `∂_ε f(x̄)` against `∂_{ε+η}g(x̄) ⊖* ∂_η h(x̄)`. The claim is
/// the equality when every hypothesis is certified, and the general
/// inclusion otherwise.
pub fn check_difference_formula(
    dc: &DCFunction,
    x_bar: &RationalVector,
    eps: &Rational,
    eta: &Rational,
    norm: NormSpec,
) -> Result<Certificate> {
    let rhs = dc.dc_dini_subdifferential(x_bar, eps, eta, norm)?;
    let lhs = dc.polar_reduction_subdifferential(x_bar, eps, norm)?;
    let claim = if !rhs.hypotheses.theorem_certified() {
        ClaimId::Inclusion13
    } else if eps == &int(0) && eta == &int(0) {
        ClaimId::Equality22
    } else {
        ClaimId::Equality26
    };
    Certificate::new(claim, lhs, rhs.set, rhs.hypotheses)
}

/// Definitional `∂_ε f(x̄)` against `⋂_μ (∂_{ε+μ}g(x̄) ⊖* ∂_μ h(x̄))` over a
/// finite grid of μ.
pub fn check_intersection_formula(
    dc: &DCFunction,
    x_bar: &RationalVector,
    eps: &Rational,
    mu_list: &[Rational],
    norm: NormSpec,
) -> Result<Certificate> {
    if mu_list.is_empty() {
        return Err(Error::Invalid("mu_list must not be empty".into()));
    }
    let lhs = dc.polar_reduction_subdifferential(x_bar, eps, norm)?;
    let mut factors = Vec::with_capacity(mu_list.len());
    let mut notes = Vec::new();
    for mu in mu_list {
        let part = dc.dc_dini_subdifferential(x_bar, eps, mu, norm)?.set;
        if !part.same_set(&lhs)? {
            notes.push(format!("factor mu = {mu} differs from the left-hand side"));
        }
        factors.push(part);
    }
    let rhs = intersect_all(dc.dim(), &factors)?;
    let mut cert = Certificate::new(ClaimId::Intersection27, lhs, rhs, dc.hypothesis_report(x_bar)?)?;
    cert.notes = notes;
    cert.notes.push(format!("partial check over {} values of mu", mu_list.len()));
    Ok(cert)
}

/// Evaluates the three equivalent statements on a finite η grid.
pub fn check_corollary11(
    dc: &DCFunction,
    x_bar: &RationalVector,
    eta_list: &[Rational],
    norm: NormSpec,
) -> Result<Certificate> {
    if !eta_list.iter().any(|e| e == &int(0)) {
        return Err(Error::Invalid("eta_list must contain 0".into()));
    }
    for e in eta_list {
        nonneg(e)?;
    }
    if !dc.g().in_domain(x_bar)? {
        return Err(Error::PointOutsideDomain);
    }
    let mut inclusions = Vec::with_capacity(eta_list.len());
    for eta in eta_list {
        let hs = dc.h().eps_subdifferential_at(x_bar, eta, norm)?;
        let gs = dc.g().eps_subdifferential_at(x_bar, eta, norm)?;
        inclusions.push(gs.contains(&hs)?);
    }
    let zero = RationalVector::zeros(dc.dim());
    let lhs = dc.polar_reduction_subdifferential(x_bar, &int(0), norm)?;
    let rhs = dc.dc_dini_subdifferential(x_bar, &int(0), &int(0), norm)?;
    let exists_eta = inclusions.iter().any(|b| *b);
    let for_all_eta = inclusions.iter().all(|b| *b);
    let zero_def = contains_point(&lhs, &zero)?;
    let zero_star = contains_point(&rhs.set, &zero)?;
    let agree = exists_eta == zero_def && zero_def == for_all_eta && zero_def == zero_star;
    let mut cert = Certificate::new(ClaimId::Cor11, lhs, rhs.set, rhs.hypotheses)?;
    if !agree {
        cert.verdict = Verdict::Fails { witness: None };
    }
    cert.cor11 = Some(Cor11Findings {
        exists_eta,
        zero_in_subdifferential: zero_def,
        zero_in_star_difference: zero_star,
        for_all_eta,
        agree,
    });
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cor12Variant {
    /// `g` convex.
    A,
    /// `g` approximately convex; identical to `A` for PA inputs.
    B,
}

/// Definitional `∂_ε f(x̄)` against `(∂g(x̄) + εB*) ⊖* ∂h(x̄)`.
pub fn check_corollary12(
    dc: &DCFunction,
    x_bar: &RationalVector,
    eps: &Rational,
    norm: NormSpec,
    variant: Cor12Variant,
) -> Result<Certificate> {
    nonneg(eps)?;
    if !dc.g().in_domain(x_bar)? {
        return Err(Error::PointOutsideDomain);
    }
    let lhs = dc.polar_reduction_subdifferential(x_bar, eps, norm)?;
    let enlarged = minkowski_sum(&dc.g().subdifferential_at(x_bar)?, &dual_norm_ball(norm, eps, dc.dim())?)?;
    let rhs = star_difference(&enlarged, &dc.h().subdifferential_at(x_bar)?)?;
    let mut report = dc.hypothesis_report(x_bar)?;
    report.items.retain(|h| !h.name.contains("gap-continuous"));
    let claim = match variant {
        Cor12Variant::A => ClaimId::Cor12a,
        Cor12Variant::B => ClaimId::Cor12b,
    };
    let mut cert = Certificate::new(claim, lhs, rhs, report)?;
    if variant == Cor12Variant::B {
        cert.notes.push("g is PA convex, so the approximately convex variant reduces to the convex one".into());
    }
    Ok(cert)
}

/// The necessary condition `∂h(x̄) ⊆ ∂g(x̄)` for a local minimum of `g - h`.
pub fn local_min_necessary(dc: &DCFunction, x_bar: &RationalVector) -> Result<Certificate> {
    if !dc.g().in_domain(x_bar)? {
        return Err(Error::PointOutsideDomain);
    }
    let lhs = dc.h().subdifferential_at(x_bar)?;
    let rhs = dc.g().subdifferential_at(x_bar)?;
    let mut cert = Certificate::new(ClaimId::LocalMinNecessary, lhs, rhs, convexity_report(&["g", "h"]))?;
    cert.notes.push("necessary condition only; minimality itself is not claimed".into());
    Ok(cert)
}
