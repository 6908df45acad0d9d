//! Differences of PA convex functions and their Dini-Hadamard
//! ε-subdifferentials.
//!
//! For `f = g - h` with `g, h` PA convex and `x̄ ∈ dom g`, the directional
//! derivative is `d⁻f(x̄; d) = σ_{∂g(x̄)}(d) - max_j <b_j, d>` where `b_j`
//! are the slopes of `h` active at `x̄`. Hence
//!
//! ```text
//! x* ∈ ∂_ε⁻f(x̄)  ⟺  <x* + b_j, d> ≤ σ_{∂g(x̄) + εB*}(d)  for all d, j
//!               ⟺  x* ∈ ⋂_j (∂g(x̄) + εB* − b_j)
//! ```
//!
//! which is the polar reduction used as the definitional route. The
//! erosion route `∂_{ε+η}g(x̄) ⊖* ∂_η h(x̄)` is computed separately.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::pa::PAConvexFunction;
use crate::error::{Error, Result};
use crate::polykernel::{
    dual_norm_ball, intersect_all, minkowski_sum, star_difference, Extended, NormSpec, Polyhedron, Rational,
    RationalVector,
};

#[derive(Clone, Debug)]
pub struct DCFunction {
    g: PAConvexFunction,
    h: PAConvexFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ExactByConvexity,
    Probe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub provenance: Provenance,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub items: Vec<Hypothesis>,
}

impl HypothesisReport {
    pub fn push(&mut self, name: &str, status: HypothesisStatus, provenance: Provenance, detail: impl Into<String>) {
        self.items.push(Hypothesis { name: name.into(), status, provenance, detail: detail.into() });
    }

    pub fn all_satisfied(&self) -> bool {
        self.items.iter().all(|h| h.status == HypothesisStatus::Satisfied)
    }

    /// All hypotheses hold and none rests on sampling.
    pub fn theorem_certified(&self) -> bool {
        self.all_satisfied() && self.items.iter().all(|h| h.provenance == Provenance::ExactByConvexity)
    }

    pub fn extend(&mut self, other: HypothesisReport) {
        self.items.extend(other.items);
    }
}

#[derive(Clone, Debug)]
pub struct DcSubdifferential {
    pub set: Polyhedron,
    pub hypotheses: HypothesisReport,
}

impl DCFunction {
    pub fn new(g: PAConvexFunction, h: PAConvexFunction) -> Result<Self> {
        if g.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), found: h.dim() });
        }
        if !h.domain().contains(g.domain())? {
            return Err(Error::Invalid("dom g must be contained in dom h".into()));
        }
        Ok(DCFunction { g, h })
    }

    pub fn g(&self) -> &PAConvexFunction {
        &self.g
    }

    pub fn h(&self) -> &PAConvexFunction {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `g(x) - h(x)`, `+∞` off `dom g`.
    pub fn evaluate(&self, x: &RationalVector) -> Result<Extended> {
        match (self.g.evaluate(x)?, self.h.evaluate(x)?) {
            (Extended::Finite(a), Extended::Finite(b)) => Ok(Extended::Finite(a - b)),
            _ => Ok(Extended::PosInfinity),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let g = self.g.eval_f64(x);
        if g.is_infinite() {
            return f64::INFINITY;
        }
        g - self.h.eval_f64(x)
    }

    /// Exact `d⁻f(x̄; d)` at a point of `dom g`; `+∞` for directions leaving
    /// `dom g`.
    pub fn dini_derivative(&self, x_bar: &RationalVector, d: &RationalVector) -> Result<Extended> {
        if !self.g.in_domain(x_bar)? {
            return Err(Error::PointOutsideDomain);
        }
        let sub_g = self.g.subdifferential_at(x_bar)?;
        let sg = crate::polykernel::support_function(&sub_g, d)?;
        let hmax = self.h.active_pieces(x_bar).iter().map(|p| p.slope.dot(d)).max().expect("nonempty");
        Ok(match sg {
            Extended::Finite(s) => Extended::Finite(s - hmax),
            Extended::PosInfinity => Extended::PosInfinity,
        })
    }

    /// Hypotheses of the difference formulas at `x̄`, all decided exactly
    /// from convexity and piecewise affinity.
    pub fn hypothesis_report(&self, x_bar: &RationalVector) -> Result<HypothesisReport> {
        let mut r = HypothesisReport::default();
        let exact = Provenance::ExactByConvexity;
        let in_dom = self.g.in_domain(x_bar)?;
        r.push(
            "x̄ ∈ dom g",
            if in_dom { HypothesisStatus::Satisfied } else { HypothesisStatus::Violated },
            exact,
            "exact membership",
        );
        r.push("g directionally approximately starshaped", HypothesisStatus::Satisfied, exact, "g is convex");
        r.push("h directionally approximately starshaped", HypothesisStatus::Satisfied, exact, "h is convex");
        r.push(
            "f calm at x̄",
            HypothesisStatus::Satisfied,
            exact,
            "g − h is piecewise affine on a polyhedral domain, hence locally Lipschitz there",
        );
        let h_interior = self.h.in_domain_interior(x_bar)?;
        r.push(
            "∂h spongiously gap-continuous at x̄",
            if h_interior { HypothesisStatus::Satisfied } else { HypothesisStatus::Violated },
            exact,
            if h_interior {
                "x̄ ∈ int dom h: the convex subdifferential map is upper semicontinuous there"
            } else {
                "x̄ on the boundary of dom h: ∂h is empty at nearby points outside dom h"
            },
        );
        Ok(r)
    }

    /// Erosion route: `∂_{ε+η}g(x̄) ⊖* ∂_η h(x̄)`.
    pub fn dc_dini_subdifferential(
        &self,
        x_bar: &RationalVector,
        eps: &Rational,
        eta: &Rational,
        norm: NormSpec,
    ) -> Result<DcSubdifferential> {
        if eps.is_negative() || eta.is_negative() {
            return Err(Error::NegativeEps);
        }
        if !self.g.in_domain(x_bar)? {
            return Err(Error::PointOutsideDomain);
        }
        let total = eps + eta;
        let gs = self.g.eps_subdifferential_at(x_bar, &total, norm)?;
        let hs = self.h.eps_subdifferential_at(x_bar, eta, norm)?;
        let set = star_difference(&gs, &hs)?;
        Ok(DcSubdifferential { set, hypotheses: self.hypothesis_report(x_bar)? })
    }

    /// Definitional route: `⋂_j (∂g(x̄) + εB* − b_j)` over the active slopes
    /// `b_j` of `h`.
    pub fn polar_reduction_subdifferential(
        &self,
        x_bar: &RationalVector,
        eps: &Rational,
        norm: NormSpec,
    ) -> Result<Polyhedron> {
        if eps.is_negative() {
            return Err(Error::NegativeEps);
        }
        if !self.g.in_domain(x_bar)? {
            return Err(Error::PointOutsideDomain);
        }
        let dim = self.dim();
        let base = minkowski_sum(&self.g.subdifferential_at(x_bar)?, &dual_norm_ball(norm, eps, dim)?)?;
        let shifted = self
            .h
            .active_slopes(x_bar)
            .iter()
            .map(|b| minkowski_sum(&base, &Polyhedron::point(-b)))
            .collect::<Result<Vec<_>>>()?;
        intersect_all(dim, &shifted)
    }
}
