//! Cone-constrained DC optimality.
//!
//! The problem is `min g(x) - h(x)` over `A = {x ∈ C : Mx + c ∈ -K}` with
//! `g, h` PA convex, `C` a polyhedron and `K` a polyhedral cone. With
//! `K = {z : <k_i, z> ≤ 0}` the dual cone is `K⁺ = cone{-k_i}`, and the
//! multipliers active at `x̄` are the generators `-k_i` with
//! `<k_i, Mx̄ + c> = 0`.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dinioracle::{ProbeVerdict, SamplingPlan, ShellStat, Witness};
use crate::dinioracle::{best_of, terminal_verdict, ShellResult};
use crate::error::{Error, Result};
use crate::funcmodel::{pa_to_json, DCFunction, HypothesisReport, HypothesisStatus, Provenance};
use crate::polykernel::rational::serde_rational;
use crate::polykernel::{
    affine_image, cone_is_linear_subspace, conic_hull, int, minkowski_sum, normal_cone_at, support_function,
    Extended, Halfspace, NormSpec, Polyhedron, Rational, RationalVector,
};

/// Halvings tried when replaying a descent direction.
const MAX_HALVINGS: usize = 200;
/// Octaves below the shell radius covered by the blunt-minimality samples.
const BLUNT_OCTAVES: f64 = 8.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintSystem {
    #[serde(rename = "C")]
    pub c_set: Polyhedron,
    /// Rows of `M`, each of length `n`.
    pub k_matrix: Vec<RationalVector>,
    pub k_offset: RationalVector,
    #[serde(rename = "K")]
    pub k_cone: Polyhedron,
}

impl ConstraintSystem {
    pub fn new(c_set: Polyhedron, k_matrix: Vec<RationalVector>, k_offset: RationalVector, k_cone: Polyhedron) -> Result<Self> {
        let m = k_offset.dim();
        if k_matrix.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: k_matrix.len() });
        }
        for row in &k_matrix {
            row.check_dim(c_set.dim())?;
        }
        if k_cone.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: k_cone.dim() });
        }
        if m > 0 && !crate::polykernel::is_cone(&k_cone)? {
            return Err(Error::NotACone);
        }
        Ok(ConstraintSystem { c_set, k_matrix, k_offset, k_cone })
    }

    /// Only the set constraint `x ∈ C`.
    pub fn set_only(c_set: Polyhedron) -> Self {
        ConstraintSystem { c_set, k_matrix: vec![], k_offset: RationalVector(vec![]), k_cone: Polyhedron::whole_space(0) }
    }

    pub fn nonneg_orthant(m: usize) -> Polyhedron {
        let hs = (0..m).map(|i| Halfspace::new(-&RationalVector::unit(m, i), int(0))).collect();
        Polyhedron::from_hrep(m, hs).expect("valid orthant")
    }

    pub fn dim(&self) -> usize {
        self.c_set.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.k_offset.dim()
    }

    /// `k(x) = Mx + c`.
    pub fn k(&self, x: &RationalVector) -> RationalVector {
        RationalVector(self.k_matrix.iter().zip(&self.k_offset.0).map(|(row, c)| row.dot(x) + c).collect())
    }

    fn k_rows(&self) -> Vec<Vec<Rational>> {
        self.k_matrix.iter().map(|r| r.0.clone()).collect()
    }

    /// `Mᵀ z`.
    fn transpose_apply(&self, z: &RationalVector) -> RationalVector {
        let mut out = RationalVector::zeros(self.dim());
        for (row, zi) in self.k_matrix.iter().zip(&z.0) {
            out = &out + &row.scale(zi);
        }
        out
    }

    fn k_facets(&self) -> Result<Vec<Halfspace>> {
        if self.num_constraints() == 0 {
            return Ok(vec![]);
        }
        Ok(self.k_cone.dual_description()?.hrep()?.to_vec())
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub objective: DCFunction,
    pub constraints: ConstraintSystem,
}

impl ProblemInstance {
    pub fn new(objective: DCFunction, constraints: ConstraintSystem) -> Result<Self> {
        if objective.dim() != constraints.dim() {
            return Err(Error::DimensionMismatch { expected: objective.dim(), found: constraints.dim() });
        }
        Ok(ProblemInstance { objective, constraints })
    }

    /// Reads `{"objective", "C", "k": {"M", "c"}, "K"}`. A missing `k` means
    /// no cone constraint; a missing `K` is the nonnegative orthant.
    pub fn parse(v: &Value) -> Result<Self> {
        let obj = v.get("objective").ok_or_else(|| Error::Parse("problem needs `objective`".into()))?;
        let objective = match crate::funcmodel::FunctionSpec::parse(obj)? {
            crate::funcmodel::FunctionSpec::BlackBox(_) => {
                return Err(Error::Invalid("the objective must be PA convex or DC".into()))
            }
            f => f.to_dc()?,
        };
        let n = objective.dim();
        let c_set = match v.get("C") {
            None | Some(Value::Null) => Polyhedron::whole_space(n),
            Some(c) => serde_json::from_value::<Polyhedron>(c.clone())?,
        };
        let constraints = match v.get("k") {
            None | Some(Value::Null) => ConstraintSystem::set_only(c_set),
            Some(k) => {
                let rows: Vec<RationalVector> = serde_json::from_value(
                    k.get("M").cloned().ok_or_else(|| Error::Parse("`k` needs `M`".into()))?,
                )?;
                let offset: RationalVector = match k.get("c") {
                    None | Some(Value::Null) => RationalVector::zeros(rows.len()),
                    Some(c) => serde_json::from_value(c.clone())?,
                };
                let cone = match v.get("K") {
                    None | Some(Value::Null) => ConstraintSystem::nonneg_orthant(offset.dim()),
                    Some(c) => serde_json::from_value::<Polyhedron>(c.clone())?,
                };
                ConstraintSystem::new(c_set, rows, offset, cone)?
            }
        };
        ProblemInstance::new(objective, constraints)
    }

    pub fn from_str(s: &str) -> Result<Self> {
        Self::parse(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Value {
        let cs = &self.constraints;
        let mut v = json!({
            "objective": {"type": "dc", "g": pa_to_json(self.objective.g()), "h": pa_to_json(self.objective.h())},
            "C": cs.c_set,
        });
        if cs.num_constraints() > 0 {
            v["k"] = json!({"M": cs.k_matrix, "c": cs.k_offset});
            v["K"] = json!(cs.k_cone);
        }
        v
    }

    pub fn feasible_set(&self) -> Result<Polyhedron> {
        feasible_set(&self.constraints)
    }
}

/// `C ∩ {x : Mx + c ∈ -K}`, pulling back each facet of `K`.
pub fn feasible_set(cs: &ConstraintSystem) -> Result<Polyhedron> {
    let mut hs = cs.c_set.hrep()?.to_vec();
    for f in cs.k_facets()? {
        // <a, -(Mx + c)> ≤ b  ⟺  <-Mᵀa, x> ≤ b + <a, c>
        hs.push(Halfspace::new(-&cs.transpose_apply(&f.normal), &f.offset + f.normal.dot(&cs.k_offset)));
    }
    Polyhedron::from_hrep(cs.dim(), hs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Qualification {
    /// The cone `⋃_{λ>0} λ(k(C) + K)` is a closed linear subspace.
    Holds { cone: Polyhedron },
    Fails { cone: Polyhedron },
    /// `C` is unbounded, so the image was not computed.
    Undetermined { reason: String },
}

impl Qualification {
    pub fn holds(&self) -> bool {
        matches!(self, Qualification::Holds { .. })
    }
}

/// Tests whether `⋃_{λ>0} λ(k(C) + K)` is a closed linear subspace.
///
/// The union is a convex cone; if its closure is a subspace then the
/// union, which contains the relative interior of its closure, is that
/// subspace. So testing the closed conic hull is exact.
pub fn qualification_check(cs: &ConstraintSystem) -> Result<Qualification> {
    let m = cs.num_constraints();
    if m == 0 {
        return Ok(Qualification::Holds { cone: Polyhedron::whole_space(0) });
    }
    if !cs.c_set.is_bounded()? {
        return Err(Error::UnboundedC);
    }
    if cs.c_set.is_empty()? {
        return Ok(Qualification::Fails { cone: Polyhedron::empty(m) });
    }
    let image = affine_image(&cs.c_set, &cs.k_rows(), &cs.k_offset)?;
    let cone = conic_hull(&minkowski_sum(&image, &cs.k_cone)?)?;
    Ok(if cone_is_linear_subspace(&cone)? { Qualification::Holds { cone } } else { Qualification::Fails { cone } })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalCones {
    /// `N(A, x̄)` from the H-representation of `A`.
    pub direct: Polyhedron,
    /// `cone{Mᵀz* : z* active generator of K⁺} + N(C, x̄)`.
    pub lagrange: Polyhedron,
    pub agree: bool,
}

fn require_feasible(cs: &ConstraintSystem, a: &Polyhedron, x_bar: &RationalVector) -> Result<()> {
    x_bar.check_dim(cs.dim())?;
    if !a.contains_point(x_bar)? {
        return Err(Error::InfeasiblePoint);
    }
    Ok(())
}

pub fn normal_cone_feasible(cs: &ConstraintSystem, x_bar: &RationalVector) -> Result<NormalCones> {
    let a = feasible_set(cs)?;
    require_feasible(cs, &a, x_bar)?;
    let direct = normal_cone_at(&a, x_bar)?;
    let kx = cs.k(x_bar);
    let rays: Vec<RationalVector> = cs
        .k_facets()?
        .iter()
        .filter(|f| f.normal.dot(&kx).is_zero())
        .map(|f| cs.transpose_apply(&-&f.normal))
        .filter(|r| !r.is_zero())
        .map(|r| r.primitive())
        .collect();
    let multipliers = Polyhedron::cone(cs.dim(), rays)?;
    let lagrange = minkowski_sum(&multipliers, &normal_cone_at(&cs.c_set, x_bar)?)?;
    let agree = direct.same_set(&lagrange)?;
    Ok(NormalCones { direct, lagrange, agree })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum InclusionResult {
    Holds,
    /// A vertex of `∂h(x̄)` outside the right-hand side.
    Fails { witness: RationalVector },
}

impl InclusionResult {
    pub fn holds(&self) -> bool {
        matches!(self, InclusionResult::Holds)
    }
}

fn vertex_inclusion(sub_h: &Polyhedron, rhs: &Polyhedron) -> Result<InclusionResult> {
    for v in &sub_h.vrep()?.vertices {
        if !rhs.contains_point(v)? {
            return Ok(InclusionResult::Fails { witness: v.clone() });
        }
    }
    Ok(InclusionResult::Holds)
}

/// Feasibility and `x̄ ∈ int dom g`; returns the feasible set.
fn check_point(p: &ProblemInstance, x_bar: &RationalVector) -> Result<Polyhedron> {
    let a = p.feasible_set()?;
    require_feasible(&p.constraints, &a, x_bar)?;
    if !p.objective.g().in_domain_interior(x_bar)? {
        return Err(Error::PointNotInteriorDomG);
    }
    Ok(a)
}

/// `∂h(x̄) ⊆ ∂g(x̄) + N(A, x̄)`, checked vertex by vertex.
pub fn check_inclusion_28(p: &ProblemInstance, x_bar: &RationalVector) -> Result<InclusionResult> {
    let a = check_point(p, x_bar)?;
    let rhs = minkowski_sum(&p.objective.g().subdifferential_at(x_bar)?, &normal_cone_at(&a, x_bar)?)?;
    vertex_inclusion(&p.objective.h().subdifferential_at(x_bar)?, &rhs)
}

/// A feasible direction along which `f` decreases at a linear rate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentWitness {
    pub direction: RationalVector,
    /// Exact one-sided derivative of `f + δ_A` along `direction`.
    #[serde(with = "serde_rational")]
    pub rate: Rational,
    /// `-rate / ||direction||₁`: blunt minimality fails for every smaller ε.
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    /// A step with `x̄ + t d ∈ A` and `f(x̄ + t d) < f(x̄) - (margin/2) t ||d||₁`.
    #[serde(with = "serde_rational")]
    pub step: Rational,
}

impl DescentWitness {
    /// Checks the decrease at `step` with slack `eps`, exactly.
    pub fn replay(&self, p: &ProblemInstance, x_bar: &RationalVector, eps: &Rational) -> Result<bool> {
        decrease_at(p, &p.feasible_set()?, x_bar, &self.direction, &self.step, eps)
    }
}

fn decrease_at(
    p: &ProblemInstance,
    a: &Polyhedron,
    x_bar: &RationalVector,
    d: &RationalVector,
    t: &Rational,
    eps: &Rational,
) -> Result<bool> {
    let x = x_bar + &d.scale(t);
    if !a.contains_point(&x)? {
        return Ok(false);
    }
    match (p.objective.evaluate(&x)?, p.objective.evaluate(x_bar)?) {
        (Extended::Finite(fx), Extended::Finite(fb)) => Ok(fx < fb - eps * t * d.norm_l1()),
        _ => Ok(false),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum OptimalityVerdict {
    BluntMinimizerAllEps,
    NotBluntMinimizer { witness: DescentWitness },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub feasible_at: bool,
    pub qualification: Qualification,
    pub normal_cone_direct: Polyhedron,
    pub normal_cone_lagrange: Option<Polyhedron>,
    pub routes_agree: bool,
    /// `∂h(x̄) ⊆ ∂g(x̄) + N(A, x̄)`.
    pub inclusion28: InclusionResult,
    /// `∂h(x̄) ⊆ ∂(g + δ_A)(x̄)`, from the restricted function.
    pub inclusion30: InclusionResult,
    /// Whether the multiplier form of the normal cone is backed by the
    /// qualification.
    pub lagrange_validated: bool,
    pub verdict: OptimalityVerdict,
    pub hypothesis_report: HypothesisReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl OptimalityCertificate {
    pub fn is_minimizer(&self) -> bool {
        self.verdict == OptimalityVerdict::BluntMinimizerAllEps
    }
}

/// Facet of `s` most violated by `v`, measured per unit L1 length of the
/// normal; `s` is `∂(g + δ_A)(x̄)`.
fn separating_direction(s: &Polyhedron, v: &RationalVector) -> Result<RationalVector> {
    let canon = s.dual_description()?;
    let mut best: Option<(Rational, RationalVector)> = None;
    for h in canon.hrep()? {
        let excess = h.normal.dot(v) - &h.offset;
        if !excess.is_positive() {
            continue;
        }
        let d = h.normal.primitive();
        let score = excess / h.normal.norm_l1();
        if best.as_ref().map_or(true, |(b, _)| &score > b) {
            best = Some((score, d));
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::Internal("no separating facet for a point outside the set".into()))
}

fn descent_witness(
    p: &ProblemInstance,
    a: &Polyhedron,
    s: &Polyhedron,
    x_bar: &RationalVector,
    v: &RationalVector,
) -> Result<Option<DescentWitness>> {
    let d = separating_direction(s, v)?;
    let sg = match support_function(s, &d)? {
        Extended::Finite(r) => r,
        Extended::PosInfinity => return Ok(None),
    };
    let sh = p.objective.h().active_slopes(x_bar).iter().map(|b| b.dot(&d)).max().expect("nonempty");
    let rate = sg - sh;
    if !rate.is_negative() {
        return Ok(None);
    }
    let margin = -&rate / d.norm_l1();
    let half = &margin / int(2);
    let mut t = Rational::one();
    for _ in 0..MAX_HALVINGS {
        if decrease_at(p, a, x_bar, &d, &t, &half)? {
            return Ok(Some(DescentWitness { direction: d, rate, margin, step: t }));
        }
        t /= int(2);
    }
    Ok(None)
}

/// Decides whether `x̄` is a spongiously local ε-blunt minimizer of `f` on
/// `A` for every `ε > 0`.
///
/// The decision uses the multiplier inclusion when the qualification holds
/// and the restricted inclusion otherwise; both are reported.
pub fn certify_blunt_minimizer(p: &ProblemInstance, x_bar: &RationalVector) -> Result<OptimalityCertificate> {
    let a = check_point(p, x_bar)?;
    let cs = &p.constraints;
    let mut notes = Vec::new();
    let qualification = match qualification_check(cs) {
        Ok(q) => q,
        Err(Error::UnboundedC) => Qualification::Undetermined { reason: "C is unbounded".into() },
        Err(e) => return Err(e),
    };
    let cones = normal_cone_feasible(cs, x_bar)?;
    let lagrange_validated = qualification.holds();
    if !lagrange_validated {
        notes.push("qualification not established: the multiplier form of N(A, x̄) is not validated".into());
    }
    if !cones.agree {
        notes.push("the direct and multiplier normal cones differ".into());
    }
    let g = p.objective.g();
    let sub_h = p.objective.h().subdifferential_at(x_bar)?;
    let s29 = minkowski_sum(&g.subdifferential_at(x_bar)?, &cones.direct)?;
    let inclusion28 = vertex_inclusion(&sub_h, &s29)?;
    let s30 = g.restrict(&a)?.subdifferential_at(x_bar)?;
    let inclusion30 = vertex_inclusion(&sub_h, &s30)?;
    let (decisive, set) = if lagrange_validated { (&inclusion28, &s29) } else { (&inclusion30, &s30) };
    let verdict = match decisive {
        InclusionResult::Holds => OptimalityVerdict::BluntMinimizerAllEps,
        InclusionResult::Fails { witness } => match descent_witness(p, &a, set, x_bar, witness)? {
            Some(w) => OptimalityVerdict::NotBluntMinimizer { witness: w },
            None => OptimalityVerdict::Inconclusive { reason: "no replayable descent step found".into() },
        },
    };
    let mut report = p.objective.hypothesis_report(x_bar)?;
    report.push(
        "x̄ ∈ int dom g ∩ A",
        HypothesisStatus::Satisfied,
        Provenance::ExactByConvexity,
        "exact membership",
    );
    report.push(
        "g lower semicontinuous approximately convex",
        HypothesisStatus::Satisfied,
        Provenance::ExactByConvexity,
        "g is PA convex",
    );
    report.push(
        "constraint qualification",
        match &qualification {
            Qualification::Holds { .. } => HypothesisStatus::Satisfied,
            Qualification::Fails { .. } => HypothesisStatus::Violated,
            Qualification::Undetermined { .. } => HypothesisStatus::Unknown,
        },
        Provenance::ExactByConvexity,
        "conic hull of k(C) + K tested for being a subspace",
    );
    Ok(OptimalityCertificate {
        feasible_at: true,
        qualification,
        normal_cone_direct: cones.direct,
        normal_cone_lagrange: Some(cones.lagrange),
        routes_agree: cones.agree,
        inclusion28,
        inclusion30,
        lagrange_validated,
        verdict,
        hypothesis_report: report,
        notes,
    })
}

/// Feasible points of the box `x̄ + r[-1, 1]ⁿ` as floats, for sampling
/// along the feasible set when it is thin.
fn local_vertices(a: &Polyhedron, x_bar: &RationalVector, r: f64) -> Result<Vec<Vec<f64>>> {
    let rr = crate::polykernel::rational::from_f64(r);
    let n = x_bar.dim();
    let lo = RationalVector(x_bar.0.iter().map(|x| x - &rr).collect());
    let hi = RationalVector(x_bar.0.iter().map(|x| x + &rr).collect());
    let local = crate::polykernel::intersect(a, &Polyhedron::cube(&lo, &hi)?)?;
    let xb = x_bar.to_f64();
    Ok(local
        .vrep()?
        .vertices
        .iter()
        .map(|v| v.to_f64().iter().zip(&xb).map(|(a, b)| (a - b) / r).collect::<Vec<f64>>())
        .filter(|d: &Vec<f64>| d.iter().any(|c| *c != 0.0) && d.len() == n)
        .collect())
}

/// `f(x̄) - eps ||x - x̄|| - f(x)` less a rounding guard; positive means a
/// violation of blunt minimality at the feasible point `x`.
pub fn blunt_margin(p: &ProblemInstance, x_bar: &[f64], eps: f64, x: &[f64], norm: NormSpec) -> Option<f64> {
    let fb = p.objective.eval_f64(x_bar);
    let fx = p.objective.eval_f64(x);
    if !fx.is_finite() || !fb.is_finite() {
        return None;
    }
    let d: Vec<f64> = x.iter().zip(x_bar).map(|(a, b)| a - b).collect();
    let nrm = norm.eval_f64(&d);
    let guard = 1e-12 * (fx.abs() + fb.abs() + eps * nrm) + f64::MIN_POSITIVE;
    Some(fb - eps * nrm - fx - guard)
}

/// Samples feasible points near `x̄` for `f(x) < f(x̄) - ε ||x - x̄||`.
pub fn blunt_min_probe(p: &ProblemInstance, x_bar: &RationalVector, eps: f64, plan: &SamplingPlan) -> Result<ProbeVerdict> {
    plan.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    let a = p.feasible_set()?;
    require_feasible(&p.constraints, &a, x_bar)?;
    let n = x_bar.dim();
    let xb = x_bar.to_f64();
    let dirs = local_vertices(&a, x_bar, plan.shell_radii[0])?;
    let shells = plan
        .shell_radii
        .par_iter()
        .enumerate()
        .map(|(s, &delta)| -> Result<ShellResult> {
            let mut rng = plan.rng(0xB1, s);
            let mut inf = f64::INFINITY;
            let mut cands = Vec::new();
            for i in 0..plan.samples_per_shell {
                let rho = delta * 2f64.powf(-BLUNT_OCTAVES * rng.gen::<f64>());
                let u: Vec<f64> = if i % 2 == 1 && !dirs.is_empty() {
                    if rng.gen::<bool>() {
                        dirs[rng.gen_range(0..dirs.len())].clone()
                    } else {
                        let w: Vec<f64> = dirs.iter().map(|_| rng.gen::<f64>()).collect();
                        let tot: f64 = w.iter().sum();
                        (0..n).map(|j| dirs.iter().zip(&w).map(|(d, wi)| d[j] * wi).sum::<f64>() / tot).collect()
                    }
                } else {
                    (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect()
                };
                let x = xb.iter().zip(&u).map(|(a, b)| a + rho * b).collect::<Vec<f64>>();
                if x == xb || !a.contains_point(&RationalVector::from_f64_exact(&x))? {
                    continue;
                }
                let Some(m) = blunt_margin(p, &xb, eps, &x, plan.norm) else { continue };
                let d: Vec<f64> = x.iter().zip(&xb).map(|(a, b)| a - b).collect();
                inf = inf.min(-m / plan.norm.eval_f64(&d));
                if m > 0.0 {
                    cands.push((m, Witness::Blunt { x, margin: m }));
                }
            }
            Ok(ShellResult { stat: ShellStat { radius: delta, inf }, witness: best_of(cands) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(terminal_verdict(shells, plan.stabilization_window))
}

/// Recomputes the margin of a blunt-minimality witness; `None` if the point
/// is infeasible or outside `dom g`.
pub fn replay_blunt(
    p: &ProblemInstance,
    x_bar: &RationalVector,
    eps: f64,
    w: &Witness,
    plan: &SamplingPlan,
) -> Result<Option<f64>> {
    let Witness::Blunt { x, .. } = w else {
        return Err(Error::Invalid("not a blunt-minimality witness".into()));
    };
    if !p.feasible_set()?.contains_point(&RationalVector::from_f64_exact(x))? {
        return Ok(None);
    }
    Ok(blunt_margin(p, &x_bar.to_f64(), eps, x, plan.norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::PAConvexFunction;
    use crate::polykernel::rat;

    fn v(xs: &[i64]) -> RationalVector {
        RationalVector::from_i64(xs)
    }

    fn sq(lo: i64, hi: i64) -> Polyhedron {
        Polyhedron::cube(&v(&[lo, lo]), &v(&[hi, hi])).unwrap()
    }

    fn cs(c_set: Polyhedron, row: &[i64], c: i64) -> ConstraintSystem {
        ConstraintSystem::new(c_set, vec![v(row)], v(&[c]), ConstraintSystem::nonneg_orthant(1)).unwrap()
    }

    /// `g = ||x||₁`, `h = s x₁` on `[-1,1]²` with `x₁ ≥ 0`.
    fn cone_dc(s: i64) -> ProblemInstance {
        let g = PAConvexFunction::scaled_l1(2, &int(1)).unwrap();
        let h = PAConvexFunction::affine(v(&[s, 0]), int(0));
        ProblemInstance::new(DCFunction::new(g, h).unwrap(), cs(sq(-1, 1), &[-1, 0], 0)).unwrap()
    }

    #[test]
    fn feasible_set_pulls_back_the_cone() {
        let a = feasible_set(&cs(sq(-1, 1), &[1, 1], -1)).unwrap();
        let expect = Polyhedron::from_vrep(2, vec![v(&[-1, -1]), v(&[1, -1]), v(&[1, 0]), v(&[0, 1]), v(&[-1, 1])], vec![])
            .unwrap();
        assert!(a.same_set(&expect).unwrap());
        let eq = ConstraintSystem::new(sq(-1, 1), vec![v(&[1, -1])], v(&[0]), Polyhedron::point(v(&[0]))).unwrap();
        let diag = Polyhedron::from_vrep(2, vec![v(&[-1, -1]), v(&[1, 1])], vec![]).unwrap();
        assert!(feasible_set(&eq).unwrap().same_set(&diag).unwrap());
        assert!(feasible_set(&cs(sq(-1, 1), &[1, 0], 5)).unwrap().is_empty().unwrap());
    }

    #[test]
    fn qualification_examples() {
        let q = qualification_check(&cs(sq(0, 1), &[1, 0], -1)).unwrap();
        assert!(q.holds());
        let Qualification::Fails { cone } = qualification_check(&cs(sq(0, 1), &[1, 0], 0)).unwrap() else {
            panic!("expected failure")
        };
        assert!(cone.same_set(&Polyhedron::cone(1, vec![v(&[1])]).unwrap()).unwrap());
        let zero = ConstraintSystem::new(sq(0, 1), vec![v(&[0, 0])], v(&[0]), Polyhedron::point(v(&[0]))).unwrap();
        assert!(qualification_check(&zero).unwrap().holds());
        let unbounded = cs(Polyhedron::whole_space(2), &[1, 0], 0);
        assert_eq!(qualification_check(&unbounded).unwrap_err(), Error::UnboundedC);
    }

    #[test]
    fn normal_cone_routes() {
        let sys = cs(sq(-1, 1), &[-1, 0], 0);
        let nc = normal_cone_feasible(&sys, &v(&[0, 0])).unwrap();
        let expect = Polyhedron::cone(2, vec![v(&[-1, 0])]).unwrap();
        assert!(nc.agree);
        assert!(nc.direct.same_set(&expect).unwrap());
        let inner = normal_cone_feasible(&sys, &RationalVector(vec![rat(1, 2), int(0)])).unwrap();
        assert!(inner.agree && inner.direct.same_set(&Polyhedron::point(v(&[0, 0]))).unwrap());
        let corner = normal_cone_feasible(&sys, &v(&[1, 1])).unwrap();
        assert!(corner.agree);
        assert!(corner.direct.same_set(&Polyhedron::cone(2, vec![v(&[1, 0]), v(&[0, 1])]).unwrap()).unwrap());
        assert_eq!(normal_cone_feasible(&sys, &v(&[-1, 0])).unwrap_err(), Error::InfeasiblePoint);
    }

    #[test]
    fn inclusion_28_examples() {
        assert_eq!(check_inclusion_28(&cone_dc(1), &v(&[0, 0])).unwrap(), InclusionResult::Holds);
        assert_eq!(check_inclusion_28(&cone_dc(3), &v(&[0, 0])).unwrap(), InclusionResult::Fails { witness: v(&[3, 0]) });
        let g = PAConvexFunction::scaled_l1(2, &int(1)).unwrap();
        let h = PAConvexFunction::scaled_abs_coord(2, 0, &int(1));
        let free = ProblemInstance::new(DCFunction::new(g, h).unwrap(), ConstraintSystem::set_only(Polyhedron::whole_space(2)))
            .unwrap();
        let direct = crate::calculus::local_min_necessary(&free.objective, &v(&[0, 0])).unwrap();
        assert_eq!(check_inclusion_28(&free, &v(&[0, 0])).unwrap().holds(), direct.holds());
    }

    #[test]
    fn certify_positive_instance() {
        let cert = certify_blunt_minimizer(&cone_dc(1), &v(&[0, 0])).unwrap();
        assert_eq!(cert.verdict, OptimalityVerdict::BluntMinimizerAllEps);
        assert!(cert.qualification.holds() && cert.routes_agree && cert.lagrange_validated);
        assert!(cert.hypothesis_report.theorem_certified());
        let same = ProblemInstance::new(
            DCFunction::new(cone_dc(1).objective.g().clone(), cone_dc(1).objective.g().clone()).unwrap(),
            cs(sq(-1, 1), &[-1, 0], 0),
        )
        .unwrap();
        assert!(certify_blunt_minimizer(&same, &RationalVector(vec![rat(1, 3), rat(-1, 2)])).unwrap().is_minimizer());
    }

    #[test]
    fn certify_negative_instance() {
        let p = cone_dc(3);
        let x_bar = v(&[0, 0]);
        let cert = certify_blunt_minimizer(&p, &x_bar).unwrap();
        let OptimalityVerdict::NotBluntMinimizer { witness } = &cert.verdict else { panic!("{:?}", cert.verdict) };
        assert_eq!(witness.direction, v(&[1, 0]));
        assert_eq!(witness.rate, int(-2));
        assert_eq!(witness.margin, int(2));
        assert!(witness.replay(&p, &x_bar, &int(1)).unwrap());
        // f(t, 0) = -2t exactly.
        assert!(!witness.replay(&p, &x_bar, &int(2)).unwrap());
    }

    #[test]
    fn unbounded_c_decides_directly() {
        let g = PAConvexFunction::scaled_l1(2, &int(1)).unwrap();
        let h = PAConvexFunction::affine(v(&[3, 0]), int(0));
        let p = ProblemInstance::new(DCFunction::new(g, h).unwrap(), cs(Polyhedron::whole_space(2), &[-1, 0], 0)).unwrap();
        let cert = certify_blunt_minimizer(&p, &v(&[0, 0])).unwrap();
        assert!(matches!(cert.qualification, Qualification::Undetermined { .. }));
        assert!(!cert.lagrange_validated);
        assert!(matches!(cert.verdict, OptimalityVerdict::NotBluntMinimizer { .. }));
    }

    #[test]
    fn point_errors() {
        assert_eq!(certify_blunt_minimizer(&cone_dc(1), &v(&[-1, 0])).unwrap_err(), Error::InfeasiblePoint);
        let g = PAConvexFunction::new(
            PAConvexFunction::scaled_l1(2, &int(1)).unwrap().pieces().to_vec(),
            sq(0, 1),
        )
        .unwrap();
        let h = PAConvexFunction::affine(v(&[0, 0]), int(0));
        let p = ProblemInstance::new(DCFunction::new(g, h).unwrap(), cs(sq(-1, 1), &[-1, 0], 0)).unwrap();
        assert_eq!(check_inclusion_28(&p, &v(&[0, 0])).unwrap_err(), Error::PointNotInteriorDomG);
    }

    #[test]
    fn probe_agrees_with_certificate() {
        let plan = SamplingPlan::default();
        let x_bar = v(&[0, 0]);
        assert!(blunt_min_probe(&cone_dc(1), &x_bar, 0.5, &plan).unwrap().is_holds());
        let p = cone_dc(3);
        let verdict = blunt_min_probe(&p, &x_bar, 0.5, &plan).unwrap();
        assert!(verdict.is_fail());
        let w = verdict.witness.unwrap();
        assert!(w.point()[0] > 0.0);
        assert!(replay_blunt(&p, &x_bar, 0.5, &w, &plan).unwrap().unwrap() > 0.0);
        assert!(blunt_min_probe(&p, &x_bar, 10.0, &plan).unwrap().is_holds());
    }

    #[test]
    fn thin_feasible_set_is_sampled() {
        // A is the diagonal segment; f = x₂ - 2x₁ decreases along it.
        let g = PAConvexFunction::affine(v(&[-2, 1]), int(0));
        let h = PAConvexFunction::affine(v(&[0, 0]), int(0));
        let sys = ConstraintSystem::new(sq(-1, 1), vec![v(&[1, -1])], v(&[0]), Polyhedron::point(v(&[0]))).unwrap();
        let p = ProblemInstance::new(DCFunction::new(g, h).unwrap(), sys).unwrap();
        assert!(blunt_min_probe(&p, &v(&[0, 0]), 0.25, &SamplingPlan::default()).unwrap().is_fail());
    }

    #[test]
    fn problem_json_round_trip() {
        let p = cone_dc(3);
        let back = ProblemInstance::parse(&p.to_json()).unwrap();
        assert_eq!(back.to_json(), p.to_json());
        let text = r#"{"objective":{"type":"dc",
            "g":{"type":"pa_convex","pieces":[{"slope":["1","0"],"intercept":"0"},{"slope":["-1","0"],"intercept":"0"}]},
            "h":{"type":"pa_convex","pieces":[{"slope":["0","0"],"intercept":"0"}]}},
            "C":{"dim":2,"vrep":{"vertices":[["-1","-1"],["1","1"]],"rays":[]}},
            "k":{"M":[["-1","0"]],"c":["0"]}}"#;
        let q = ProblemInstance::from_str(text).unwrap();
        assert_eq!(q.constraints.num_constraints(), 1);
        assert!(q.constraints.k_cone.same_set(&ConstraintSystem::nonneg_orthant(1)).unwrap());
    }
}
