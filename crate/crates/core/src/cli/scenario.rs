use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::render;
use super::{Outcome, Report};
use crate::calculus::{
    check_corollary11, check_corollary12, check_difference_formula, check_intersection_formula, check_sum_rule,
    local_min_necessary, ClaimId, Cor12Variant,
};
use crate::dinioracle::{
    approx_regularity_probe, calmness_probe, dini_directional_estimate, eps_subgradient_membership_probe,
    gap_continuity_probe, ProbeStatus, ProbeVerdict, RegularityMode, SamplingPlan, SubdifferentialMap,
};
use crate::error::{Error, Result};
use crate::funcmodel::{DCFunction, FunctionSpec, PAConvexFunction};
use crate::optimality::{blunt_min_probe, certify_blunt_minimizer, OptimalityVerdict, ProblemInstance};
use crate::polykernel::rational::to_f64;
use crate::polykernel::{limits, parse_rational, star_difference, NormSpec, Polyhedron, Rational, RationalVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Subdiff,
    Stardiff,
    Check,
    Certify,
    Probe,
}

impl ScenarioKind {
    fn name(self) -> &'static str {
        match self {
            ScenarioKind::Subdiff => "subdiff",
            ScenarioKind::Stardiff => "stardiff",
            ScenarioKind::Check => "check",
            ScenarioKind::Certify => "certify",
            ScenarioKind::Probe => "probe",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverrides {
    /// `[first, last]`: shells `2^-first, ..., 2^-last`.
    pub radii: Option<(i32, i32)>,
    pub samples: Option<usize>,
    pub window: Option<usize>,
    pub tol: Option<f64>,
}

/// A scenario file. Function, set and problem fields hold either an inline
/// JSON object or a path relative to the scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Check: claim id such as `equality22`. Probe: `calmness`, `dini`,
    /// `regularity`, `membership`, `gap` or `blunt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Value>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub set_a: Option<Value>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub set_b: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgradient: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<Value>>,
    /// Subdiff: `erosion` (default) or `polar`. Regularity probe: `convex`,
    /// `starshaped` or `directional`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanOverrides>,
    /// Outcome a corpus run expects; `holds` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Outcome>,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Scenario {
            kind,
            description: None,
            claim: None,
            function: None,
            g: None,
            set_a: None,
            set_b: None,
            problem: None,
            point: None,
            direction: None,
            subgradient: None,
            eps: None,
            eta: None,
            alpha: None,
            mu: None,
            etas: None,
            mode: None,
            norm: None,
            seed: None,
            plan: None,
            expect: None,
        }
    }

    pub fn parse(v: &Value) -> Result<Self> {
        Ok(serde_json::from_value(v.clone())?)
    }

    /// Required fields for the kind, checked before anything is computed.
    pub fn validate(&self) -> Result<()> {
        let need = |field: &Option<Value>, name: &str| -> Result<()> {
            match field {
                Some(_) => Ok(()),
                None => Err(Error::Invalid(format!("{} scenario needs `{name}`", self.kind.name()))),
            }
        };
        match self.kind {
            ScenarioKind::Subdiff => {
                need(&self.function, "function")?;
                need(&self.point, "point")
            }
            ScenarioKind::Stardiff => {
                need(&self.set_a, "A")?;
                need(&self.set_b, "B")
            }
            ScenarioKind::Check => {
                self.claim.as_deref().map(parse_claim).transpose()?.ok_or_else(|| {
                    Error::Invalid("check scenario needs `claim`".into())
                })?;
                need(&self.function, "function")?;
                need(&self.point, "point")
            }
            ScenarioKind::Certify => {
                need(&self.problem, "problem")?;
                need(&self.point, "point")
            }
            ScenarioKind::Probe => {
                let probe = self.claim.as_deref().ok_or_else(|| Error::Invalid("probe scenario needs `claim`".into()))?;
                need(&self.point, "point")?;
                match probe {
                    "blunt" => need(&self.problem, "problem"),
                    "calmness" | "regularity" | "gap" => need(&self.function, "function"),
                    "dini" => {
                        need(&self.function, "function")?;
                        need(&self.direction, "direction")
                    }
                    "membership" => {
                        need(&self.function, "function")?;
                        need(&self.subgradient, "subgradient")
                    }
                    other => Err(Error::Invalid(format!("unknown probe `{other}`"))),
                }
            }
        }
    }
}

/// Command-line settings that take precedence over scenario fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub norm: Option<NormSpec>,
    pub eps: Option<Rational>,
    pub eta: Option<Rational>,
    pub point: Option<RationalVector>,
    pub max_dim: Option<usize>,
}

fn parse_claim(s: &str) -> Result<ClaimId> {
    Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "sum_rule12" | "sumrule12" => ClaimId::SumRule12,
        "inclusion13" => ClaimId::Inclusion13,
        "equality22" => ClaimId::Equality22,
        "equality26" => ClaimId::Equality26,
        "intersection27" => ClaimId::Intersection27,
        "cor11" => ClaimId::Cor11,
        "cor12a" => ClaimId::Cor12a,
        "cor12b" => ClaimId::Cor12b,
        "local_min_necessary" | "localminnecessary" => ClaimId::LocalMinNecessary,
        other => return Err(Error::Invalid(format!("unknown claim `{other}`"))),
    })
}

fn rational_of(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

fn vector_of(v: &Value) -> Result<RationalVector> {
    match v {
        Value::String(s) => RationalVector::parse_list(s),
        Value::Number(_) => Ok(RationalVector(vec![rational_of(v)?])),
        Value::Array(xs) => xs.iter().map(rational_of).collect::<Result<Vec<_>>>().map(RationalVector),
        other => Err(Error::Parse(format!("expected a point, got {other}"))),
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    base: PathBuf,
    ov: &'a Overrides,
}

impl Ctx<'_> {
    /// Inline JSON, or the contents of a file relative to the scenario.
    fn load(&self, v: &Value) -> Result<Value> {
        match v {
            Value::String(p) => {
                let path = self.base.join(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Ok(serde_json::from_str(&text)?)
            }
            other => Ok(other.clone()),
        }
    }

    fn function(&self) -> Result<FunctionSpec> {
        let f = FunctionSpec::parse(&self.load(self.sc.function.as_ref().expect("validated"))?)?;
        self.check_dim(f.dim())?;
        Ok(f)
    }

    fn dc(&self) -> Result<DCFunction> {
        self.function()?.to_dc()
    }

    fn pa(&self, v: &Option<Value>, name: &str) -> Result<PAConvexFunction> {
        let v = v.as_ref().ok_or_else(|| Error::Invalid(format!("scenario needs `{name}`")))?;
        match FunctionSpec::parse(&self.load(v)?)? {
            FunctionSpec::PaConvex(f) => Ok(f),
            _ => Err(Error::Invalid(format!("`{name}` must be a pa_convex function"))),
        }
    }

    fn polyhedron(&self, v: &Option<Value>) -> Result<Polyhedron> {
        let p: Polyhedron = serde_json::from_value(self.load(v.as_ref().expect("validated"))?)?;
        self.check_dim(p.dim())?;
        Ok(p)
    }

    fn problem(&self) -> Result<ProblemInstance> {
        let p = ProblemInstance::parse(&self.load(self.sc.problem.as_ref().expect("validated"))?)?;
        self.check_dim(p.objective.dim())?;
        Ok(p)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        let cap = self.ov.max_dim.unwrap_or_else(|| limits().max_dim);
        if dim > cap {
            return Err(Error::CapExceeded { what: "dimension", limit: cap });
        }
        Ok(())
    }

    fn point(&self) -> Result<RationalVector> {
        match &self.ov.point {
            Some(p) => Ok(p.clone()),
            None => vector_of(self.sc.point.as_ref().expect("validated")),
        }
    }

    fn rational(&self, over: &Option<Rational>, field: &Option<Value>, default: i64) -> Result<Rational> {
        match (over, field) {
            (Some(r), _) => Ok(r.clone()),
            (None, Some(v)) => rational_of(v),
            (None, None) => Ok(crate::polykernel::int(default)),
        }
    }

    fn eps(&self) -> Result<Rational> {
        self.rational(&self.ov.eps, &self.sc.eps, 0)
    }

    fn eta(&self) -> Result<Rational> {
        self.rational(&self.ov.eta, &self.sc.eta, 0)
    }

    fn norm(&self) -> Result<NormSpec> {
        match (&self.ov.norm, &self.sc.norm) {
            (Some(n), _) => Ok(*n),
            (None, Some(s)) => s.parse(),
            (None, None) => Ok(NormSpec::L1),
        }
    }

    fn plan(&self) -> Result<SamplingPlan> {
        let mut plan = SamplingPlan { norm: self.norm()?, ..SamplingPlan::default() };
        if let Some(o) = &self.sc.plan {
            if let Some((a, b)) = o.radii {
                plan = plan.with_radii(a, b);
            }
            if let Some(n) = o.samples {
                plan.samples_per_shell = n;
            }
            if let Some(w) = o.window {
                plan.stabilization_window = w;
            }
            if let Some(t) = o.tol {
                plan.stabilization_tol = t;
            }
        }
        if let Some(s) = self.ov.seed.or(self.sc.seed) {
            plan.seed = s;
        }
        plan.validate()?;
        Ok(plan)
    }

    fn list(&self, field: &Option<Vec<Value>>, name: &str) -> Result<Vec<Rational>> {
        field
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("claim needs `{name}`")))?
            .iter()
            .map(rational_of)
            .collect()
    }
}

/// Loads and runs a scenario file. Errors become exit-code-3 reports.
pub fn run_scenario(path: &Path, ov: &Overrides) -> Report {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let loaded = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        .and_then(|t| Ok(serde_json::from_str::<Value>(&t)?))
        .and_then(|v| Scenario::parse(&v));
    match loaded {
        Ok(sc) => run_scenario_value(&sc, path.parent().unwrap_or(Path::new(".")), &name, ov),
        Err(e) => Report::error(&name, "unknown", &e),
    }
}

pub fn run_scenario_value(sc: &Scenario, base: &Path, name: &str, ov: &Overrides) -> Report {
    let mut sc = sc.clone();
    if let Some(p) = &ov.point {
        sc.point = Some(serde_json::to_value(p).expect("points serialize"));
    }
    let sc = &sc;
    let ctx = Ctx { sc, base: base.to_path_buf(), ov };
    let kind = sc.kind.name();
    match sc.validate().and_then(|_| dispatch(&ctx, name)) {
        Ok(r) => r,
        Err(e) => {
            let mut r = Report::error(name, kind, &e);
            r.claim = sc.claim.clone();
            r
        }
    }
}

fn dispatch(ctx: &Ctx, name: &str) -> Result<Report> {
    let sc = ctx.sc;
    let kind = sc.kind.name();
    match sc.kind {
        ScenarioKind::Subdiff => {
            let dc = ctx.dc()?;
            let x = ctx.point()?;
            let (eps, eta, norm) = (ctx.eps()?, ctx.eta()?, ctx.norm()?);
            let (set, hyp) = match sc.mode.as_deref().unwrap_or("erosion") {
                "erosion" => {
                    let s = dc.dc_dini_subdifferential(&x, &eps, &eta, norm)?;
                    (s.set, s.hypotheses)
                }
                "polar" => (dc.polar_reduction_subdifferential(&x, &eps, norm)?, dc.hypothesis_report(&x)?),
                other => return Err(Error::Invalid(format!("unknown subdiff mode `{other}`"))),
            };
            let set = set.dual_description()?;
            let text = render::subdiff(&x, &set, &hyp);
            Ok(Report::new(name, kind, None, Outcome::Holds, json!({"set": set, "hypothesis_report": hyp}), text))
        }
        ScenarioKind::Stardiff => {
            let a = ctx.polyhedron(&sc.set_a)?;
            let b = ctx.polyhedron(&sc.set_b)?;
            let set = star_difference(&a, &b)?.dual_description()?;
            let text = format!("{}\n", serde_json::to_string_pretty(&set)?);
            Ok(Report::new(name, kind, None, Outcome::Holds, json!({"set": set}), text))
        }
        ScenarioKind::Check => {
            let claim_name = sc.claim.clone().expect("validated");
            let claim = parse_claim(&claim_name)?;
            let x = ctx.point()?;
            let norm = ctx.norm()?;
            let cert = match claim {
                ClaimId::SumRule12 => {
                    let f = ctx.pa(&sc.function, "function")?;
                    let g = ctx.pa(&sc.g, "g")?;
                    check_sum_rule(&f, &g, &x, &ctx.eps()?, &ctx.eta()?, norm)?
                }
                ClaimId::Inclusion13 | ClaimId::Equality22 | ClaimId::Equality26 => {
                    check_difference_formula(&ctx.dc()?, &x, &ctx.eps()?, &ctx.eta()?, norm)?
                }
                ClaimId::Intersection27 => {
                    check_intersection_formula(&ctx.dc()?, &x, &ctx.eps()?, &ctx.list(&sc.mu, "mu")?, norm)?
                }
                ClaimId::Cor11 => check_corollary11(&ctx.dc()?, &x, &ctx.list(&sc.etas, "etas")?, norm)?,
                ClaimId::Cor12a => check_corollary12(&ctx.dc()?, &x, &ctx.eps()?, norm, Cor12Variant::A)?,
                ClaimId::Cor12b => check_corollary12(&ctx.dc()?, &x, &ctx.eps()?, norm, Cor12Variant::B)?,
                ClaimId::LocalMinNecessary => local_min_necessary(&ctx.dc()?, &x)?,
            };
            let outcome = if cert.verdict.supports(claim) { Outcome::Holds } else { Outcome::Fails };
            let text = render::certificate(&claim_name, &x, &cert, outcome);
            Ok(Report::new(name, kind, Some(claim_name), outcome, serde_json::to_value(&cert)?, text))
        }
        ScenarioKind::Certify => {
            let p = ctx.problem()?;
            let x = ctx.point()?;
            let cert = certify_blunt_minimizer(&p, &x)?;
            let outcome = match cert.verdict {
                OptimalityVerdict::BluntMinimizerAllEps => Outcome::Holds,
                OptimalityVerdict::NotBluntMinimizer { .. } => Outcome::Fails,
                OptimalityVerdict::Inconclusive { .. } => Outcome::Inconclusive,
            };
            let text = render::optimality(&x, &cert);
            Ok(Report::new(name, kind, None, outcome, serde_json::to_value(&cert)?, text))
        }
        ScenarioKind::Probe => probe(ctx, name),
    }
}

fn probe_outcome(v: &ProbeVerdict) -> Outcome {
    match v.status {
        ProbeStatus::Holds => Outcome::Holds,
        ProbeStatus::FailsWithWitness => Outcome::Fails,
        ProbeStatus::Inconclusive => Outcome::Inconclusive,
    }
}

fn probe(ctx: &Ctx, name: &str) -> Result<Report> {
    let sc = ctx.sc;
    let which = sc.claim.clone().expect("validated");
    let plan = ctx.plan()?;
    let x = ctx.point()?;
    let xf = x.to_f64();
    let eps_f = to_f64(&ctx.eps()?);
    let verdict = match which.as_str() {
        "dini" => {
            let f = ctx.function()?;
            let h = vector_of(sc.direction.as_ref().expect("validated"))?.to_f64();
            let est = dini_directional_estimate(f.as_real(), &xf, &h, &plan)?;
            let outcome = if est.diverges {
                Outcome::Fails
            } else if est.stable {
                Outcome::Holds
            } else {
                Outcome::Inconclusive
            };
            let text = render::dini(&which, &x, &est, outcome);
            return Ok(Report::new(name, "probe", Some(which), outcome, serde_json::to_value(&est)?, text));
        }
        "calmness" => calmness_probe(ctx.function()?.as_real(), &xf, &plan)?,
        "regularity" => {
            let mode = match sc.mode.as_deref().unwrap_or("convex") {
                "convex" => RegularityMode::Convex,
                "starshaped" => RegularityMode::Starshaped,
                "directional" => RegularityMode::Directional {
                    u: vector_of(
                        sc.direction.as_ref().ok_or_else(|| Error::Invalid("directional mode needs `direction`".into()))?,
                    )?
                    .to_f64(),
                },
                other => return Err(Error::Invalid(format!("unknown regularity mode `{other}`"))),
            };
            approx_regularity_probe(ctx.function()?.as_real(), &xf, eps_f, &mode, &plan)?
        }
        "membership" => {
            let xs = vector_of(sc.subgradient.as_ref().expect("validated"))?.to_f64();
            let alpha = match &sc.alpha {
                Some(a) => to_f64(&rational_of(a)?),
                None => 1e-9,
            };
            eps_subgradient_membership_probe(ctx.function()?.as_real(), &xf, &xs, eps_f, alpha, &plan)?
        }
        "gap" => {
            let map = match ctx.function()? {
                FunctionSpec::PaConvex(h) => SubdifferentialMap::Convex(h),
                FunctionSpec::Dc(f) => SubdifferentialMap::Dc(f),
                FunctionSpec::BlackBox(_) => {
                    return Err(Error::Invalid("the gap probe needs a pa_convex or dc function".into()))
                }
            };
            gap_continuity_probe(&map, &x, eps_f, &plan)?
        }
        "blunt" => blunt_min_probe(&ctx.problem()?, &x, eps_f, &plan)?,
        other => return Err(Error::Invalid(format!("unknown probe `{other}`"))),
    };
    let outcome = probe_outcome(&verdict);
    let text = render::probe(&which, &x, &verdict, outcome);
    Ok(Report::new(name, "probe", Some(which), outcome, serde_json::to_value(&verdict)?, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_minus_x() -> Value {
        json!({"type": "dc",
            "g": {"type": "pa_convex", "pieces": [{"slope": ["1"], "intercept": "0"}, {"slope": ["-1"], "intercept": "0"}]},
            "h": {"type": "pa_convex", "pieces": [{"slope": ["1"], "intercept": "0"}]}})
    }

    fn run(v: Value) -> Report {
        run_scenario_value(&Scenario::parse(&v).unwrap(), Path::new("."), "t", &Overrides::default())
    }

    #[test]
    fn check_equality22() {
        let r = run(json!({"kind": "check", "claim": "equality22", "function": abs_minus_x(), "point": "0"}));
        assert_eq!(r.outcome, Outcome::Holds, "{}", r.text);
        assert!(r.text.contains("[-2, 0]"));
        assert_eq!(r.result["verdict"]["result"], "equal");
    }

    #[test]
    fn missing_fields_are_input_errors() {
        let r = run(json!({"kind": "check", "claim": "equality22", "point": "0"}));
        assert_eq!(r.exit_code, 3);
        assert!(Scenario::parse(&json!({"kind": "check", "bogus": 1})).is_err());
        let r = run(json!({"kind": "check", "claim": "nope", "function": abs_minus_x(), "point": "0"}));
        assert_eq!(r.exit_code, 3);
    }

    #[test]
    fn overrides_take_precedence() {
        let sc = Scenario::parse(&json!({"kind": "subdiff", "function": abs_minus_x(), "point": "5"})).unwrap();
        let ov = Overrides { point: Some(RationalVector::from_i64(&[0])), ..Default::default() };
        let r = run_scenario_value(&sc, Path::new("."), "t", &ov);
        assert!(r.text.contains("[-2, 0]"), "{}", r.text);
        let ov = Overrides { max_dim: Some(0), ..Default::default() };
        assert_eq!(run_scenario_value(&sc, Path::new("."), "t", &ov).exit_code, 3);
    }

    #[test]
    fn probe_statuses_map_to_exit_codes() {
        let neg_sqrt = json!({"type": "blackbox", "expr": ["neg", ["sqrt_abs", ["x", 0]]]});
        let r = run(json!({"kind": "probe", "claim": "calmness", "function": neg_sqrt, "point": "0"}));
        assert_eq!(r.exit_code, 1);
        let r = run(json!({"kind": "probe", "claim": "calmness", "function": abs_minus_x(), "point": "0"}));
        assert_eq!(r.exit_code, 0);
    }
}
