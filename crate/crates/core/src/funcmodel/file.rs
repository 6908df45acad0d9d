//! JSON function files and the common real-valued evaluation interface.

use serde_json::{json, Value};

use super::dc::DCFunction;
use super::expr::BlackBoxFunction;
use super::pa::{AffinePiece, PAConvexFunction};
use crate::error::{Error, Result};
use crate::polykernel::Polyhedron;

/// Anything the sampling oracles can evaluate.
pub trait RealFunction: Sync {
    fn dim(&self) -> usize;

    /// Value at `x`, possibly `+inf`.
    fn eval_f64(&self, x: &[f64]) -> Result<f64>;

    /// Piecewise-affine inputs are locally Lipschitz on their domain, which
    /// lets probes skip sampling for calmness.
    fn locally_lipschitz(&self) -> bool {
        false
    }

    /// `(f(x̄ + tu) - f(x̄)) / t` without the cancellation of evaluating both
    /// values in floating point, when the representation allows it.
    fn difference_quotient(&self, _x_bar: &[f64], _t: f64, _u: &[f64]) -> Option<f64> {
        None
    }
}

impl RealFunction for BlackBoxFunction {
    fn dim(&self) -> usize {
        BlackBoxFunction::dim(self)
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
}

impl RealFunction for PAConvexFunction {
    fn dim(&self) -> usize {
        PAConvexFunction::dim(self)
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(PAConvexFunction::eval_f64(self, x))
    }

    fn locally_lipschitz(&self) -> bool {
        true
    }

    fn difference_quotient(&self, x_bar: &[f64], t: f64, u: &[f64]) -> Option<f64> {
        Some(self.difference_quotient_f64(x_bar, t, u))
    }
}

impl RealFunction for DCFunction {
    fn dim(&self) -> usize {
        DCFunction::dim(self)
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(DCFunction::eval_f64(self, x))
    }

    fn locally_lipschitz(&self) -> bool {
        true
    }

    fn difference_quotient(&self, x_bar: &[f64], t: f64, u: &[f64]) -> Option<f64> {
        let qg = self.g().difference_quotient_f64(x_bar, t, u);
        if qg.is_infinite() {
            return Some(qg);
        }
        Some(qg - self.h().difference_quotient_f64(x_bar, t, u))
    }
}

#[derive(Clone, Debug)]
pub enum FunctionSpec {
    PaConvex(PAConvexFunction),
    Dc(DCFunction),
    BlackBox(BlackBoxFunction),
}

impl FunctionSpec {
    pub fn parse(v: &Value) -> Result<Self> {
        match v.get("type").and_then(Value::as_str) {
            Some("pa_convex") => Ok(FunctionSpec::PaConvex(parse_pa(v)?)),
            Some("dc") => {
                let part = |k: &str| -> Result<PAConvexFunction> {
                    parse_pa(v.get(k).ok_or_else(|| Error::Parse(format!("dc function needs `{k}`")))?)
                };
                Ok(FunctionSpec::Dc(DCFunction::new(part("g")?, part("h")?)?))
            }
            Some("blackbox") => Ok(FunctionSpec::BlackBox(BlackBoxFunction::parse(v)?)),
            Some(t) => Err(Error::Parse(format!("unknown function type `{t}`"))),
            None => Err(Error::Parse("function needs a `type`".into())),
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        Self::parse(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Value {
        match self {
            FunctionSpec::PaConvex(f) => pa_to_json(f),
            FunctionSpec::Dc(f) => json!({"type": "dc", "g": pa_to_json(f.g()), "h": pa_to_json(f.h())}),
            FunctionSpec::BlackBox(f) => f.to_json(),
        }
    }

    pub fn dim(&self) -> usize {
        self.as_real().dim()
    }

    pub fn as_real(&self) -> &dyn RealFunction {
        match self {
            FunctionSpec::PaConvex(f) => f,
            FunctionSpec::Dc(f) => f,
            FunctionSpec::BlackBox(f) => f,
        }
    }

    /// Convex functions read as the DC pair `f - 0`.
    pub fn to_dc(&self) -> Result<DCFunction> {
        match self {
            FunctionSpec::Dc(f) => Ok(f.clone()),
            FunctionSpec::PaConvex(f) => {
                let zero = PAConvexFunction::affine(crate::polykernel::RationalVector::zeros(f.dim()), Default::default());
                DCFunction::new(f.clone(), zero)
            }
            FunctionSpec::BlackBox(_) => Err(Error::Invalid("a black-box function has no DC structure".into())),
        }
    }
}

pub(crate) fn parse_pa(v: &Value) -> Result<PAConvexFunction> {
    if let Some(t) = v.get("type").and_then(Value::as_str) {
        if t != "pa_convex" {
            return Err(Error::Parse(format!("expected a pa_convex function, got `{t}`")));
        }
    }
    let pieces: Vec<AffinePiece> = serde_json::from_value(
        v.get("pieces").cloned().ok_or_else(|| Error::Parse("pa_convex function needs `pieces`".into()))?,
    )?;
    match v.get("domain") {
        None | Some(Value::Null) => PAConvexFunction::unconstrained(pieces),
        Some(d) => PAConvexFunction::new(pieces, serde_json::from_value::<Polyhedron>(d.clone())?),
    }
}

pub(crate) fn pa_to_json(f: &PAConvexFunction) -> Value {
    let domain = if f.has_full_domain().unwrap_or(false) {
        Value::Null
    } else {
        serde_json::to_value(f.domain()).unwrap_or(Value::Null)
    };
    json!({"type": "pa_convex", "pieces": f.pieces(), "domain": domain})
}
