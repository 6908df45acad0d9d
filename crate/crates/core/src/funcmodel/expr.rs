//! Black-box functions given by small expression trees, evaluated in f64.
//!
//! The JSON form is prefix notation: `["sub", ["abs", ["x", 0]], ["mul", ["x", 0], ["x", 0]]]`.
//! Bare numbers are constants.

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(usize),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
    SqrtAbs(Box<Expr>),
    RemarkSeven(Box<Expr>),
}

/// Even function on `(-1, 1)`, `+inf` elsewhere, with
/// `f(x) = x/(2n)` on `[1/(2n), 1/(2n-1))` and the chord
/// `(x - 1/(2n))/(2n+1) + 1/(4n²)` on `[1/(2n+1), 1/(2n)]`.
pub fn remark_seven(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        return f64::INFINITY;
    }
    if a == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / a;
    if !inv.is_finite() {
        return 0.0;
    }
    // floor(1/a) = m  <=>  1/(m+1) < a <= 1/m.
    let mut m = inv.floor();
    if a > 1.0 / m {
        m -= 1.0;
    } else if a <= 1.0 / (m + 1.0) {
        m += 1.0;
    }
    if m % 2.0 == 0.0 {
        let two_n = m;
        (a - 1.0 / two_n) / (two_n + 1.0) + 1.0 / (two_n * two_n)
    } else {
        a / (m + 1.0)
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Coord(i) => x[*i],
            Expr::Add(xs) => xs.iter().map(|e| e.eval(x)).sum(),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(xs) => xs.iter().map(|e| e.eval(x)).product(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Max(xs) => xs.iter().map(|e| e.eval(x)).fold(f64::NEG_INFINITY, f64::max),
            Expr::Min(xs) => xs.iter().map(|e| e.eval(x)).fold(f64::INFINITY, f64::min),
            Expr::SqrtAbs(a) => a.eval(x).abs().sqrt(),
            Expr::RemarkSeven(a) => remark_seven(a.eval(x)),
        }
    }

    /// One more than the largest coordinate index used.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Add(xs) | Expr::Mul(xs) | Expr::Max(xs) | Expr::Min(xs) => {
                xs.iter().map(Expr::arity).max().unwrap_or(0)
            }
            Expr::Sub(a, b) => a.arity().max(b.arity()),
            Expr::Neg(a) | Expr::Abs(a) | Expr::SqrtAbs(a) | Expr::RemarkSeven(a) => a.arity(),
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr> {
        let bad = |msg: &str| Error::Parse(format!("expression: {msg} in {v}"));
        if let Some(c) = v.as_f64() {
            return Ok(Expr::Const(c));
        }
        let arr = v.as_array().ok_or_else(|| bad("expected an array or a number"))?;
        let op = arr.first().and_then(Value::as_str).ok_or_else(|| bad("missing operator"))?;
        let args = &arr[1..];
        let subs = || args.iter().map(Expr::from_json).collect::<Result<Vec<_>>>();
        let unary = || -> Result<Box<Expr>> {
            match args {
                [a] => Ok(Box::new(Expr::from_json(a)?)),
                _ => Err(bad("expected one argument")),
            }
        };
        let nary = || -> Result<Vec<Expr>> {
            let xs = subs()?;
            if xs.is_empty() {
                return Err(bad("expected at least one argument"));
            }
            Ok(xs)
        };
        Ok(match op {
            "const" => match args {
                [c] => Expr::Const(c.as_f64().ok_or_else(|| bad("constant must be a number"))?),
                _ => return Err(bad("expected one constant")),
            },
            "x" => match args {
                [i] => Expr::Coord(i.as_u64().ok_or_else(|| bad("coordinate index must be a natural number"))? as usize),
                _ => return Err(bad("expected one index")),
            },
            "add" => Expr::Add(nary()?),
            "sub" => match args {
                [a, b] => Expr::Sub(Box::new(Expr::from_json(a)?), Box::new(Expr::from_json(b)?)),
                _ => return Err(bad("expected two arguments")),
            },
            "mul" => Expr::Mul(nary()?),
            "neg" => Expr::Neg(unary()?),
            "abs" => Expr::Abs(unary()?),
            "max" => Expr::Max(nary()?),
            "min" => Expr::Min(nary()?),
            "sqrt_abs" => Expr::SqrtAbs(unary()?),
            "remark7" => Expr::RemarkSeven(unary()?),
            other => return Err(Error::Parse(format!("unknown operator `{other}`"))),
        })
    }

    pub fn to_json(&self) -> Value {
        let list = |op: &str, xs: &[Expr]| {
            let mut v = vec![json!(op)];
            v.extend(xs.iter().map(Expr::to_json));
            Value::Array(v)
        };
        match self {
            Expr::Const(c) => json!(c),
            Expr::Coord(i) => json!(["x", i]),
            Expr::Add(xs) => list("add", xs),
            Expr::Sub(a, b) => json!(["sub", a.to_json(), b.to_json()]),
            Expr::Mul(xs) => list("mul", xs),
            Expr::Neg(a) => json!(["neg", a.to_json()]),
            Expr::Abs(a) => json!(["abs", a.to_json()]),
            Expr::Max(xs) => list("max", xs),
            Expr::Min(xs) => list("min", xs),
            Expr::SqrtAbs(a) => json!(["sqrt_abs", a.to_json()]),
            Expr::RemarkSeven(a) => json!(["remark7", a.to_json()]),
        }
    }
}

/// An expression together with the box on which it is declared total.
#[derive(Clone, Debug, PartialEq)]
pub struct BlackBoxFunction {
    expr: Expr,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BlackBoxFunction {
    /// Declared on all of `R^dim`.
    pub fn new(expr: Expr, dim: usize) -> Result<Self> {
        Self::with_box(expr, vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn with_box(expr: Expr, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if expr.arity() > lo.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: expr.arity() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::Invalid("box bounds must satisfy lo <= hi".into()));
        }
        Ok(BlackBoxFunction { expr, lo, hi })
    }

    pub fn parse(v: &Value) -> Result<Self> {
        let expr = Expr::from_json(v.get("expr").ok_or_else(|| Error::Parse("blackbox needs `expr`".into()))?)?;
        let dim = match v.get("dim") {
            Some(d) => d.as_u64().ok_or_else(|| Error::Parse("`dim` must be a natural number".into()))? as usize,
            None => expr.arity().max(1),
        };
        match v.get("box") {
            None | Some(Value::Null) => Self::new(expr, dim),
            Some(b) => {
                let pairs: Vec<(f64, f64)> = serde_json::from_value(b.clone())
                    .map_err(|e| Error::Parse(format!("`box` must be a list of [lo, hi] pairs: {e}")))?;
                if pairs.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: pairs.len() });
                }
                Self::with_box(expr, pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
            }
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"type": "blackbox", "dim": self.dim(), "expr": self.expr.to_json()});
        if self.lo.iter().chain(&self.hi).any(|b| b.is_finite()) {
            let b: Vec<Value> = self.lo.iter().zip(&self.hi).map(|(a, b)| json!([a, b])).collect();
            v["box"] = Value::Array(b);
        }
        v
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Value at `x`; points outside the box or NaN results are errors.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if !self.in_box(x) {
            return Err(Error::EvaluationFailure(format!("{x:?} lies outside the declared box")));
        }
        let y = self.expr.eval(x);
        if y.is_nan() {
            return Err(Error::EvaluationFailure(format!("NaN at {x:?}")));
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Expr {
        Expr::from_json(&serde_json::from_str(s).unwrap()).unwrap()
    }

    #[test]
    fn abs_minus_square_function() {
        let e = parse(r#"["sub", ["abs", ["x", 0]], ["mul", ["x", 0], ["x", 0]]]"#);
        assert_eq!(e.eval(&[0.5]), 0.25);
        assert_eq!(e.eval(&[-2.0]), -2.0);
        assert_eq!(Expr::from_json(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn kink_sequence_pieces() {
        // On [1/2, 1): x/2. On [1/3, 1/2]: (x - 1/2)/3 + 1/4.
        assert_eq!(remark_seven(0.75), 0.375);
        assert_eq!(remark_seven(0.5), 0.25);
        assert!((remark_seven(0.4) - ((0.4 - 0.5) / 3.0 + 0.25)).abs() < 1e-15);
        assert!((remark_seven(0.3) - 0.3 / 4.0).abs() < 1e-15);
        assert_eq!(remark_seven(0.25), 0.25 / 4.0);
        assert_eq!(remark_seven(-0.75), 0.375);
        assert_eq!(remark_seven(0.0), 0.0);
        assert_eq!(remark_seven(1.0), f64::INFINITY);
    }

    #[test]
    fn kink_sequence_continuity_at_even_reciprocals() {
        for n in 1..50 {
            let x = 1.0 / (2.0 * n as f64);
            let left = remark_seven(x * (1.0 - 1e-12));
            let right = remark_seven(x * (1.0 + 1e-12));
            assert!((left - right).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn kink_sequence_between_zero_and_abs() {
        for k in 1..2000 {
            let x = k as f64 / 2000.0;
            let y = remark_seven(x);
            assert!(y <= x && y >= 0.0, "{x}");
        }
    }

    #[test]
    fn box_and_parse_errors() {
        let f = BlackBoxFunction::with_box(Expr::Coord(0), vec![-1.0], vec![1.0]).unwrap();
        assert!(f.eval(&[2.0]).is_err());
        assert_eq!(f.eval(&[0.5]).unwrap(), 0.5);
        let g = BlackBoxFunction::new(parse(r#"["sqrt_abs", ["x", 0]]"#), 1).unwrap();
        assert_eq!(g.eval(&[-4.0]).unwrap(), 2.0);
        assert!(Expr::from_json(&serde_json::json!(["pow", 1])).is_err());
        assert!(Expr::from_json(&serde_json::json!(["abs"])).is_err());
        let h = BlackBoxFunction::parse(&serde_json::json!({"type": "blackbox", "expr": ["x", 1]})).unwrap();
        assert_eq!(h.dim(), 2);
        let back = BlackBoxFunction::parse(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }
}
