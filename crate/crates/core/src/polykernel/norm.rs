//! Polyhedral norms and their dual balls.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::polyhedron::{Halfspace, Polyhedron};
use super::rational::{from_f64, int, rat, to_f64, Rational, RationalVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSpec {
    L1,
    Linf,
    /// Polyhedral stand-in for the Euclidean norm built from `k` facet
    /// directions per coordinate plane.
    L2Approx { k: usize },
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::L1
    }
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::L2Approx { k } if *k < 4 || k % 2 != 0 => {
                Err(Error::Invalid(format!("l2approx needs an even facet count >= 4, got {k}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, NormSpec::L2Approx { .. })
    }

    pub fn dual(&self) -> NormSpec {
        match self {
            NormSpec::L1 => NormSpec::Linf,
            NormSpec::Linf => NormSpec::L1,
            NormSpec::L2Approx { k } => NormSpec::L2Approx { k: *k },
        }
    }

    /// Value of the norm whose dual unit ball is `dual_norm_ball(self, 1, n)`.
    pub fn eval(&self, x: &RationalVector) -> Rational {
        match self {
            NormSpec::L1 => x.norm_l1(),
            NormSpec::Linf => x.norm_linf(),
            NormSpec::L2Approx { k } => {
                let normals = l2_normals(*k, x.dim());
                normals.iter().map(|u| u.dot(x)).max().unwrap_or_else(Rational::zero).max(Rational::zero())
            }
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::L1 => x.iter().map(|v| v.abs()).sum(),
            NormSpec::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormSpec::L2Approx { k } => {
                let normals = l2_normals(*k, x.len());
                normals
                    .iter()
                    .map(|u| u.0.iter().zip(x).map(|(a, b)| to_f64(a) * b).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::L1 => write!(f, "l1"),
            NormSpec::Linf => write!(f, "linf"),
            NormSpec::L2Approx { k } => write!(f, "l2approx:{k}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let n = match s.as_str() {
            "l1" => NormSpec::L1,
            "linf" => NormSpec::Linf,
            other => match other.strip_prefix("l2approx:") {
                Some(k) => NormSpec::L2Approx {
                    k: k.parse().map_err(|_| Error::Parse(format!("bad facet count `{k}`")))?,
                },
                None => return Err(Error::Parse(format!("unknown norm `{s}`"))),
            },
        };
        n.validate()?;
        Ok(n)
    }
}

/// Rational point on the unit circle close to angle `theta`, via the
/// rational parametrization `((1-s^2)/(1+s^2), 2s/(1+s^2))`.
fn rational_unit(theta: f64) -> (Rational, Rational) {
    use std::f64::consts::PI;
    let (theta, flip) = if theta > PI / 2.0 && theta < 3.0 * PI / 2.0 { (theta - PI, true) } else { (theta, false) };
    let theta = if theta >= 3.0 * PI / 2.0 { theta - 2.0 * PI } else { theta };
    let s = (theta / 2.0).tan();
    let s = rat((s * 4096.0).round() as i64, 4096);
    let den = Rational::one() + &s * &s;
    let c = (Rational::one() - &s * &s) / &den;
    let si = (int(2) * &s) / &den;
    if flip {
        (-c, -si)
    } else {
        (c, si)
    }
}

/// Unit (Euclidean) normals of the circumscribed approximation.
pub(crate) fn l2_normals(k: usize, dim: usize) -> Vec<RationalVector> {
    let mut out = Vec::new();
    for i in 0..dim {
        out.push(RationalVector::unit(dim, i));
        out.push(-&RationalVector::unit(dim, i));
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for m in 0..k {
                let theta = 2.0 * std::f64::consts::PI * m as f64 / k as f64;
                let (c, s) = rational_unit(theta);
                let mut u = RationalVector::zeros(dim);
                u.0[i] = c;
                u.0[j] = s;
                out.push(u);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Dual-norm ball of radius `eps` in dimension `dim`.
pub fn dual_norm_ball(norm: NormSpec, eps: &Rational, dim: usize) -> Result<Polyhedron> {
    norm.validate()?;
    if eps.is_negative() {
        return Err(Error::NegativeEps);
    }
    if eps.is_zero() {
        return Ok(Polyhedron::point(RationalVector::zeros(dim)));
    }
    match norm {
        NormSpec::L1 => {
            let lo = RationalVector(vec![-eps.clone(); dim]);
            let hi = RationalVector(vec![eps.clone(); dim]);
            Polyhedron::cube(&lo, &hi)
        }
        NormSpec::Linf => {
            let mut verts = Vec::with_capacity(2 * dim);
            for i in 0..dim {
                let e = RationalVector::unit(dim, i).scale(eps);
                verts.push(-&e);
                verts.push(e);
            }
            Polyhedron::from_vrep(dim, verts, vec![])
        }
        NormSpec::L2Approx { k } => {
            let hs = l2_normals(k, dim).into_iter().map(|u| Halfspace::new(u, eps.clone())).collect();
            Polyhedron::from_hrep(dim, hs)
        }
    }
}

/// Upper bound on the Hausdorff distance between the approximate dual ball
/// of radius 1 and the Euclidean unit ball (the approximation contains it).
pub fn l2_approx_hausdorff_bound(k: usize, dim: usize) -> Result<f64> {
    let ball = dual_norm_ball(NormSpec::L2Approx { k }, &Rational::one(), dim)?;
    let r2 = circumradius_sq(&ball)?;
    Ok(to_f64(&r2).sqrt() - 1.0 + 1e-12)
}

pub(crate) fn circumradius_sq(ball: &Polyhedron) -> Result<Rational> {
    Ok(ball
        .vrep()?
        .vertices
        .iter()
        .map(|v| v.dot(v))
        .max()
        .unwrap_or_else(Rational::zero))
}

/// A rational `q >= sqrt(x)`, tight to about 1e-12 relative.
pub(crate) fn sqrt_upper(x: &Rational) -> Rational {
    let mut q = from_f64(to_f64(x).sqrt() * (1.0 + 1e-12) + 1e-300);
    while &(&q * &q) < x {
        q = &q * rat(1_000_001, 1_000_000);
    }
    q
}
