//! Exact scalars and vectors.
//!
//! `Rational` is a reduced `BigRational` (denominator positive, gcd 1), so
//! structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a plain decimal like `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| Error::Parse(format!("bad rational `{s}`")))
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion; panics on non-finite input.
pub fn from_f64(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite float")
}

pub(crate) mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => parse_rational(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => {
                parse_rational(&n.to_string()).map_err(serde::de::Error::custom)
            }
            other => Err(serde::de::Error::custom(format!("expected rational, got {other}"))),
        }
    }
}

/// A value in `Q ∪ {+∞}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    Finite(Rational),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(r) => Some(r),
            Extended::PosInfinity => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(r) => to_f64(r),
            Extended::PosInfinity => f64::INFINITY,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::PosInfinity) => Ordering::Less,
            (Extended::PosInfinity, Extended::Finite(_)) => Ordering::Greater,
            (Extended::PosInfinity, Extended::PosInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(r) => write!(f, "{r}"),
            Extended::PosInfinity => write!(f, "+inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(r) => s.serialize_str(&format_rational(r)),
            Extended::PosInfinity => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "+inf" || s == "inf" {
            Ok(Extended::PosInfinity)
        } else {
            parse_rational(&s).map(Extended::Finite).map_err(serde::de::Error::custom)
        }
    }
}

/// A point or direction in `Q^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn zeros(dim: usize) -> Self {
        RationalVector(vec![Rational::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_i64(xs: &[i64]) -> Self {
        RationalVector(xs.iter().map(|&x| int(x)).collect())
    }

    pub fn from_f64_exact(xs: &[f64]) -> Self {
        RationalVector(xs.iter().map(|&x| from_f64(x)).collect())
    }

    /// Parses a comma separated list of rationals, e.g. `"0,1/2"`.
    pub fn parse_list(s: &str) -> Result<Self> {
        s.split(',').map(parse_rational).collect::<Result<Vec<_>>>().map(RationalVector)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dot(&self, other: &RationalVector) -> Rational {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = Rational::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            if !a.is_zero() && !b.is_zero() {
                acc += a * b;
            }
        }
        acc
    }

    pub fn scale(&self, s: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    pub fn norm_l1(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, x| acc + x.abs())
    }

    pub fn norm_linf(&self) -> Rational {
        self.0.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Positive rescaling to a primitive integer vector.
    pub fn primitive(&self) -> RationalVector {
        RationalVector(primitive_integer(&self.0).into_iter().map(BigRational::from_integer).collect())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: dim, found: self.dim() })
        }
    }
}

/// Scales a rational vector by a positive factor into coprime integers.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl Add for &RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.0.iter().map(format_rational).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<serde_json::Value>::deserialize(d)?;
        raw.into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => parse_rational(&s),
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                other => Err(Error::Parse(format!("expected rational, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(RationalVector)
            .map_err(serde::de::Error::custom)
    }
}
