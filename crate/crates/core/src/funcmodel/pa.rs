//! Piecewise-affine convex functions `max_i (<a_i, x> + c_i) + δ_D(x)`.

use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polykernel::rational::{from_f64, serde_rational, to_f64};
use crate::polykernel::{
    dual_norm_ball, intersect, limits, minkowski_sum, normal_cone_at, Extended, NormSpec, Polyhedron, Rational,
    RationalVector,
};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: RationalVector,
    #[serde(with = "serde_rational")]
    pub intercept: Rational,
}

impl AffinePiece {
    pub fn new(slope: RationalVector, intercept: Rational) -> Self {
        AffinePiece { slope, intercept }
    }

    pub fn value(&self, x: &RationalVector) -> Rational {
        self.slope.dot(x) + &self.intercept
    }
}

#[derive(Clone, Debug)]
pub struct PAConvexFunction {
    pieces: Vec<AffinePiece>,
    domain: Polyhedron,
    float_pieces: OnceLock<Vec<(Vec<f64>, f64)>>,
}

impl PAConvexFunction {
    pub fn new(pieces: Vec<AffinePiece>, domain: Polyhedron) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::Invalid("a PA function needs at least one piece".into()))?;
        let dim = first.slope.dim();
        for p in &pieces {
            p.slope.check_dim(dim)?;
        }
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: domain.dim() });
        }
        let mut pieces = pieces;
        pieces.sort();
        pieces.dedup();
        Ok(PAConvexFunction { pieces, domain, float_pieces: OnceLock::new() })
    }

    pub fn unconstrained(pieces: Vec<AffinePiece>) -> Result<Self> {
        let dim = pieces.first().map(|p| p.slope.dim()).unwrap_or(0);
        Self::new(pieces, Polyhedron::whole_space(dim))
    }

    /// `x ↦ <a, x> + c`.
    pub fn affine(slope: RationalVector, intercept: Rational) -> Self {
        Self::unconstrained(vec![AffinePiece::new(slope, intercept)]).expect("one piece")
    }

    /// `x ↦ scale * ||x||_1`, written as a max over sign vectors.
    pub fn scaled_l1(dim: usize, scale: &Rational) -> Result<Self> {
        let signs = sign_vectors(dim)?;
        Self::unconstrained(signs.into_iter().map(|s| AffinePiece::new(s.scale(scale), Rational::zero())).collect())
    }

    /// `x ↦ scale * |x_i|`.
    pub fn scaled_abs_coord(dim: usize, i: usize, scale: &Rational) -> Self {
        let e = RationalVector::unit(dim, i).scale(scale);
        Self::unconstrained(vec![AffinePiece::new(-&e, Rational::zero()), AffinePiece::new(e, Rational::zero())])
            .expect("two pieces")
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn has_full_domain(&self) -> Result<bool> {
        self.domain.is_whole_space()
    }

    pub fn in_domain(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.dim())?;
        self.domain.contains_point(x)
    }

    /// Strict interior of the domain.
    pub fn in_domain_interior(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.dim())?;
        let canon = self.domain.dual_description()?;
        if canon.is_empty()? {
            return Ok(false);
        }
        Ok(canon.hrep()?.iter().all(|h| h.normal.dot(x) < h.offset))
    }

    pub fn evaluate(&self, x: &RationalVector) -> Result<Extended> {
        if !self.in_domain(x)? {
            return Ok(Extended::PosInfinity);
        }
        Ok(Extended::Finite(self.max_value(x)))
    }

    fn max_value(&self, x: &RationalVector) -> Rational {
        self.pieces.iter().map(|p| p.value(x)).max().expect("nonempty pieces")
    }

    /// Pieces attaining the maximum at `x`, compared exactly.
    pub fn active_pieces(&self, x: &RationalVector) -> Vec<&AffinePiece> {
        let vals: Vec<Rational> = self.pieces.iter().map(|p| p.value(x)).collect();
        let best = vals.iter().max().expect("nonempty pieces").clone();
        self.pieces.iter().zip(&vals).filter(|(_, v)| **v == best).map(|(p, _)| p).collect()
    }

    pub fn active_slopes(&self, x: &RationalVector) -> Vec<RationalVector> {
        let mut s: Vec<RationalVector> = self.active_pieces(x).into_iter().map(|p| p.slope.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Convex subdifferential: hull of the active slopes plus the normal
    /// cone of the domain.
    pub fn subdifferential_at(&self, x: &RationalVector) -> Result<Polyhedron> {
        if !self.in_domain(x)? {
            return Err(Error::PointOutsideDomain);
        }
        let hull = Polyhedron::from_vrep(self.dim(), self.active_slopes(x), vec![])?;
        if self.in_domain_interior(x)? {
            return hull.dual_description();
        }
        let normal = normal_cone_at(&self.domain, x)?;
        minkowski_sum(&hull, &normal)
    }

    /// `∂f(x̄) + eps · B*`, the ε-subdifferential of a convex function.
    pub fn eps_subdifferential_at(&self, x: &RationalVector, eps: &Rational, norm: NormSpec) -> Result<Polyhedron> {
        if eps.is_negative() {
            return Err(Error::NegativeEps);
        }
        let sub = self.subdifferential_at(x)?;
        if eps.is_zero() {
            return Ok(sub);
        }
        minkowski_sum(&sub, &dual_norm_ball(norm, eps, self.dim())?)
    }

    /// One-sided directional derivative at an interior point.
    pub fn directional_derivative(&self, x: &RationalVector, h: &RationalVector) -> Result<Rational> {
        h.check_dim(self.dim())?;
        if !self.in_domain_interior(x)? {
            return Err(Error::PointOutsideDomainInterior);
        }
        Ok(self.active_pieces(x).iter().map(|p| p.slope.dot(h)).max().expect("nonempty"))
    }

    /// Same pieces on `dom f ∩ A`, i.e. `f + δ_A`.
    pub fn restrict(&self, a: &Polyhedron) -> Result<PAConvexFunction> {
        let dom = intersect(&self.domain, a)?;
        if dom.is_empty()? {
            return Err(Error::EmptyDomain);
        }
        PAConvexFunction::new(self.pieces.clone(), dom)
    }

    /// Exact PA form of `f + eps ||· - x̄||_1`.
    pub fn f_eps_expand(&self, x_bar: &RationalVector, eps: &Rational, norm: NormSpec) -> Result<PAConvexFunction> {
        if norm != NormSpec::L1 {
            return Err(Error::Invalid("f_eps_expand supports the l1 norm only".into()));
        }
        if eps.is_negative() {
            return Err(Error::NegativeEps);
        }
        x_bar.check_dim(self.dim())?;
        if eps.is_zero() {
            return Ok(self.clone());
        }
        let signs = sign_vectors(self.dim())?;
        let cap = limits().max_generators;
        if signs.len() * self.pieces.len() > cap {
            return Err(Error::CapExceeded { what: "expanded piece count", limit: cap });
        }
        let mut pieces = Vec::with_capacity(signs.len() * self.pieces.len());
        for p in &self.pieces {
            for s in &signs {
                let es = s.scale(eps);
                let intercept = &p.intercept - es.dot(x_bar);
                pieces.push(AffinePiece::new(&p.slope + &es, intercept));
            }
        }
        PAConvexFunction::new(pieces, self.domain.clone())
    }

    /// Pointwise sum; pieces are all pairwise sums.
    pub fn add(&self, other: &PAConvexFunction) -> Result<PAConvexFunction> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(AffinePiece::new(&a.slope + &b.slope, &a.intercept + &b.intercept));
            }
        }
        let dom = intersect(&self.domain, &other.domain)?;
        PAConvexFunction::new(pieces, dom)
    }

    pub fn scale(&self, s: &Rational) -> Result<PAConvexFunction> {
        if s.is_negative() {
            return Err(Error::Invalid("negative scaling breaks convexity".into()));
        }
        let pieces =
            self.pieces.iter().map(|p| AffinePiece::new(p.slope.scale(s), &p.intercept * s)).collect();
        PAConvexFunction::new(pieces, self.domain.clone())
    }

    /// Floating-point evaluation; `+inf` outside the domain.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let fp = self.float_pieces.get_or_init(|| {
            self.pieces.iter().map(|p| (p.slope.to_f64(), to_f64(&p.intercept))).collect()
        });
        let full = self.domain.hrep().map(|h| h.is_empty()).unwrap_or(false);
        if !full {
            let xr = RationalVector(x.iter().map(|&v| from_f64(v)).collect());
            if !self.domain.contains_point(&xr).unwrap_or(false) {
                return f64::INFINITY;
            }
        }
        fp.iter()
            .map(|(s, c)| s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(f(x̄ + tu) - f(x̄)) / t` as `max_j (a_j - f(x̄)) / t + <b_j, u>`, with
    /// the gaps `a_j - f(x̄)` of the pieces at `x̄` taken exactly. `+inf` when
    /// either point leaves the domain.
    pub fn difference_quotient_f64(&self, x_bar: &[f64], t: f64, u: &[f64]) -> f64 {
        let xr = RationalVector(x_bar.iter().map(|&v| from_f64(v)).collect());
        let full = self.domain.hrep().map(|h| h.is_empty()).unwrap_or(false);
        if !full {
            let tr = from_f64(t);
            let moved = RationalVector(xr.0.iter().zip(u).map(|(a, &b)| a + &tr * from_f64(b)).collect());
            let inside = |p: &RationalVector| self.domain.contains_point(p).unwrap_or(false);
            if !inside(&xr) || !inside(&moved) {
                return f64::INFINITY;
            }
        }
        let at: Vec<Rational> = self.pieces.iter().map(|p| p.slope.dot(&xr) + &p.intercept).collect();
        let top = at.iter().max().expect("at least one piece").clone();
        self.pieces
            .iter()
            .zip(&at)
            .map(|(p, a)| to_f64(&(a - &top)) / t + p.slope.0.iter().zip(u).map(|(s, b)| to_f64(s) * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn sign_vectors(dim: usize) -> Result<Vec<RationalVector>> {
    let cap = limits().max_dim;
    if dim > cap {
        return Err(Error::CapExceeded { what: "dimension", limit: cap });
    }
    let mut out = Vec::with_capacity(1 << dim);
    for mask in 0..(1usize << dim) {
        out.push(RationalVector(
            (0..dim)
                .map(|i| if mask & (1 << i) != 0 { Rational::from_integer((-1).into()) } else { Rational::from_integer(1.into()) })
                .collect(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polykernel::{int, rat, Halfspace};

    fn v(xs: &[i64]) -> RationalVector {
        RationalVector::from_i64(xs)
    }

    fn abs1() -> PAConvexFunction {
        PAConvexFunction::scaled_abs_coord(1, 0, &int(1))
    }

    #[test]
    fn difference_quotient_survives_cancellation() {
        // max(-2x + 2y + 2, -2x + 3y + 3) near (0, -1), where f = 0.
        let f = PAConvexFunction::unconstrained(vec![
            AffinePiece::new(v(&[-2, 2]), int(2)),
            AffinePiece::new(v(&[-2, 3]), int(3)),
        ])
        .unwrap();
        let t = 1e-30;
        let naive = (f.eval_f64(&[t * -1.0, -1.0]) - f.eval_f64(&[0.0, -1.0])) / t;
        assert_eq!(naive, 0.0);
        assert_eq!(f.difference_quotient_f64(&[0.0, -1.0], t, &[-1.0, 0.0]), 2.0);
        let boxed = f.restrict(&Polyhedron::cube(&v(&[0, -1]), &v(&[1, 0])).unwrap()).unwrap();
        assert_eq!(boxed.difference_quotient_f64(&[0.0, -1.0], t, &[-1.0, 0.0]), f64::INFINITY);
        assert_eq!(boxed.difference_quotient_f64(&[0.0, -1.0], t, &[1.0, 1.0]), 1.0);
    }

    fn iv(lo: i64, hi: i64) -> Polyhedron {
        Polyhedron::interval(int(lo), int(hi))
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(abs1().evaluate(&v(&[-3])).unwrap(), Extended::Finite(int(3)));
        let f = PAConvexFunction::new(vec![AffinePiece::new(v(&[1]), int(0))], iv(0, 1)).unwrap();
        assert_eq!(f.evaluate(&v(&[2])).unwrap(), Extended::PosInfinity);
        let g = PAConvexFunction::unconstrained(vec![
            AffinePiece::new(v(&[1]), int(0)),
            AffinePiece::new(v(&[2]), int(0)),
        ])
        .unwrap();
        assert_eq!(g.evaluate(&v(&[1])).unwrap(), Extended::Finite(int(2)));
        assert!(matches!(g.evaluate(&v(&[1, 2])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn subdifferential_examples() {
        assert!(abs1().subdifferential_at(&v(&[0])).unwrap().same_set(&iv(-1, 1)).unwrap());
        let mx = PAConvexFunction::unconstrained(vec![
            AffinePiece::new(v(&[1, 0]), int(0)),
            AffinePiece::new(v(&[0, 1]), int(0)),
        ])
        .unwrap();
        let seg = Polyhedron::from_vrep(2, vec![v(&[1, 0]), v(&[0, 1])], vec![]).unwrap();
        assert!(mx.subdifferential_at(&v(&[0, 0])).unwrap().same_set(&seg).unwrap());
        assert!(abs1().subdifferential_at(&v(&[2])).unwrap().same_set(&Polyhedron::point(v(&[1]))).unwrap());
        let f = PAConvexFunction::new(vec![AffinePiece::new(v(&[1]), int(0))], iv(0, 1)).unwrap();
        assert_eq!(f.subdifferential_at(&v(&[5])).unwrap_err(), Error::PointOutsideDomain);
    }

    #[test]
    fn eps_subdifferential_examples() {
        let r = abs1().eps_subdifferential_at(&v(&[0]), &int(1), NormSpec::L1).unwrap();
        assert!(r.same_set(&iv(-2, 2)).unwrap());
        let r0 = abs1().eps_subdifferential_at(&v(&[0]), &int(0), NormSpec::L1).unwrap();
        assert!(r0.same_set(&abs1().subdifferential_at(&v(&[0])).unwrap()).unwrap());
        assert_eq!(abs1().eps_subdifferential_at(&v(&[0]), &int(-1), NormSpec::L1).unwrap_err(), Error::NegativeEps);
        let small = abs1().eps_subdifferential_at(&v(&[1]), &rat(1, 2), NormSpec::L1).unwrap();
        let big = abs1().eps_subdifferential_at(&v(&[1]), &int(2), NormSpec::L1).unwrap();
        assert!(big.contains(&small).unwrap());
    }

    #[test]
    fn directional_derivative_examples() {
        assert_eq!(abs1().directional_derivative(&v(&[0]), &v(&[-2])).unwrap(), int(2));
        assert_eq!(abs1().directional_derivative(&v(&[0]), &v(&[0])).unwrap(), int(0));
        let mx = PAConvexFunction::unconstrained(vec![
            AffinePiece::new(v(&[1, 0]), int(0)),
            AffinePiece::new(v(&[0, 1]), int(0)),
        ])
        .unwrap();
        assert_eq!(mx.directional_derivative(&v(&[0, 0]), &v(&[1, 1])).unwrap(), int(1));
        let f = PAConvexFunction::new(vec![AffinePiece::new(v(&[1]), int(0))], iv(0, 1)).unwrap();
        assert_eq!(f.directional_derivative(&v(&[0]), &v(&[1])).unwrap_err(), Error::PointOutsideDomainInterior);
    }

    #[test]
    fn restrict_examples() {
        let half = Polyhedron::from_hrep(1, vec![Halfspace::new(v(&[-1]), int(0))]).unwrap();
        let r = abs1().restrict(&half).unwrap();
        let expect = Polyhedron::from_hrep(1, vec![Halfspace::new(v(&[1]), int(1))]).unwrap();
        assert!(r.subdifferential_at(&v(&[0])).unwrap().same_set(&expect).unwrap());
        let same = abs1().restrict(&Polyhedron::whole_space(1)).unwrap();
        assert!(same.subdifferential_at(&v(&[0])).unwrap().same_set(&iv(-1, 1)).unwrap());
        let pt = abs1().restrict(&Polyhedron::point(v(&[3]))).unwrap();
        assert!(pt.subdifferential_at(&v(&[3])).unwrap().is_whole_space().unwrap());
        let dom = PAConvexFunction::new(vec![AffinePiece::new(v(&[1]), int(0))], iv(0, 1)).unwrap();
        assert_eq!(dom.restrict(&iv(2, 3)).unwrap_err(), Error::EmptyDomain);
    }

    #[test]
    fn f_eps_expand_examples() {
        let e = abs1().f_eps_expand(&v(&[0]), &int(1), NormSpec::L1).unwrap();
        let expect = PAConvexFunction::scaled_abs_coord(1, 0, &int(2));
        for x in -3..=3 {
            assert_eq!(e.evaluate(&v(&[x])).unwrap(), expect.evaluate(&v(&[x])).unwrap());
        }
        let same = abs1().f_eps_expand(&v(&[0]), &int(0), NormSpec::L1).unwrap();
        assert_eq!(same.pieces(), abs1().pieces());
        let lhs = e.subdifferential_at(&v(&[0])).unwrap();
        let rhs = abs1().eps_subdifferential_at(&v(&[0]), &int(1), NormSpec::L1).unwrap();
        assert!(lhs.same_set(&rhs).unwrap());
        assert!(abs1().f_eps_expand(&v(&[0]), &int(1), NormSpec::Linf).is_err());
    }

    #[test]
    fn float_evaluation_matches_exact() {
        let f = PAConvexFunction::scaled_l1(2, &rat(3, 2)).unwrap();
        assert!((f.eval_f64(&[0.5, -0.25]) - 1.125).abs() < 1e-15);
        let g = PAConvexFunction::new(vec![AffinePiece::new(v(&[1]), int(0))], iv(0, 1)).unwrap();
        assert_eq!(g.eval_f64(&[2.0]), f64::INFINITY);
    }
}
