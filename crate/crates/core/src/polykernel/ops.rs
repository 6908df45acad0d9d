//! Set operations on polyhedra: support function, sums, erosion, gap,
//! images, normal cones.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::lp::{LpOutcome, StandardLp};
use super::norm::{circumradius_sq, dual_norm_ball, l2_normals, sqrt_upper, NormSpec};
use super::polyhedron::{Halfspace, Polyhedron};
use super::rational::{Extended, Rational, RationalVector};
use crate::error::{Error, Result};

fn same_dim(p: &Polyhedron, q: &Polyhedron) -> Result<()> {
    if p.dim() == q.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() })
    }
}

/// `sup { <d, x> : x in P }`.
pub fn support_function(p: &Polyhedron, d: &RationalVector) -> Result<Extended> {
    d.check_dim(p.dim())?;
    let g = p.vrep()?;
    if g.is_empty_set() {
        return Err(Error::EmptySet);
    }
    if g.rays.iter().any(|r| d.dot(r).is_positive()) {
        return Ok(Extended::PosInfinity);
    }
    let best = g.vertices.iter().map(|v| d.dot(v)).max().expect("nonempty");
    Ok(Extended::Finite(best))
}

pub fn contains_point(p: &Polyhedron, x: &RationalVector) -> Result<bool> {
    p.contains_point(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Containment {
    Contained,
    NotContained { witness: RationalVector },
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Contained)
    }
}

/// Whether `q ⊆ p`; on failure, a point of `q` outside `p`.
pub fn contains_polyhedron(p: &Polyhedron, q: &Polyhedron) -> Result<Containment> {
    same_dim(p, q)?;
    Ok(match p.containment_witness(q)? {
        None => Containment::Contained,
        Some(witness) => Containment::NotContained { witness },
    })
}

pub fn intersect(p: &Polyhedron, q: &Polyhedron) -> Result<Polyhedron> {
    same_dim(p, q)?;
    let mut hs: Vec<Halfspace> = p.hrep()?.to_vec();
    hs.extend_from_slice(q.hrep()?);
    Polyhedron::from_hrep(p.dim(), hs)?.dual_description()
}

pub fn intersect_all(dim: usize, sets: &[Polyhedron]) -> Result<Polyhedron> {
    let mut hs = Vec::new();
    for s in sets {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
        }
        hs.extend_from_slice(s.hrep()?);
    }
    Polyhedron::from_hrep(dim, hs)?.dual_description()
}

/// `P + Q`. The sum with an empty operand is empty.
pub fn minkowski_sum(p: &Polyhedron, q: &Polyhedron) -> Result<Polyhedron> {
    same_dim(p, q)?;
    let (gp, gq) = (p.vrep()?, q.vrep()?);
    if gp.is_empty_set() || gq.is_empty_set() {
        return Ok(Polyhedron::empty(p.dim()));
    }
    let cap = super::limits::limits().max_generators;
    if gp.vertices.len() * gq.vertices.len() > cap {
        return Err(Error::CapExceeded { what: "minkowski vertex pairs", limit: cap });
    }
    let mut verts = Vec::with_capacity(gp.vertices.len() * gq.vertices.len());
    for a in &gp.vertices {
        for b in &gq.vertices {
            verts.push(a + b);
        }
    }
    verts.sort();
    verts.dedup();
    let mut rays: Vec<RationalVector> = gp.rays.iter().chain(&gq.rays).cloned().collect();
    rays.sort();
    rays.dedup();
    Polyhedron::from_vrep(p.dim(), verts, rays)?.dual_description()
}

/// `A ⊖* B = { x : x + B ⊆ A }`, computed by eroding each facet of `A` by
/// the support function of `B`. With `B = ∅` every `x` qualifies, so the
/// result is the whole space.
pub fn star_difference(a: &Polyhedron, b: &Polyhedron) -> Result<Polyhedron> {
    same_dim(a, b)?;
    let dim = a.dim();
    if b.is_empty()? {
        return Ok(Polyhedron::whole_space(dim));
    }
    if a.is_empty()? {
        return Ok(Polyhedron::empty(dim));
    }
    let mut eroded = Vec::with_capacity(a.hrep()?.len());
    for h in a.hrep()? {
        match support_function(b, &h.normal)? {
            Extended::PosInfinity => return Ok(Polyhedron::empty(dim)),
            Extended::Finite(s) => eroded.push(Halfspace::new(h.normal.clone(), &h.offset - s)),
        }
    }
    Polyhedron::from_hrep(dim, eroded)?.dual_description()
}

/// `inf { ||a - b|| : a in A, b in B }`, `+∞` when either set is empty.
/// Exact for L1 and Linf; for L2Approx the value is an upper bound on the
/// Euclidean gap.
pub fn gap(a: &Polyhedron, b: &Polyhedron, norm: NormSpec) -> Result<Extended> {
    same_dim(a, b)?;
    norm.validate()?;
    let (ga, gb) = (a.vrep()?, b.vrep()?);
    if ga.is_empty_set() || gb.is_empty_set() {
        return Ok(Extended::PosInfinity);
    }
    let n = a.dim();
    let (nva, nra, nvb, nrb) = (ga.vertices.len(), ga.rays.len(), gb.vertices.len(), gb.rays.len());
    let base = nva + nra + nvb + nrb;
    let sp = base;
    let sm = base + n;
    let tau = base + 2 * n;
    let extra_rows = match norm {
        NormSpec::L1 => 0,
        NormSpec::Linf => n,
        NormSpec::L2Approx { k } => l2_normals(k, n).len(),
    };
    let num_vars = base + 2 * n + if matches!(norm, NormSpec::L1) { 0 } else { 1 + extra_rows };
    let mut lp = StandardLp::new(num_vars);
    for i in 0..n {
        let mut row = vec![Rational::zero(); num_vars];
        for (j, v) in ga.vertices.iter().enumerate() {
            row[j] = v[i].clone();
        }
        for (j, r) in ga.rays.iter().enumerate() {
            row[nva + j] = r[i].clone();
        }
        for (j, v) in gb.vertices.iter().enumerate() {
            row[nva + nra + j] = -v[i].clone();
        }
        for (j, r) in gb.rays.iter().enumerate() {
            row[nva + nra + nvb + j] = -r[i].clone();
        }
        row[sp + i] = -Rational::one();
        row[sm + i] = Rational::one();
        lp.add_row(row, Rational::zero());
    }
    let mut convex_a = vec![Rational::zero(); num_vars];
    convex_a[..nva].iter_mut().for_each(|x| *x = Rational::one());
    lp.add_row(convex_a, Rational::one());
    let mut convex_b = vec![Rational::zero(); num_vars];
    convex_b[nva + nra..nva + nra + nvb].iter_mut().for_each(|x| *x = Rational::one());
    lp.add_row(convex_b, Rational::one());
    match norm {
        NormSpec::L1 => {
            for i in 0..2 * n {
                lp.objective[sp + i] = Rational::one();
            }
        }
        NormSpec::Linf => {
            lp.objective[tau] = Rational::one();
            for i in 0..n {
                let mut row = vec![Rational::zero(); num_vars];
                row[sp + i] = Rational::one();
                row[sm + i] = Rational::one();
                row[tau] = -Rational::one();
                row[tau + 1 + i] = Rational::one();
                lp.add_row(row, Rational::zero());
            }
        }
        NormSpec::L2Approx { k } => {
            lp.objective[tau] = Rational::one();
            for (j, u) in l2_normals(k, n).iter().enumerate() {
                let mut row = vec![Rational::zero(); num_vars];
                for i in 0..n {
                    row[sp + i] = u[i].clone();
                    row[sm + i] = -u[i].clone();
                }
                row[tau] = -Rational::one();
                row[tau + 1 + j] = Rational::one();
                lp.add_row(row, Rational::zero());
            }
        }
    }
    let _ = nrb;
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => match norm {
            NormSpec::L2Approx { .. } => {
                let ball = dual_norm_ball(norm, &Rational::one(), n)?;
                let r = sqrt_upper(&circumradius_sq(&ball)?);
                Ok(Extended::Finite(value * r))
            }
            _ => Ok(Extended::Finite(value)),
        },
        LpOutcome::Infeasible => Err(Error::Internal("gap LP infeasible for nonempty sets".into())),
        LpOutcome::Unbounded => Err(Error::Internal("gap LP unbounded".into())),
    }
}

/// `{ M x + c : x in P }` where `M` is given row-major with `P.dim()` columns.
pub fn affine_image(p: &Polyhedron, m: &[Vec<Rational>], c: &RationalVector) -> Result<Polyhedron> {
    let out_dim = c.dim();
    if m.len() != out_dim {
        return Err(Error::DimensionMismatch { expected: out_dim, found: m.len() });
    }
    for row in m {
        if row.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: row.len() });
        }
    }
    let g = p.vrep()?;
    if g.is_empty_set() {
        return Ok(Polyhedron::empty(out_dim));
    }
    let apply = |x: &RationalVector| -> RationalVector {
        RationalVector(m.iter().map(|row| RationalVector(row.clone()).dot(x)).collect())
    };
    let mut verts: Vec<RationalVector> = g.vertices.iter().map(|v| &apply(v) + c).collect();
    verts.sort();
    verts.dedup();
    let rays: Vec<RationalVector> = g.rays.iter().map(apply).filter(|r| !r.is_zero()).collect();
    Polyhedron::from_vrep(out_dim, verts, rays)?.dual_description()
}

/// Normal cone of `P` at `x`: the cone spanned by normals of facets tight at `x`.
pub fn normal_cone_at(p: &Polyhedron, x: &RationalVector) -> Result<Polyhedron> {
    x.check_dim(p.dim())?;
    let canon = p.dual_description()?;
    if !canon.contains_point(x)? {
        return Err(Error::PointNotInSet);
    }
    let rays: Vec<RationalVector> =
        canon.hrep()?.iter().filter(|h| h.is_tight(x)).map(|h| h.normal.primitive()).collect();
    Polyhedron::cone(p.dim(), rays)?.dual_description()
}

/// `⋃_{λ>0} λ P`, closed: generated by the vertices and rays of `P` as rays.
pub fn conic_hull(p: &Polyhedron) -> Result<Polyhedron> {
    let g = p.vrep()?;
    if g.is_empty_set() {
        return Ok(Polyhedron::empty(p.dim()));
    }
    let rays: Vec<RationalVector> =
        g.vertices.iter().chain(&g.rays).filter(|v| !v.is_zero()).map(|v| v.primitive()).collect();
    Polyhedron::cone(p.dim(), rays)?.dual_description()
}

pub fn is_cone(c: &Polyhedron) -> Result<bool> {
    let canon = c.dual_description()?;
    if canon.is_empty()? {
        return Ok(false);
    }
    Ok(canon.hrep()?.iter().all(|h| h.offset.is_zero()))
}

/// `C = -C` for a polyhedral cone `C`.
pub fn cone_is_linear_subspace(c: &Polyhedron) -> Result<bool> {
    if !is_cone(c)? {
        return Err(Error::NotACone);
    }
    let neg = c.negate()?;
    c.contains(&neg)
}
