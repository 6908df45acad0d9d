//! Polyhedra with lazily cached halfspace and generator descriptions.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dd::{cone_generators, IVec};
use super::limits::limits;
use super::lp::{LpOutcome, StandardLp};
use super::rational::{primitive_integer, serde_rational, Rational, RationalVector};
use crate::error::{Error, Result};

/// `<normal, x> <= offset`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: RationalVector,
    #[serde(with = "serde_rational")]
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: RationalVector, offset: Rational) -> Self {
        Halfspace { normal, offset }
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.normal.dot(x) <= self.offset
    }

    pub fn is_tight(&self, x: &RationalVector) -> bool {
        self.normal.dot(x) == self.offset
    }

    pub fn is_trivial(&self) -> bool {
        self.normal.is_zero()
    }

    /// Positive rescaling so that (normal, offset) are coprime integers.
    pub fn normalized(&self) -> Halfspace {
        let mut all = self.normal.0.clone();
        all.push(self.offset.clone());
        let ints = primitive_integer(&all);
        let (offset, normal) = ints.split_last().expect("nonempty");
        Halfspace {
            normal: RationalVector(normal.iter().cloned().map(BigRational::from_integer).collect()),
            offset: BigRational::from_integer(offset.clone()),
        }
    }
}

/// Generator description: `conv(vertices) + cone(rays)`. Lines appear as a
/// pair of opposite rays. No vertices means the empty set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generators {
    pub vertices: Vec<RationalVector>,
    pub rays: Vec<RationalVector>,
}

impl Generators {
    pub fn is_empty_set(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    Nonempty,
    Unknown,
}

#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    hrep: OnceLock<Vec<Halfspace>>,
    vrep: OnceLock<Generators>,
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polyhedron")
            .field("dim", &self.dim)
            .field("hrep", &self.hrep.get())
            .field("vrep", &self.vrep.get())
            .finish()
    }
}

fn cell<T>(v: T) -> OnceLock<T> {
    let c = OnceLock::new();
    let _ = c.set(v);
    c
}

fn empty_hrep(dim: usize) -> Vec<Halfspace> {
    if dim == 0 {
        return vec![Halfspace::new(RationalVector(vec![]), -Rational::one())];
    }
    vec![
        Halfspace::new(RationalVector::unit(dim, 0), -Rational::one()),
        Halfspace::new(-&RationalVector::unit(dim, 0), Rational::zero()),
    ]
}

impl Polyhedron {
    pub fn from_hrep(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        for h in &halfspaces {
            h.normal.check_dim(dim)?;
        }
        // A violated trivial constraint makes the set empty outright.
        if halfspaces.iter().any(|h| h.is_trivial() && h.offset.is_negative()) {
            return Ok(Polyhedron::empty(dim));
        }
        let hs = halfspaces.into_iter().filter(|h| !h.is_trivial()).collect();
        Ok(Polyhedron { dim, hrep: cell(hs), vrep: OnceLock::new() })
    }

    pub fn from_vrep(dim: usize, vertices: Vec<RationalVector>, rays: Vec<RationalVector>) -> Result<Self> {
        for v in vertices.iter().chain(&rays) {
            v.check_dim(dim)?;
        }
        if vertices.is_empty() {
            return Ok(Polyhedron::empty(dim));
        }
        let rays = rays.into_iter().filter(|r| !r.is_zero()).collect();
        Ok(Polyhedron { dim, hrep: OnceLock::new(), vrep: cell(Generators { vertices, rays }) })
    }

    /// Trusted constructor; both descriptions must describe the same set.
    pub fn from_both(dim: usize, hrep: Vec<Halfspace>, vrep: Generators) -> Self {
        let p = Polyhedron { dim, hrep: cell(hrep), vrep: cell(vrep) };
        debug_assert!(p.debug_reps_agree(), "inconsistent descriptions: {p:?}");
        p
    }

    pub fn whole_space(dim: usize) -> Self {
        let mut rays = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            rays.push(RationalVector::unit(dim, i));
            rays.push(-&RationalVector::unit(dim, i));
        }
        rays.sort();
        Polyhedron {
            dim,
            hrep: cell(Vec::new()),
            vrep: cell(Generators { vertices: vec![RationalVector::zeros(dim)], rays }),
        }
    }

    pub fn empty(dim: usize) -> Self {
        Polyhedron { dim, hrep: cell(empty_hrep(dim)), vrep: cell(Generators::default()) }
    }

    pub fn point(p: RationalVector) -> Self {
        let dim = p.dim();
        Polyhedron { dim, hrep: OnceLock::new(), vrep: cell(Generators { vertices: vec![p], rays: vec![] }) }
    }

    /// Axis-aligned box `[lo_i, hi_i]`.
    pub fn cube(lo: &RationalVector, hi: &RationalVector) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        let dim = lo.dim();
        let mut hs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            hs.push(Halfspace::new(RationalVector::unit(dim, i), hi[i].clone()));
            hs.push(Halfspace::new(-&RationalVector::unit(dim, i), -lo[i].clone()));
        }
        Polyhedron::from_hrep(dim, hs)
    }

    /// `cone(rays)`, the conic hull with apex at the origin.
    pub fn cone(dim: usize, rays: Vec<RationalVector>) -> Result<Self> {
        Polyhedron::from_vrep(dim, vec![RationalVector::zeros(dim)], rays)
    }

    pub fn interval(lo: Rational, hi: Rational) -> Self {
        Polyhedron::cube(&RationalVector(vec![lo]), &RationalVector(vec![hi])).expect("1-d box")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_hrep(&self) -> bool {
        self.hrep.get().is_some()
    }

    pub fn has_vrep(&self) -> bool {
        self.vrep.get().is_some()
    }

    pub fn emptiness(&self) -> Emptiness {
        match self.vrep.get() {
            Some(g) if g.is_empty_set() => Emptiness::Empty,
            Some(_) => Emptiness::Nonempty,
            None => Emptiness::Unknown,
        }
    }

    pub fn hrep(&self) -> Result<&[Halfspace]> {
        if let Some(h) = self.hrep.get() {
            return Ok(h);
        }
        let v = self.vrep.get().expect("at least one description");
        let h = v_to_h(self.dim, v)?;
        let _ = self.hrep.set(h);
        Ok(self.hrep.get().expect("just set"))
    }

    pub fn vrep(&self) -> Result<&Generators> {
        if let Some(v) = self.vrep.get() {
            return Ok(v);
        }
        let h = self.hrep.get().expect("at least one description");
        let v = h_to_v(self.dim, h)?;
        let _ = self.vrep.set(v);
        Ok(self.vrep.get().expect("just set"))
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.vrep()?.is_empty_set())
    }

    pub fn is_bounded(&self) -> Result<bool> {
        Ok(self.vrep()?.is_bounded())
    }

    pub fn is_whole_space(&self) -> Result<bool> {
        Ok(self.dual_description()?.hrep()?.is_empty())
    }

    /// Both descriptions, irredundant and sorted.
    pub fn dual_description(&self) -> Result<Polyhedron> {
        if self.dim > limits().max_dim {
            return Err(Error::CapExceeded { what: "dimension", limit: limits().max_dim });
        }
        if self.hrep.get().is_some() {
            let v = h_to_v(self.dim, self.hrep()?)?;
            if v.is_empty_set() {
                return Ok(Polyhedron::empty(self.dim));
            }
            let h = v_to_h(self.dim, &v)?;
            Ok(Polyhedron::from_both(self.dim, h, v))
        } else {
            let v0 = self.vrep()?;
            if v0.is_empty_set() {
                return Ok(Polyhedron::empty(self.dim));
            }
            let h = v_to_h(self.dim, v0)?;
            let v = h_to_v(self.dim, &h)?;
            Ok(Polyhedron::from_both(self.dim, h, v))
        }
    }

    fn debug_reps_agree(&self) -> bool {
        let (Some(h), Some(v)) = (self.hrep.get(), self.vrep.get()) else { return true };
        if v.is_empty_set() {
            return h_to_v(self.dim, h).map(|g| g.is_empty_set()).unwrap_or(true);
        }
        let gens_inside = v.vertices.iter().all(|x| h.iter().all(|hs| hs.contains(x)))
            && v.rays.iter().all(|r| h.iter().all(|hs| hs.normal.dot(r) <= Rational::zero()));
        let back = match v_to_h(self.dim, v) {
            Ok(b) => b,
            Err(_) => return gens_inside,
        };
        let vh = match h_to_v(self.dim, h) {
            Ok(g) => g,
            Err(_) => return gens_inside,
        };
        gens_inside
            && vh.vertices.iter().all(|x| back.iter().all(|hs| hs.contains(x)))
            && vh.rays.iter().all(|r| back.iter().all(|hs| hs.normal.dot(r) <= Rational::zero()))
    }

    /// Exact membership test. Uses inequalities when available, otherwise a
    /// feasibility LP over the generators.
    pub fn contains_point(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.dim)?;
        if let Some(h) = self.hrep.get() {
            return Ok(h.iter().all(|hs| hs.contains(x)));
        }
        let g = self.vrep.get().expect("at least one description");
        if g.is_empty_set() {
            return Ok(false);
        }
        Ok(generator_membership_lp(self.dim, g, x).is_feasible())
    }

    /// `Ok(None)` if `other ⊆ self`, otherwise a point of `other` outside `self`.
    pub fn containment_witness(&self, other: &Polyhedron) -> Result<Option<RationalVector>> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let q = other.vrep()?;
        if q.is_empty_set() {
            return Ok(None);
        }
        let h = self.hrep()?;
        for v in &q.vertices {
            if let Some(hs) = h.iter().find(|hs| !hs.contains(v)) {
                let _ = hs;
                return Ok(Some(v.clone()));
            }
        }
        let base = &q.vertices[0];
        for r in &q.rays {
            if let Some(hs) = h.iter().find(|hs| hs.normal.dot(r).is_positive()) {
                // Walk far enough along the ray to cross the facet.
                let step = (&hs.offset - hs.normal.dot(base)) / hs.normal.dot(r) + Rational::one();
                let step = if step.is_negative() { Rational::one() } else { step };
                return Ok(Some(base + &r.scale(&step)));
            }
        }
        Ok(None)
    }

    pub fn contains(&self, other: &Polyhedron) -> Result<bool> {
        Ok(self.containment_witness(other)?.is_none())
    }

    /// Set equality by mutual containment.
    pub fn same_set(&self, other: &Polyhedron) -> Result<bool> {
        Ok(self.contains(other)? && other.contains(self)?)
    }

    pub fn negate(&self) -> Result<Polyhedron> {
        let g = self.vrep()?;
        Polyhedron::from_vrep(
            self.dim,
            g.vertices.iter().map(|v| -v).collect(),
            g.rays.iter().map(|r| -r).collect(),
        )
    }
}

pub(crate) fn generator_membership_lp(dim: usize, g: &Generators, x: &RationalVector) -> LpOutcome {
    let nv = g.vertices.len();
    let nr = g.rays.len();
    let mut lp = StandardLp::new(nv + nr);
    for i in 0..dim {
        let mut row = Vec::with_capacity(nv + nr);
        row.extend(g.vertices.iter().map(|v| v[i].clone()));
        row.extend(g.rays.iter().map(|r| r[i].clone()));
        lp.add_row(row, x[i].clone());
    }
    let mut convex = vec![Rational::one(); nv];
    convex.extend((0..nr).map(|_| Rational::zero()));
    lp.add_row(convex, Rational::one());
    lp.solve()
}

fn to_ivec(v: &[Rational]) -> IVec {
    primitive_integer(v)
}

fn int_to_rat(v: &[BigInt]) -> RationalVector {
    RationalVector(v.iter().cloned().map(BigRational::from_integer).collect())
}

pub(crate) fn h_to_v(dim: usize, hs: &[Halfspace]) -> Result<Generators> {
    let lim = limits();
    if dim > lim.max_dim {
        return Err(Error::CapExceeded { what: "dimension", limit: lim.max_dim });
    }
    // Homogenize: <a, x> - b t <= 0, -t <= 0.
    let mut rows: Vec<IVec> = Vec::with_capacity(hs.len() + 1);
    let mut t_row = vec![BigInt::zero(); dim + 1];
    t_row[dim] = BigInt::from(-1);
    rows.push(t_row);
    for h in hs {
        let mut r: Vec<Rational> = h.normal.0.clone();
        r.push(-h.offset.clone());
        rows.push(to_ivec(&r));
    }
    let gens = cone_generators(&rows, dim + 1, lim.max_generators)?;
    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in &gens.rays {
        let t = &r[dim];
        if t.is_positive() {
            let t = BigRational::from_integer(t.clone());
            vertices.push(RationalVector(
                r[..dim].iter().map(|x| BigRational::from_integer(x.clone()) / &t).collect(),
            ));
        } else {
            rays.push(int_to_rat(&r[..dim]).primitive());
        }
    }
    if vertices.is_empty() {
        return Ok(Generators::default());
    }
    for l in &gens.lines {
        let l = int_to_rat(&l[..dim]).primitive();
        rays.push(-&l);
        rays.push(l);
    }
    if vertices.len() + rays.len() > lim.max_generators {
        return Err(Error::CapExceeded { what: "generator count", limit: lim.max_generators });
    }
    vertices.sort();
    vertices.dedup();
    rays.sort();
    rays.dedup();
    Ok(Generators { vertices, rays })
}

pub(crate) fn v_to_h(dim: usize, g: &Generators) -> Result<Vec<Halfspace>> {
    let lim = limits();
    if dim > lim.max_dim {
        return Err(Error::CapExceeded { what: "dimension", limit: lim.max_dim });
    }
    if g.is_empty_set() {
        return Ok(empty_hrep(dim));
    }
    let mut rows: Vec<IVec> = Vec::with_capacity(g.vertices.len() + g.rays.len());
    for v in &g.vertices {
        let mut r = v.0.clone();
        r.push(Rational::one());
        rows.push(to_ivec(&r));
    }
    for ray in &g.rays {
        let mut r = ray.0.clone();
        r.push(Rational::zero());
        rows.push(to_ivec(&r));
    }
    let polar = cone_generators(&rows, dim + 1, lim.max_generators)?;
    let mut hs = Vec::new();
    let to_half = |y: &IVec| {
        let y = int_to_rat(y);
        let (beta, a) = y.0.split_last().expect("nonempty");
        Halfspace::new(RationalVector(a.to_vec()), -beta.clone())
    };
    for y in &polar.rays {
        let h = to_half(y);
        if !h.is_trivial() {
            hs.push(h.normalized());
        }
    }
    for y in &polar.lines {
        let h = to_half(y);
        if h.is_trivial() {
            continue;
        }
        let neg = Halfspace::new(-&h.normal, -h.offset.clone());
        hs.push(h.normalized());
        hs.push(neg.normalized());
    }
    if hs.len() > lim.max_generators {
        return Err(Error::CapExceeded { what: "facet count", limit: lim.max_generators });
    }
    hs.sort();
    hs.dedup();
    Ok(hs)
}

#[derive(Serialize, Deserialize)]
struct PolyhedronJson {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hrep: Option<Vec<Halfspace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vrep: Option<Generators>,
}

impl Serialize for Polyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyhedronJson { dim: self.dim, hrep: self.hrep.get().cloned(), vrep: self.vrep.get().cloned() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolyhedronJson::deserialize(d)?;
        let bad = |e: Error| serde::de::Error::custom(e.to_string());
        match (j.hrep, j.vrep) {
            (Some(h), Some(v)) => {
                for x in h.iter().map(|h| &h.normal).chain(&v.vertices).chain(&v.rays) {
                    x.check_dim(j.dim).map_err(bad)?;
                }
                let p = Polyhedron { dim: j.dim, hrep: cell(h), vrep: cell(v) };
                if cfg!(debug_assertions) && !p.debug_reps_agree() {
                    return Err(serde::de::Error::custom("hrep and vrep describe different sets"));
                }
                Ok(p)
            }
            (Some(h), None) => Polyhedron::from_hrep(j.dim, h).map_err(bad),
            (None, Some(v)) => Polyhedron::from_vrep(j.dim, v.vertices, v.rays).map_err(bad),
            (None, None) => Err(serde::de::Error::custom("polyhedron needs hrep or vrep")),
        }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.vrep.get() {
            Some(g) if g.is_empty_set() => write!(f, "∅"),
            Some(g) => {
                if self.dim == 1 && g.rays.is_empty() {
                    let lo = g.vertices.iter().map(|v| &v[0]).min().expect("nonempty");
                    let hi = g.vertices.iter().map(|v| &v[0]).max().expect("nonempty");
                    return if lo == hi { write!(f, "{{{lo}}}") } else { write!(f, "[{lo}, {hi}]") };
                }
                write!(f, "conv{{")?;
                for (i, v) in g.vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")?;
                if !g.rays.is_empty() {
                    write!(f, " + cone{{")?;
                    for (i, r) in g.rays.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{r}")?;
                    }
                    write!(f, "}}")?;
                }
                Ok(())
            }
            None => write!(f, "{} halfspaces in dim {}", self.hrep.get().map_or(0, |h| h.len()), self.dim),
        }
    }
}
