//! Exact rational polyhedral geometry.
//!
//! Every value here is exact; there is no floating point in any set
//! operation. Polyhedra carry a halfspace description, a generator
//! description, or both, and convert between them by double description.

pub mod dd;
pub mod limits;
pub mod lp;
pub mod norm;
pub mod ops;
pub mod polyhedron;
pub mod rational;

pub use limits::{limits, set_limits, Limits};
pub use norm::{dual_norm_ball, NormSpec};
pub use ops::{
    affine_image, conic_hull, cone_is_linear_subspace, contains_point, contains_polyhedron, gap, intersect,
    intersect_all, is_cone, minkowski_sum, normal_cone_at, star_difference, support_function, Containment,
};
pub use polyhedron::{Emptiness, Generators, Halfspace, Polyhedron};
pub use rational::{int, parse_rational, rat, Extended, Rational, RationalVector};

/// Canonical form with both descriptions populated.
pub fn dual_description(p: &Polyhedron) -> crate::error::Result<Polyhedron> {
    p.dual_description()
}
