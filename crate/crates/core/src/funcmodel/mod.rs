//! Function representations: PA convex functions, their differences and
//! black-box expressions.

mod dc;
mod expr;
mod file;
mod pa;

pub use dc::{DCFunction, DcSubdifferential, Hypothesis, HypothesisReport, HypothesisStatus, Provenance};
pub use expr::{remark_seven, BlackBoxFunction, Expr};
pub use file::{FunctionSpec, RealFunction};
#[allow(unused_imports)]
pub(crate) use file::{pa_to_json, parse_pa};
pub use pa::{AffinePiece, PAConvexFunction};
