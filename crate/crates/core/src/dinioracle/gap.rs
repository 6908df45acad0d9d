//! Gap-continuity probe for subdifferential maps of PA and DC functions.
//!
//! Sample points are floats converted exactly to rationals, so the gaps
//! themselves are exact.

use rand::Rng;
use rayon::prelude::*;

use super::plan::{best_of, terminal_verdict, ProbeVerdict, SamplingPlan, ShellResult, ShellStat, Witness};
use crate::error::{Error, Result};
use crate::funcmodel::{DCFunction, PAConvexFunction};
use crate::polykernel::rational::from_f64;
use crate::polykernel::{gap, int, Extended, NormSpec, Polyhedron, RationalVector};

/// Exact gap computations are costly; shells use at most this many points.
const MAX_GAP_SAMPLES: usize = 32;

#[derive(Clone, Debug)]
pub enum SubdifferentialMap {
    /// `x ↦ ∂h(x)`.
    Convex(PAConvexFunction),
    /// `x ↦ ∂⁻(g - h)(x)`.
    Dc(DCFunction),
}

impl SubdifferentialMap {
    pub fn dim(&self) -> usize {
        match self {
            SubdifferentialMap::Convex(h) => h.dim(),
            SubdifferentialMap::Dc(f) => f.dim(),
        }
    }

    /// Value of the map; empty outside the domain.
    pub fn at(&self, x: &RationalVector) -> Result<Polyhedron> {
        match self {
            SubdifferentialMap::Convex(h) => {
                if !h.in_domain(x)? {
                    return Ok(Polyhedron::empty(h.dim()));
                }
                h.subdifferential_at(x)
            }
            SubdifferentialMap::Dc(f) => match f.dc_dini_subdifferential(x, &int(0), &int(0), NormSpec::L1) {
                Ok(s) => Ok(s.set),
                Err(Error::PointOutsideDomain) => Ok(Polyhedron::empty(f.dim())),
                Err(e) => Err(e),
            },
        }
    }
}

fn gap_at(map: &SubdifferentialMap, base: &Polyhedron, x: &[f64], norm: NormSpec) -> Result<Extended> {
    let xr = RationalVector::from_f64_exact(x);
    gap(base, &map.at(&xr)?, norm)
}

/// Distances between subgradients are measured in the dual of the plan's
/// primal norm.
pub fn gap_continuity_probe(
    map: &SubdifferentialMap,
    x_bar: &RationalVector,
    eps: f64,
    plan: &SamplingPlan,
) -> Result<ProbeVerdict> {
    plan.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    x_bar.check_dim(map.dim())?;
    let base = map.at(x_bar)?;
    let norm = plan.norm.dual();
    let eps_q = from_f64(eps);
    let center = x_bar.to_f64();
    let samples = plan.samples_per_shell.min(MAX_GAP_SAMPLES);
    let shells = plan
        .shell_radii
        .par_iter()
        .enumerate()
        .map(|(s, &delta)| -> Result<ShellResult> {
            let mut rng = plan.rng(0x6A, s);
            let mut inf = f64::INFINITY;
            let mut cands = Vec::new();
            for _ in 0..samples {
                let x: Vec<f64> = center.iter().map(|c| c + delta * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                let g = gap_at(map, &base, &x, norm)?;
                let gf = g.to_f64();
                inf = inf.min(gf);
                let violated = match &g {
                    Extended::Finite(v) => v >= &eps_q,
                    Extended::PosInfinity => true,
                };
                if violated {
                    cands.push((gf - eps, Witness::Gap { x, gap: gf }));
                }
            }
            Ok(ShellResult { stat: ShellStat { radius: delta, inf }, witness: best_of(cands) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(terminal_verdict(shells, plan.stabilization_window))
}

/// Recomputes the gap at a witness point.
pub fn replay_gap(map: &SubdifferentialMap, x_bar: &RationalVector, w: &Witness, plan: &SamplingPlan) -> Result<Extended> {
    match w {
        Witness::Gap { x, .. } => gap_at(map, &map.at(x_bar)?, x, plan.norm.dual()),
        _ => Err(Error::Invalid("not a gap witness".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dinioracle::ProbeStatus;

    fn abs(scale: i64) -> PAConvexFunction {
        PAConvexFunction::scaled_abs_coord(1, 0, &int(scale))
    }

    #[test]
    fn abs_is_gap_continuous() {
        let v = gap_continuity_probe(&SubdifferentialMap::Convex(abs(1)), &RationalVector::from_i64(&[0]), 0.1, &SamplingPlan::default())
            .unwrap();
        assert!(v.is_holds());
        assert!(v.shells.iter().all(|s| s.inf == 0.0));
    }

    #[test]
    fn empty_subdifferential_fails() {
        let map = SubdifferentialMap::Dc(DCFunction::new(abs(1), abs(2)).unwrap());
        let x_bar = RationalVector::from_i64(&[0]);
        let plan = SamplingPlan::default();
        let v = gap_continuity_probe(&map, &x_bar, 0.1, &plan).unwrap();
        assert_eq!(v.status, ProbeStatus::FailsWithWitness);
        let w = v.witness.unwrap();
        assert_eq!(replay_gap(&map, &x_bar, &w, &plan).unwrap(), Extended::PosInfinity);
    }

    #[test]
    fn constant_map_holds() {
        let zero = PAConvexFunction::affine(RationalVector::from_i64(&[0, 0]), int(3));
        let v = gap_continuity_probe(&SubdifferentialMap::Convex(zero), &RationalVector::from_i64(&[1, 1]), 0.1, &SamplingPlan::default())
            .unwrap();
        assert!(v.is_holds());
    }

    #[test]
    fn boundary_of_domain_fails() {
        let h = PAConvexFunction::new(abs(1).pieces().to_vec(), Polyhedron::interval(int(0), int(1))).unwrap();
        let v = gap_continuity_probe(&SubdifferentialMap::Convex(h), &RationalVector::from_i64(&[0]), 0.1, &SamplingPlan::default())
            .unwrap();
        assert!(v.is_fail());
        assert!(v.witness.unwrap().point()[0] < 0.0);
    }
}
