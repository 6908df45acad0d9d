//! Searches for violations of approximate convexity, approximate
//! starshapedness and its directional variant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dini::add;
use super::plan::{best_of, terminal_verdict, ProbeVerdict, SamplingPlan, ShellResult, ShellStat, Witness};
use crate::error::{Error, Result};
use crate::funcmodel::RealFunction;

/// Maximum number of halvings when refining a window around a defect.
const REFINE_DEPTH: usize = 56;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RegularityMode {
    /// `x, y` near `x̄`.
    Convex,
    /// `y = x̄`.
    Starshaped,
    /// `y = x̄` and `x = x̄ + s v` with `v` near the unit vector `u`.
    Directional { u: Vec<f64> },
}

/// `f((1-t)y + tx) - (1-t)f(y) - t f(x) - ε t(1-t)||x - y||`, less a
/// rounding guard. Positive values are violations.
pub fn chord_margin(f: &dyn RealFunction, x: &[f64], y: &[f64], t: f64, eps: f64, plan: &SamplingPlan) -> Option<f64> {
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - t) * b + t * a).collect();
    let fx = f.eval_f64(x).ok()?;
    let fy = f.eval_f64(y).ok()?;
    let fz = f.eval_f64(&z).ok()?;
    if !(fx.is_finite() && fy.is_finite() && fz.is_finite()) {
        return None;
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let slack = eps * t * (1.0 - t) * plan.norm.eval_f64(&d);
    let rhs = (1.0 - t) * fy + t * fx + slack;
    let guard = 1e-12 * (fz.abs() + fx.abs() + fy.abs() + slack) + f64::MIN_POSITIVE;
    Some(fz - rhs - guard)
}

fn in_cube(x: &[f64], center: &[f64], r: f64) -> bool {
    x.iter().zip(center).all(|(a, c)| (a - c).abs() <= r)
}

fn cube_point(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    center.iter().map(|c| c + r * (2.0 * rng.gen::<f64>() - 1.0)).collect()
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| 0.5 * p + 0.5 * q).collect()
}

/// Halves `[a, b]` towards the side with the larger second difference and
/// reports the best midpoint-convexity triple met on the way.
fn refine(f: &dyn RealFunction, a: Vec<f64>, b: Vec<f64>, eps: f64, plan: &SamplingPlan) -> Option<(f64, Witness)> {
    let (mut lo, mut hi) = (a, b);
    let val = |x: &[f64]| f.eval_f64(x).ok().filter(|v| v.is_finite());
    let mut best: Option<(f64, Witness)> = None;
    for _ in 0..REFINE_DEPTH {
        // Below this width rounding in `f` swamps the slack term.
        let width = lo.iter().zip(&hi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = lo.iter().chain(&hi).map(|a| a.abs()).fold(0.0, f64::max);
        if width <= 1e-12 * scale {
            break;
        }
        let m = midpoint(&lo, &hi);
        if let Some(g) = chord_margin(f, &lo, &hi, 0.5, eps, plan) {
            let cand = (g, Witness::Convexity { x: lo.clone(), y: hi.clone(), t: 0.5, margin: g });
            if best.as_ref().map_or(true, |b| super::plan::better(&cand, b)) {
                best = Some(cand);
            }
        }
        let (q1, q2) = (midpoint(&lo, &m), midpoint(&m, &hi));
        let (Some(fl), Some(fm), Some(fh), Some(f1), Some(f2)) = (val(&lo), val(&m), val(&hi), val(&q1), val(&q2))
        else {
            break;
        };
        let left = (f1 - 0.5 * (fl + fm)).abs();
        let right = (f2 - 0.5 * (fm + fh)).abs();
        if left >= right {
            hi = m;
        } else {
            lo = m;
        }
    }
    best
}

fn convex_shell(f: &dyn RealFunction, x_bar: &[f64], eps: f64, delta: f64, plan: &SamplingPlan, s: usize) -> ShellResult {
    let mut rng = plan.rng(0xC0, s);
    let n = x_bar.len();
    let levels = ((1.0 / delta).log2() / 2.0).ceil() as i32 + 4;
    let mut inf = f64::INFINITY;
    let mut cands = Vec::new();
    for i in 0..plan.samples_per_shell {
        if i % 2 == 0 {
            let x = cube_point(&mut rng, x_bar, delta);
            let y = cube_point(&mut rng, x_bar, delta);
            let t = rng.gen::<f64>();
            if let Some(g) = chord_margin(f, &x, &y, t, eps, plan) {
                inf = inf.min(-g);
                if g > 0.0 {
                    cands.push((g, Witness::Convexity { x, y, t, margin: g }));
                }
            }
        } else {
            let c = cube_point(&mut rng, x_bar, delta);
            let k = rng.gen_range(0..=levels);
            let w = delta * 4f64.powi(-k);
            let dir: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
            let a = add(&c, -0.5 * w, &dir);
            let b = add(&c, 0.5 * w, &dir);
            if !in_cube(&a, x_bar, delta) || !in_cube(&b, x_bar, delta) {
                continue;
            }
            if let Some((g, wit)) = refine(f, a, b, eps, plan) {
                inf = inf.min(-g);
                if g > 0.0 {
                    cands.push((g, wit));
                }
            }
        }
    }
    ShellResult { stat: ShellStat { radius: delta, inf }, witness: best_of(cands) }
}

fn star_shell(
    f: &dyn RealFunction,
    x_bar: &[f64],
    eps: f64,
    dir: Option<&[f64]>,
    delta: f64,
    plan: &SamplingPlan,
    s: usize,
) -> ShellResult {
    let mut rng = plan.rng(if dir.is_some() { 0xD5 } else { 0x55 }, s);
    let mut inf = f64::INFINITY;
    let mut cands = Vec::new();
    for _ in 0..plan.samples_per_shell {
        let x = match dir {
            None => cube_point(&mut rng, x_bar, delta),
            Some(u) => {
                let v = cube_point(&mut rng, u, delta);
                let sv = delta * (1.0 - rng.gen::<f64>());
                add(x_bar, sv, &v)
            }
        };
        let t = rng.gen::<f64>();
        if let Some(g) = chord_margin(f, &x, x_bar, t, eps, plan) {
            inf = inf.min(-g);
            if g > 0.0 {
                cands.push((g, Witness::Starshaped { x, t, margin: g }));
            }
        }
    }
    ShellResult { stat: ShellStat { radius: delta, inf }, witness: best_of(cands) }
}

pub fn approx_regularity_probe(
    f: &dyn RealFunction,
    x_bar: &[f64],
    eps: f64,
    mode: &RegularityMode,
    plan: &SamplingPlan,
) -> Result<ProbeVerdict> {
    plan.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    if x_bar.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x_bar.len() });
    }
    if !f.eval_f64(x_bar)?.is_finite() {
        return Err(Error::PointOutsideDomain);
    }
    if let RegularityMode::Directional { u } = mode {
        if u.len() != x_bar.len() {
            return Err(Error::DimensionMismatch { expected: x_bar.len(), found: u.len() });
        }
        if (plan.norm.eval_f64(u) - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid("direction must lie on the unit sphere".into()));
        }
    }
    let shells: Vec<ShellResult> = plan
        .shell_radii
        .par_iter()
        .enumerate()
        .map(|(s, &delta)| match mode {
            RegularityMode::Convex => convex_shell(f, x_bar, eps, delta, plan, s),
            RegularityMode::Starshaped => star_shell(f, x_bar, eps, None, delta, plan, s),
            RegularityMode::Directional { u } => star_shell(f, x_bar, eps, Some(u), delta, plan, s),
        })
        .collect();
    Ok(terminal_verdict(shells, plan.stabilization_window))
}

/// Recomputes the margin of a witness from [`approx_regularity_probe`].
pub fn replay_regularity(f: &dyn RealFunction, x_bar: &[f64], eps: f64, w: &Witness, plan: &SamplingPlan) -> Option<f64> {
    match w {
        Witness::Convexity { x, y, t, .. } => chord_margin(f, x, y, *t, eps, plan),
        Witness::Starshaped { x, t, .. } => chord_margin(f, x, x_bar, *t, eps, plan),
        _ => None,
    }
}
