//! Dini-Hadamard directional derivative estimates, calmness and
//! ε-subgradient membership probes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{
    best_of, de_ext_f64, ser_ext_f64, terminal_verdict, ProbeStatus, ProbeVerdict, SamplingPlan, ShellResult,
    ShellStat, Witness,
};
use crate::error::{Error, Result};
use crate::funcmodel::RealFunction;

/// Octaves below the shell radius covered by the step-size samples.
const T_OCTAVES: f64 = 64.0;
/// Octaves covered by the radial samples of the membership probe.
const R_OCTAVES: f64 = 24.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiniShell {
    pub radius: f64,
    /// Samples whose realised direction stayed inside the ball. Zero when
    /// rounding of `x̄ + tu` rules out every sample at this radius.
    pub samples: usize,
    /// Raw sampled infimum of the difference quotient.
    #[serde(serialize_with = "ser_ext_f64", deserialize_with = "de_ext_f64")]
    pub inf: f64,
    /// Running maximum of the raw infima, i.e. the sup over radii seen so far.
    #[serde(serialize_with = "ser_ext_f64", deserialize_with = "de_ext_f64")]
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiniEstimate {
    #[serde(serialize_with = "ser_ext_f64", deserialize_with = "de_ext_f64")]
    pub estimate: f64,
    pub diverges: bool,
    pub stable: bool,
    pub shells: Vec<DiniShell>,
    /// Sample with the most negative quotient.
    pub witness: Option<Witness>,
}

fn check_point(f: &dyn RealFunction, x: &[f64]) -> Result<f64> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x.len() });
    }
    let fx = f.eval_f64(x)?;
    if !fx.is_finite() {
        return Err(Error::PointOutsideDomain);
    }
    Ok(fx)
}

pub(crate) fn add(x: &[f64], t: f64, u: &[f64]) -> Vec<f64> {
    x.iter().zip(u).map(|(a, b)| a + t * b).collect()
}

/// `(f(x) - f(x̄)) / t`, or `None` when `f(x)` is undefined.
fn quotient(f: &dyn RealFunction, f_bar: f64, x: &[f64], t: f64) -> Option<f64> {
    let fx = f.eval_f64(x).ok()?;
    if fx.is_nan() {
        return None;
    }
    Some((fx - f_bar) / t)
}

struct QuotientSample {
    x: Vec<f64>,
    t: f64,
    raw: f64,
    guarded: f64,
}

fn sample_shell(
    f: &dyn RealFunction,
    x_bar: &[f64],
    f_bar: f64,
    h: &[f64],
    delta: f64,
    plan: &SamplingPlan,
    shell: usize,
) -> Vec<QuotientSample> {
    let mut rng = plan.rng(0xD1, shell);
    let n = x_bar.len();
    let mut out = Vec::with_capacity(plan.samples_per_shell);
    for i in 0..plan.samples_per_shell {
        let t = delta * 2f64.powf(-T_OCTAVES * rng.gen::<f64>());
        let w: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let u: Vec<f64> = if i % 4 == 0 { h.to_vec() } else { h.iter().zip(&w).map(|(a, b)| a + delta * b).collect() };
        let x = add(x_bar, t, &u);
        if let Some(raw) = f.difference_quotient(x_bar, t, &u) {
            if t > 0.0 && !raw.is_nan() {
                let guard = 16.0 * f64::EPSILON * (1.0 + raw.abs()) * n as f64;
                out.push(QuotientSample { x, t, raw, guarded: raw + guard });
            }
            continue;
        }
        // The direction actually realised after rounding.
        let inside = x.iter().zip(x_bar).zip(h).all(|((xi, bi), hi)| ((xi - bi) / t - hi).abs() <= delta * (1.0 + 1e-9));
        if !inside || !(t > 0.0) {
            continue;
        }
        let Some(raw) = quotient(f, f_bar, &x, t) else { continue };
        let fx = raw * t + f_bar;
        let guard = 4.0 * f64::EPSILON * (fx.abs() + f_bar.abs()) / t;
        out.push(QuotientSample { x, t, raw, guarded: raw + guard });
    }
    out
}

/// Sampled `sup_δ inf_{u ∈ B(h,δ), t ∈ (0,δ)} (f(x̄+tu) - f(x̄))/t`.
pub fn dini_directional_estimate(
    f: &dyn RealFunction,
    x_bar: &[f64],
    h: &[f64],
    plan: &SamplingPlan,
) -> Result<DiniEstimate> {
    plan.validate()?;
    let f_bar = check_point(f, x_bar)?;
    if h.len() != x_bar.len() {
        return Err(Error::DimensionMismatch { expected: x_bar.len(), found: h.len() });
    }
    let per_shell: Vec<Vec<QuotientSample>> = plan
        .shell_radii
        .par_iter()
        .enumerate()
        .map(|(s, &delta)| sample_shell(f, x_bar, f_bar, h, delta, plan, s))
        .collect();

    let mut shells = Vec::with_capacity(per_shell.len());
    let mut envelope = f64::NEG_INFINITY;
    let mut cands = Vec::new();
    for (samples, &radius) in per_shell.iter().zip(&plan.shell_radii) {
        let inf = samples.iter().map(|q| q.guarded).fold(f64::INFINITY, f64::min);
        if !samples.is_empty() {
            envelope = envelope.max(inf);
        }
        shells.push(DiniShell { radius, samples: samples.len(), inf, envelope });
        if let Some(q) = samples.iter().min_by(|a, b| a.raw.total_cmp(&b.raw)) {
            cands.push((-q.raw, Witness::Quotient { x: q.x.clone(), t: q.t, quotient: q.raw }));
        }
    }
    let estimate = envelope;
    let resolved: Vec<&DiniShell> = shells.iter().filter(|s| s.samples > 0).collect();
    let tail = &resolved[resolved.len().saturating_sub(plan.stabilization_window)..];
    let lo = tail.iter().map(|s| s.envelope).fold(f64::INFINITY, f64::min);
    let stable = tail.len() == plan.stabilization_window.min(shells.len())
        && estimate.is_finite() && (estimate - lo).abs() <= plan.stabilization_tol * estimate.abs().max(1.0);
    let diverges = estimate < plan.divergence_threshold;
    Ok(DiniEstimate { estimate, diverges, stable, shells, witness: best_of(cands).map(|c| c.1) })
}

/// Calm at `x̄` iff `d⁻f(x̄; 0) = 0`.
pub fn calmness_probe(f: &dyn RealFunction, x_bar: &[f64], plan: &SamplingPlan) -> Result<ProbeVerdict> {
    if f.locally_lipschitz() {
        check_point(f, x_bar)?;
        return Ok(ProbeVerdict::holds("locally Lipschitz"));
    }
    let est = dini_directional_estimate(f, x_bar, &vec![0.0; x_bar.len()], plan)?;
    let shells = est.shells.iter().filter(|s| s.samples > 0).map(|s| ShellStat { radius: s.radius, inf: s.inf }).collect();
    let worst = match &est.witness {
        Some(Witness::Quotient { quotient, .. }) => *quotient,
        _ => f64::INFINITY,
    };
    let (status, witness, reason) = if worst < plan.divergence_threshold {
        (ProbeStatus::FailsWithWitness, est.witness.clone(), format!("quotient {worst:e} below the divergence threshold"))
    } else if est.stable && est.estimate.abs() <= plan.stabilization_tol {
        (ProbeStatus::Holds, None, "shell infima stabilise at 0".to_string())
    } else {
        (ProbeStatus::Inconclusive, None, format!("estimate {:e} did not stabilise at 0", est.estimate))
    };
    Ok(ProbeVerdict { status, witness, shells, reason: Some(reason) })
}

/// Positive when `x` violates `f(x) - f(x̄) >= <x*, x - x̄> - (α+ε)||x - x̄||`.
pub fn subgradient_margin(
    f: &dyn RealFunction,
    x_bar: &[f64],
    x_star: &[f64],
    eps: f64,
    alpha: f64,
    x: &[f64],
    plan: &SamplingPlan,
) -> Option<f64> {
    let f_bar = f.eval_f64(x_bar).ok()?;
    let fx = f.eval_f64(x).ok()?;
    if fx.is_nan() || fx == f64::INFINITY {
        return None;
    }
    let d: Vec<f64> = x.iter().zip(x_bar).map(|(a, b)| a - b).collect();
    let lin: f64 = x_star.iter().zip(&d).map(|(a, b)| a * b).sum();
    let nrm = plan.norm.eval_f64(&d);
    let rhs = lin - (alpha + eps) * nrm;
    let guard = 1e-12 * (fx.abs() + f_bar.abs() + lin.abs() + (alpha + eps) * nrm);
    Some(rhs - (fx - f_bar) - guard)
}

pub fn eps_subgradient_membership_probe(
    f: &dyn RealFunction,
    x_bar: &[f64],
    x_star: &[f64],
    eps: f64,
    alpha: f64,
    plan: &SamplingPlan,
) -> Result<ProbeVerdict> {
    plan.validate()?;
    if !(alpha > 0.0) {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    if eps < 0.0 {
        return Err(Error::NegativeEps);
    }
    check_point(f, x_bar)?;
    if x_star.len() != x_bar.len() {
        return Err(Error::DimensionMismatch { expected: x_bar.len(), found: x_star.len() });
    }
    let n = x_bar.len();
    let shells: Vec<ShellResult> = plan
        .shell_radii
        .par_iter()
        .enumerate()
        .map(|(s, &delta)| {
            let mut rng = plan.rng(0xE5, s);
            let mut inf = f64::INFINITY;
            let mut cands = Vec::new();
            for _ in 0..plan.samples_per_shell {
                let r = delta * 2f64.powf(-R_OCTAVES * rng.gen::<f64>());
                let w: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                let x = add(x_bar, r, &w);
                let Some(m) = subgradient_margin(f, x_bar, x_star, eps, alpha, &x, plan) else { continue };
                inf = inf.min(-m);
                if m > 0.0 {
                    cands.push((m, Witness::Subgradient { x, margin: m }));
                }
            }
            ShellResult { stat: ShellStat { radius: delta, inf }, witness: best_of(cands) }
        })
        .collect();
    let mut verdict = terminal_verdict(shells, plan.stabilization_window);
    if verdict.is_holds() {
        let calm = calmness_probe(f, x_bar, plan)?;
        if !calm.is_holds() {
            verdict.status = ProbeStatus::Inconclusive;
            verdict.reason = Some("no violation found but calmness is not established".into());
        }
    }
    Ok(verdict)
}

/// Re-evaluates a witness produced by [`calmness_probe`] or
/// [`dini_directional_estimate`].
pub fn replay_quotient(f: &dyn RealFunction, x_bar: &[f64], w: &Witness) -> Option<f64> {
    match w {
        Witness::Quotient { x, t, .. } => {
            let f_bar = f.eval_f64(x_bar).ok()?;
            quotient(f, f_bar, x, *t)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::{BlackBoxFunction, Expr};

    fn bb(src: &str) -> BlackBoxFunction {
        let e = Expr::from_json(&serde_json::from_str(src).unwrap()).unwrap();
        BlackBoxFunction::new(e, 1).unwrap()
    }

    #[test]
    fn neg_abs_derivative() {
        let f = bb(r#"["neg", ["abs", ["x", 0]]]"#);
        let e = dini_directional_estimate(&f, &[0.0], &[1.0], &SamplingPlan::default()).unwrap();
        assert!((e.estimate + 1.0).abs() <= 1e-6, "{}", e.estimate);
        assert!(!e.diverges);
    }

    #[test]
    fn abs_minus_square_derivative() {
        let f = bb(r#"["sub", ["abs", ["x", 0]], ["mul", ["x", 0], ["x", 0]]]"#);
        // The quadratic term biases shell δ by about 2δ.
        let plan = SamplingPlan::default().with_radii(1, 30);
        let e = dini_directional_estimate(&f, &[0.0], &[1.0], &plan).unwrap();
        assert!((e.estimate - 1.0).abs() <= 1e-6, "{}", e.estimate);
        assert!(e.stable);
    }

    #[test]
    fn neg_sqrt_diverges_and_is_not_calm() {
        let f = bb(r#"["neg", ["sqrt_abs", ["x", 0]]]"#);
        let plan = SamplingPlan::default();
        let e = dini_directional_estimate(&f, &[0.0], &[0.0], &plan).unwrap();
        assert!(e.diverges);
        let v = calmness_probe(&f, &[0.0], &plan).unwrap();
        assert_eq!(v.status, ProbeStatus::FailsWithWitness);
        let q = replay_quotient(&f, &[0.0], v.witness.as_ref().unwrap()).unwrap();
        assert!(q < plan.divergence_threshold);
    }

    #[test]
    fn calm_examples() {
        let plan = SamplingPlan::default();
        assert!(calmness_probe(&bb(r#"["abs", ["x", 0]]"#), &[0.0], &plan).unwrap().is_holds());
        assert!(calmness_probe(&bb("0"), &[0.0], &plan).unwrap().is_holds());
    }

    #[test]
    fn membership_examples() {
        let f = bb(r#"["abs", ["x", 0]]"#);
        let plan = SamplingPlan::default();
        assert!(eps_subgradient_membership_probe(&f, &[0.0], &[0.0], 0.0, 0.01, &plan).unwrap().is_holds());
        let v = eps_subgradient_membership_probe(&f, &[0.0], &[2.0], 0.0, 0.01, &plan).unwrap();
        assert!(v.is_fail());
        let x = v.witness.as_ref().unwrap().point().to_vec();
        assert!(x[0] > 0.0);
        assert!(subgradient_margin(&f, &[0.0], &[2.0], 0.0, 0.01, &x, &plan).unwrap() > 0.0);
        assert!(eps_subgradient_membership_probe(&f, &[0.0], &[2.0], 1.5, 0.01, &plan).unwrap().is_holds());
    }

    #[test]
    fn verdicts_are_deterministic() {
        let f = bb(r#"["neg", ["sqrt_abs", ["x", 0]]]"#);
        let plan = SamplingPlan::default().with_seed(99);
        let a = serde_json::to_string(&calmness_probe(&f, &[0.0], &plan).unwrap()).unwrap();
        let b = serde_json::to_string(&calmness_probe(&f, &[0.0], &plan).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
