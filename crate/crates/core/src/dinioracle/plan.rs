//! Sampling plans, verdicts and witnesses shared by all probes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::polykernel::NormSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub shell_radii: Vec<f64>,
    pub samples_per_shell: usize,
    pub seed: u64,
    pub stabilization_window: usize,
    pub stabilization_tol: f64,
    /// Quotients below this count as divergence to `-inf`.
    pub divergence_threshold: f64,
    /// Primal norm used in the `||x - y||` terms.
    pub norm: NormSpec,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            shell_radii: Self::dyadic_radii(1, 20),
            samples_per_shell: 256,
            seed: 0x5eed,
            stabilization_window: 4,
            stabilization_tol: 1e-6,
            divergence_threshold: -1e6,
            norm: NormSpec::L1,
        }
    }
}

impl SamplingPlan {
    /// `2^-first, ..., 2^-last`.
    pub fn dyadic_radii(first: i32, last: i32) -> Vec<f64> {
        (first..=last).map(|k| 2f64.powi(-k)).collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radii(mut self, first: i32, last: i32) -> Self {
        self.shell_radii = Self::dyadic_radii(first, last);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.shell_radii.is_empty() {
            return Err(Error::Invalid("sampling plan needs at least one shell".into()));
        }
        if self.shell_radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Invalid("shell radii must be positive and finite".into()));
        }
        if self.shell_radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Invalid("shell radii must be strictly decreasing".into()));
        }
        if self.samples_per_shell == 0 || self.stabilization_window == 0 {
            return Err(Error::Invalid("sample count and window must be positive".into()));
        }
        if !(self.stabilization_tol > 0.0) {
            return Err(Error::Invalid("stabilization tolerance must be positive".into()));
        }
        self.norm.validate()
    }

    /// Independent stream for one (probe, shell) pair.
    pub(crate) fn rng(&self, tag: u64, shell: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ shell as u64);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Holds,
    FailsWithWitness,
    Inconclusive,
}

/// Concrete data exhibiting a violation; each variant replays through the
/// probe that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `(f(x) - f(x̄)) / t` with `x = x̄ + t u`.
    Quotient { x: Vec<f64>, t: f64, quotient: f64 },
    /// Point violating the ε-subgradient inequality.
    Subgradient { x: Vec<f64>, margin: f64 },
    /// `f((1-t)y + tx)` exceeds the relaxed chord.
    Convexity { x: Vec<f64>, y: Vec<f64>, t: f64, margin: f64 },
    /// Same as `Convexity` with `y = x̄`, or `x = x̄ + s v` in directional mode.
    Starshaped { x: Vec<f64>, t: f64, margin: f64 },
    /// Gap between the subdifferential at `x̄` and at `x`.
    Gap {
        x: Vec<f64>,
        #[serde(serialize_with = "ser_ext_f64", deserialize_with = "de_ext_f64")]
        gap: f64,
    },
    /// Feasible point with `f(x) < f(x̄) - ε ||x - x̄||`.
    Blunt { x: Vec<f64>, margin: f64 },
}

impl Witness {
    pub fn point(&self) -> &[f64] {
        match self {
            Witness::Quotient { x, .. }
            | Witness::Subgradient { x, .. }
            | Witness::Convexity { x, .. }
            | Witness::Starshaped { x, .. }
            | Witness::Gap { x, .. }
            | Witness::Blunt { x, .. } => x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellStat {
    pub radius: f64,
    /// Smallest value of the probed statistic in this shell.
    #[serde(serialize_with = "ser_ext_f64", deserialize_with = "de_ext_f64")]
    pub inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeVerdict {
    pub status: ProbeStatus,
    pub witness: Option<Witness>,
    pub shells: Vec<ShellStat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ProbeVerdict {
    pub fn holds(reason: impl Into<String>) -> Self {
        ProbeVerdict { status: ProbeStatus::Holds, witness: None, shells: vec![], reason: Some(reason.into()) }
    }

    pub fn is_holds(&self) -> bool {
        self.status == ProbeStatus::Holds
    }

    pub fn is_fail(&self) -> bool {
        self.status == ProbeStatus::FailsWithWitness
    }
}

/// Non-finite floats are written as strings so the JSON stays valid.
pub(crate) fn ser_ext_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn de_ext_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        N(f64),
        S(String),
    }
    match Raw::deserialize(d)? {
        Raw::N(v) => Ok(v),
        Raw::S(s) => match s.as_str() {
            "+inf" | "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(serde::de::Error::custom(format!("bad float `{s}`"))),
        },
    }
}

/// Per-shell outcome of a falsification search.
pub(crate) struct ShellResult {
    pub stat: ShellStat,
    pub witness: Option<(f64, Witness)>,
}

/// Verdict for "eventually holds": the property holds if the terminal
/// `window` shells are violation-free and fails if every one of them has a
/// violation (the witness comes from the smallest shell).
pub(crate) fn terminal_verdict(shells: Vec<ShellResult>, window: usize) -> ProbeVerdict {
    let tail = &shells[shells.len().saturating_sub(window)..];
    let clean = tail.iter().all(|s| s.witness.is_none());
    let dirty = tail.iter().all(|s| s.witness.is_some());
    let witness = if dirty { tail.last().and_then(|s| s.witness.as_ref()).map(|w| w.1.clone()) } else { None };
    let status = if clean {
        ProbeStatus::Holds
    } else if dirty {
        ProbeStatus::FailsWithWitness
    } else {
        ProbeStatus::Inconclusive
    };
    let reason = match status {
        ProbeStatus::Holds => Some(format!("no violation in the last {} shells", tail.len())),
        ProbeStatus::FailsWithWitness => Some(format!("violations in each of the last {} shells", tail.len())),
        ProbeStatus::Inconclusive => Some("violations found in some but not all terminal shells".into()),
    };
    ProbeVerdict { status, witness, shells: shells.into_iter().map(|s| s.stat).collect(), reason }
}

/// Keeps the candidate with the larger margin; ties go to the
/// lexicographically smaller point.
pub(crate) fn better(a: &(f64, Witness), b: &(f64, Witness)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => lex_cmp(a.1.point(), b.1.point()) == std::cmp::Ordering::Less,
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn best_of(cands: impl IntoIterator<Item = (f64, Witness)>) -> Option<(f64, Witness)> {
    let mut best: Option<(f64, Witness)> = None;
    for c in cands {
        if best.as_ref().map_or(true, |b| better(&c, b)) {
            best = Some(c);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_is_valid() {
        let p = SamplingPlan::default();
        p.validate().unwrap();
        assert_eq!(p.shell_radii.len(), 20);
        assert_eq!(p.shell_radii[0], 0.5);
        let mut bad = p.clone();
        bad.shell_radii = vec![0.1, 0.2];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let v = ProbeVerdict {
            status: ProbeStatus::FailsWithWitness,
            witness: Some(Witness::Gap { x: vec![0.5], gap: f64::INFINITY }),
            shells: vec![ShellStat { radius: 0.5, inf: f64::NEG_INFINITY }],
            reason: None,
        };
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"status":"fails_with_witness","witness":{"kind":"gap","x":[0.5],"gap":"+inf"},"shells":[{"radius":0.5,"inf":"-inf"}]}"#
        );
        let back: ProbeVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn streams_are_reproducible() {
        use rand::Rng;
        let p = SamplingPlan::default();
        let a: Vec<u64> = (0..4).map(|_| 0).scan(p.rng(3, 7), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(p.rng(3, 7), |r, _| Some(r.gen())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(p.rng(3, 8), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
