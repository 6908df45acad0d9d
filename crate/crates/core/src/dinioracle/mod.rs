//! Floating-point sampling oracles for black-box functions.
//!
//! Sampling can falsify a local property but never prove it. A `Holds`
//! verdict means no violation was found in the terminal shells of the plan
//! (or an exact shortcut applied); `FailsWithWitness` means every terminal
//! shell produced a violation, and the reported witness replays.

mod dini;
mod gap;
mod plan;
mod regularity;

pub use dini::{
    calmness_probe, dini_directional_estimate, eps_subgradient_membership_probe, replay_quotient, subgradient_margin,
    DiniEstimate, DiniShell,
};
pub use gap::{gap_continuity_probe, replay_gap, SubdifferentialMap};
pub use plan::{ProbeStatus, ProbeVerdict, SamplingPlan, ShellStat, Witness};
pub use regularity::{approx_regularity_probe, chord_margin, replay_regularity, RegularityMode};
#[allow(unused_imports)]
pub(crate) use plan::{best_of, terminal_verdict, ShellResult};
