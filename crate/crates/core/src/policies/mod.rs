//! Client-selection policies behind one per-round interface.
//!
//! Each round the harness calls [`Policy::decide`] with what the operator can
//! observe, simulates the returned selection, and hands the outcomes back to
//! [`Policy::ingest`]. `decide` never mutates; `ingest` is the only place a
//! policy learns.

mod cocs;
mod cucb;
mod linucb;
mod oracle;
mod random;

pub use cocs::{Cocs, CocsCounters};
pub use cucb::Cucb;
pub use linucb::LinUcb;
pub use oracle::Oracle;
pub use random::RandomPolicy;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::env::{Outcomes, RoundState};
use crate::error::{Error, Result};
use crate::solvers::{PairScores, SelectionDecision};

/// Everything a policy may look at in one round.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInput<'a> {
    pub state: &'a RoundState,
    pub budget_per_es: f64,
    /// True participation probabilities. Only the Oracle reads them.
    pub truth: &'a PairScores,
}

/// Which branch produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Explore,
    Exploit,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Explore => "explore",
            Phase::Exploit => "exploit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub selection: SelectionDecision,
    /// Only COCS separates exploration from exploitation.
    pub phase: Option<Phase>,
}

impl Decision {
    pub fn new(selection: SelectionDecision, phase: Option<Phase>) -> Self {
        Self { selection, phase }
    }

    pub fn phase_tag(&self) -> &'static str {
        self.phase.map_or("na", Phase::as_str)
    }
}

pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision>;

    fn ingest(
        &mut self,
        input: &PolicyInput<'_>,
        decision: &Decision,
        outcomes: &Outcomes,
    ) -> Result<()>;

    /// Free-form notes for the run summary, e.g. which variant ran.
    fn metadata(&self) -> serde_json::Value {
        serde_json::Value::Null
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Oracle,
    Cocs,
    Cucb,
    Linucb,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Oracle,
        PolicyKind::Cocs,
        PolicyKind::Cucb,
        PolicyKind::Linucb,
        PolicyKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Oracle => "oracle",
            PolicyKind::Cocs => "cocs",
            PolicyKind::Cucb => "cucb",
            PolicyKind::Linucb => "linucb",
            PolicyKind::Random => "random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Checks that `outcomes` covers exactly the pairs of `selection`.
pub(crate) fn check_outcomes(selection: &SelectionDecision, outcomes: &Outcomes) -> Result<()> {
    for &(client, es) in outcomes.keys() {
        if !selection.contains(client, es) {
            return Err(Error::UnassignedOutcome { client, es });
        }
    }
    for (client, es) in selection.pairs() {
        if !outcomes.contains_key(&(client, es)) {
            return Err(Error::MissingOutcome { client, es });
        }
    }
    Ok(())
}
