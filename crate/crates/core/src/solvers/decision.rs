use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ClientId, EsId, Pair};

/// Per-pair real values: participation probabilities, estimates, UCB scores.
pub type PairScores = BTreeMap<Pair, f64>;

/// Budget slack tolerated when checking knapsack constraints.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// One round's selection problem: client costs, per-ES budgets and connectivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub costs: Vec<f64>,
    pub budgets: Vec<f64>,
    pub feasible: Vec<BTreeSet<ClientId>>,
}

impl Instance {
    /// Instance where every ES has the same budget.
    pub fn new(budget: f64, costs: Vec<f64>, feasible: Vec<BTreeSet<ClientId>>) -> Self {
        let budgets = vec![budget; feasible.len()];
        Self {
            costs,
            budgets,
            feasible,
        }
    }

    pub fn num_clients(&self) -> usize {
        self.costs.len()
    }

    pub fn num_es(&self) -> usize {
        self.feasible.len()
    }

    pub fn cost(&self, client: ClientId) -> f64 {
        self.costs[client.0]
    }

    pub fn budget(&self, es: EsId) -> f64 {
        self.budgets[es.0]
    }

    pub fn is_feasible(&self, client: ClientId, es: EsId) -> bool {
        self.feasible
            .get(es.0)
            .is_some_and(|set| set.contains(&client))
    }

    /// Number of `(client, es)` pairs that could be assigned.
    pub fn assignable_pairs(&self) -> usize {
        self.feasible.iter().map(BTreeSet::len).sum()
    }

    /// Feasible pairs ordered by client id, then ES id.
    pub fn pairs(&self) -> Vec<Pair> {
        let mut out: Vec<Pair> = self
            .feasible
            .iter()
            .enumerate()
            .flat_map(|(m, set)| set.iter().map(move |&n| (n, EsId(m))))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.len() != self.feasible.len() {
            return Err(Error::InvalidInput("one budget per ES required".into()));
        }
        if let Some(c) = self.costs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "costs must be positive, got {c}"
            )));
        }
        if self.budgets.iter().any(|b| b.is_nan() || *b < 0.0) {
            return Err(Error::InvalidInput("budgets must be non-negative".into()));
        }
        let n = self.num_clients();
        if self.feasible.iter().flatten().any(|c| c.0 >= n) {
            return Err(Error::InvalidInput(
                "feasible set references unknown client".into(),
            ));
        }
        Ok(())
    }
}

/// Reason a decision breaks the selection constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Budget { es: EsId, spent: f64, budget: f64 },
    Feasibility { client: ClientId, es: EsId },
    Matroid { client: ClientId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Budget { es, spent, budget } => {
                write!(f, "es {es} spends {spent} over budget {budget}")
            }
            Violation::Feasibility { client, es } => {
                write!(f, "client {client} is not reachable from es {es}")
            }
            Violation::Matroid { client } => write!(f, "client {client} assigned to several ESs"),
        }
    }
}

/// Assignment of clients to edge servers for one round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionDecision {
    assignment: Vec<BTreeSet<ClientId>>,
}

impl SelectionDecision {
    pub fn empty(num_es: usize) -> Self {
        Self {
            assignment: vec![BTreeSet::new(); num_es],
        }
    }

    pub fn from_pairs(num_es: usize, pairs: impl IntoIterator<Item = Pair>) -> Self {
        let mut d = Self::empty(num_es);
        for (n, m) in pairs {
            d.assign(n, m);
        }
        d
    }

    pub fn num_es(&self) -> usize {
        self.assignment.len()
    }

    /// Adds `client` to `es`. Does not check any constraint.
    pub fn assign(&mut self, client: ClientId, es: EsId) {
        self.assignment[es.0].insert(client);
    }

    pub fn clients_of(&self, es: EsId) -> &BTreeSet<ClientId> {
        &self.assignment[es.0]
    }

    pub fn es_of(&self, client: ClientId) -> Option<EsId> {
        self.assignment
            .iter()
            .position(|set| set.contains(&client))
            .map(EsId)
    }

    pub fn contains(&self, client: ClientId, es: EsId) -> bool {
        self.assignment[es.0].contains(&client)
    }

    /// Assigned pairs ordered by client id, then ES id.
    pub fn pairs(&self) -> Vec<Pair> {
        let mut out: Vec<Pair> = self
            .assignment
            .iter()
            .enumerate()
            .flat_map(|(m, set)| set.iter().map(move |&n| (n, EsId(m))))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn len(&self) -> usize {
        self.assignment.iter().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.iter().all(BTreeSet::is_empty)
    }

    pub fn spent(&self, es: EsId, instance: &Instance) -> f64 {
        self.assignment[es.0]
            .iter()
            .map(|&n| instance.cost(n))
            .sum()
    }

    /// Merges `other` into `self`; pairs of `other` win nothing if the client is
    /// already assigned.
    pub fn extend_with(&mut self, other: &SelectionDecision) {
        for (n, m) in other.pairs() {
            if self.es_of(n).is_none() {
                self.assign(n, m);
            }
        }
    }

    /// Checks the knapsack, connectivity and one-ES-per-client constraints.
    pub fn violations(&self, instance: &Instance) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for (m, set) in self.assignment.iter().enumerate() {
            let es = EsId(m);
            for &n in set {
                if !instance.is_feasible(n, es) {
                    out.push(Violation::Feasibility { client: n, es });
                }
                if !seen.insert(n) {
                    out.push(Violation::Matroid { client: n });
                }
            }
            if m < instance.num_es() {
                let spent = self.spent(es, instance);
                let budget = instance.budget(es);
                if spent > budget + BUDGET_TOLERANCE {
                    out.push(Violation::Budget { es, spent, budget });
                }
            }
        }
        out
    }

    pub fn is_valid(&self, instance: &Instance) -> bool {
        self.assignment.len() == instance.num_es() && self.violations(instance).is_empty()
    }

    /// `n:m` pairs joined by `|`.
    pub fn summary(&self) -> String {
        self.pairs()
            .iter()
            .map(|(n, m)| format!("{n}:{m}"))
            .collect::<Vec<_>>()
            .join("|")
    }
}
