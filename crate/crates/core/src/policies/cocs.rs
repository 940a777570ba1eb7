use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_outcomes, Decision, Phase, Policy, PolicyInput, PolicyKind};
use crate::context::{
    under_explored, EstimatorSnapshotRow, EstimatorTable, ExplorationSchedule, HypercubeId,
    Partition,
};
use crate::env::{Outcomes, RoundState};
use crate::error::Result;
use crate::ids::{ClientId, EsId};
use crate::solvers::{
    solve_best, solve_max_cardinality, solve_two_stage_exploration, PairScores, UtilityKind,
};

type Key = (ClientId, EsId, HypercubeId);

/// Round and selection counts kept for diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CocsCounters {
    pub explore_rounds: u64,
    pub exploit_rounds: u64,
    /// Largest number of exploration selections made on one (pair, cell)
    /// while that key was under-explored.
    pub max_exploration_per_key: u64,
}

/// Context-aware online client selection.
///
/// Contexts are binned into a uniform grid and every (client, ES, cell) keeps
/// a running participation estimate. A round explores while any feasible
/// pair sits in a cell seen at most `K(t)` times, and exploits the estimates
/// otherwise.
#[derive(Debug, Clone)]
pub struct Cocs {
    partition: Partition,
    schedule: ExplorationSchedule,
    table: EstimatorTable,
    utility: UtilityKind,
    exact_cap: usize,
    epsilon: f64,
    exploration_selections: BTreeMap<Key, u64>,
    counters: CocsCounters,
}

impl Cocs {
    pub fn new(
        partition: Partition,
        schedule: ExplorationSchedule,
        utility: UtilityKind,
        exact_cap: usize,
        epsilon: f64,
    ) -> Self {
        Self {
            partition,
            schedule,
            table: EstimatorTable::new(),
            utility,
            exact_cap,
            epsilon,
            exploration_selections: BTreeMap::new(),
            counters: CocsCounters::default(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn schedule(&self) -> &ExplorationSchedule {
        &self.schedule
    }

    pub fn table(&self) -> &EstimatorTable {
        &self.table
    }

    pub fn counters(&self) -> &CocsCounters {
        &self.counters
    }

    /// Exploration selections per (pair, cell), counting only those made
    /// while the key was under-explored.
    pub fn exploration_selections(&self) -> &BTreeMap<Key, u64> {
        &self.exploration_selections
    }

    pub fn snapshot(&self) -> Vec<EstimatorSnapshotRow> {
        self.table.snapshot()
    }

    /// Replaces the estimator table, e.g. when resuming from a checkpoint.
    pub fn restore(&mut self, rows: Vec<EstimatorSnapshotRow>) -> Result<()> {
        self.table = EstimatorTable::from_snapshot(rows)?;
        Ok(())
    }

    /// Current estimate of every feasible pair at its current cell.
    pub fn estimates(&self, state: &RoundState) -> Result<PairScores> {
        let mut out = PairScores::new();
        for (n, m, phi) in state.feasible_pairs() {
            let cell = self.partition.locate(phi)?;
            out.insert((n, m), self.table.estimate(n, m, &cell));
        }
        Ok(out)
    }
}

impl Policy for Cocs {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Cocs
    }

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision> {
        let state = input.state;
        let num_es = state.num_es();
        let instance = state.instance(input.budget_per_es);
        let ue = under_explored(
            &self.table,
            &self.partition,
            &self.schedule,
            state.t,
            num_es,
            // a client priced above the budget can never be selected, so it
            // must not hold the round in exploration
            state
                .feasible_pairs()
                .filter(|&(n, _, _)| state.costs[n.0] <= input.budget_per_es),
        )?;
        if ue.is_empty() {
            let est = self.estimates(state)?;
            let sel = solve_best(&instance, &est, self.utility, self.exact_cap, self.epsilon)?;
            return Ok(Decision::new(sel, Some(Phase::Exploit)));
        }
        // ESs nobody can reach take no part in the branch choice
        let every_es = (0..num_es)
            .filter(|&m| !state.feasible[m].is_empty())
            .all(|m| !ue.clients[m].is_empty());
        let sel = if every_es {
            solve_max_cardinality(&instance, &ue.clients)
        } else {
            let est = self.estimates(state)?;
            let explored: Vec<BTreeSet<ClientId>> = (0..num_es)
                .map(|m| {
                    state.feasible[m]
                        .difference(&ue.clients[m])
                        .copied()
                        .collect()
                })
                .collect();
            solve_two_stage_exploration(
                &instance,
                &est,
                &ue.clients,
                &explored,
                self.exact_cap,
                self.epsilon,
            )?
        };
        Ok(Decision::new(sel, Some(Phase::Explore)))
    }

    fn ingest(
        &mut self,
        input: &PolicyInput<'_>,
        decision: &Decision,
        outcomes: &Outcomes,
    ) -> Result<()> {
        check_outcomes(&decision.selection, outcomes)?;
        let state = input.state;
        let k = self.schedule.control_function(state.t)?;
        match decision.phase {
            Some(Phase::Explore) => self.counters.explore_rounds += 1,
            _ => self.counters.exploit_rounds += 1,
        }
        for (&(n, m), outcome) in outcomes {
            let cell = self.partition.locate(&state.contexts[&(n, m)])?;
            if decision.phase == Some(Phase::Explore) && self.table.counter(n, m, &cell) as f64 <= k
            {
                let c = self
                    .exploration_selections
                    .entry((n, m, cell.clone()))
                    .or_default();
                *c += 1;
                self.counters.max_exploration_per_key =
                    self.counters.max_exploration_per_key.max(*c);
            }
            self.table.record_observation(n, m, &cell, outcome.x);
        }
        Ok(())
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "cells_per_axis": self.partition.cells_per_axis(),
            "context_dim": self.partition.dim(),
            "z": self.schedule.z,
            "gamma": self.schedule.gamma,
            "estimator_keys": self.table.len(),
            "counters": self.counters,
        })
    }
}
