use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_outcomes, Decision, Policy, PolicyInput, PolicyKind};
use crate::env::{stream_rng, Outcomes};
use crate::error::Result;
use crate::ids::{ClientId, EsId};
use crate::solvers::SelectionDecision;

/// Assigns every reachable client to a uniformly drawn reachable ES, then
/// admits each ES's candidates cheapest first while its budget lasts.
///
/// The per-round draws come from a stream keyed on `(seed, t)`, so deciding
/// twice on the same round gives the same answer.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    seed: u64,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Policy for RandomPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Random
    }

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision> {
        let state = input.state;
        let num_es = state.num_es();
        let mut rng = stream_rng(self.seed ^ 0x5241_4e44_4f4d, state.t);
        let mut order: Vec<usize> = (0..state.num_clients()).collect();
        order.shuffle(&mut rng);

        let mut proposals: Vec<Vec<ClientId>> = vec![Vec::new(); num_es];
        for n in order {
            let reachable: Vec<usize> = (0..num_es)
                .filter(|&m| state.is_feasible(ClientId(n), EsId(m)))
                .collect();
            if !reachable.is_empty() {
                let m = reachable[rng.random_range(0..reachable.len())];
                proposals[m].push(ClientId(n));
            }
        }

        let mut sel = SelectionDecision::empty(num_es);
        for (m, mut clients) in proposals.into_iter().enumerate() {
            clients.sort_by(|a, b| state.costs[a.0].total_cmp(&state.costs[b.0]).then(a.cmp(b)));
            let mut spent = 0.0;
            for n in clients {
                let c = state.costs[n.0];
                if spent + c <= input.budget_per_es {
                    spent += c;
                    sel.assign(n, EsId(m));
                }
            }
        }
        Ok(Decision::new(sel, None))
    }

    fn ingest(
        &mut self,
        _: &PolicyInput<'_>,
        decision: &Decision,
        outcomes: &Outcomes,
    ) -> Result<()> {
        check_outcomes(&decision.selection, outcomes)
    }
}
