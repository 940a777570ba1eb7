//! Lazy decreasing-threshold greedy for monotone submodular utilities under a
//! partition matroid (one ES per client) and one knapsack per ES.
//!
//! Candidates sit in a max-heap keyed by their last computed gain-per-cost
//! density. Submodularity makes every stored density an upper bound on the
//! current one, so only the heap top ever needs refreshing. The acceptance
//! threshold starts at the largest singleton density and shrinks by a factor
//! `1 + epsilon` whenever no stored density reaches it. The result is compared
//! against the best feasible singleton, which covers the case where one
//! expensive pair beats every dense combination.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{Instance, PairScores, SelectionDecision, UtilityKind};
use crate::error::{Error, Result};
use crate::ids::{ClientId, EsId};

/// One accepted candidate, in acceptance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub client: ClientId,
    pub es: EsId,
    pub gain: f64,
    pub density: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub steps: Vec<TraceStep>,
    /// True when the best singleton replaced the greedy set.
    pub singleton_fallback: bool,
}

#[derive(Clone, Copy)]
struct Candidate {
    density: f64,
    client: ClientId,
    es: EsId,
    score: f64,
    cost: f64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: larger density first, then lower client id, then lower ES id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.density
            .total_cmp(&other.density)
            .then_with(|| other.client.cmp(&self.client))
            .then_with(|| other.es.cmp(&self.es))
    }
}

/// Runs the greedy and returns only the decision.
pub fn flgreedy(
    instance: &Instance,
    probs: &PairScores,
    kind: UtilityKind,
    epsilon: f64,
) -> Result<SelectionDecision> {
    flgreedy_traced(instance, probs, kind, epsilon).map(|(d, _)| d)
}

pub fn flgreedy_traced(
    instance: &Instance,
    probs: &PairScores,
    kind: UtilityKind,
    epsilon: f64,
) -> Result<(SelectionDecision, GreedyTrace)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon} must be > 0"
        )));
    }
    let num_es = instance.num_es();
    let value = |mass: f64| kind.from_mass(mass, num_es);

    let mut candidates = Vec::new();
    for (client, es) in instance.pairs() {
        let score = *probs
            .get(&(client, es))
            .ok_or(Error::MissingScore { client, es })?;
        let cost = instance.cost(client);
        if score > 0.0 && cost <= instance.budget(es) {
            let gain = value(score);
            candidates.push(Candidate {
                density: gain / cost,
                client,
                es,
                score,
                cost,
            });
        }
    }
    let mut trace = GreedyTrace::default();
    let mut decision = SelectionDecision::empty(num_es);
    if candidates.is_empty() {
        return Ok((decision, trace));
    }

    // Best singleton, ties to the lowest (client, es).
    let best_single = candidates
        .iter()
        .copied()
        .max_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then_with(|| b.client.cmp(&a.client))
                .then_with(|| b.es.cmp(&a.es))
        })
        .expect("non-empty");

    let mut heap: BinaryHeap<Candidate> = candidates.into_iter().collect();
    let mut threshold = heap.peek().map_or(0.0, |c| c.density);
    let mut spent = vec![0.0; num_es];
    let mut taken = vec![false; instance.num_clients()];
    let mut mass = 0.0;

    while let Some(top) = heap.peek().copied() {
        if top.density < threshold {
            threshold /= 1.0 + epsilon;
            continue;
        }
        heap.pop();
        let m = top.es.0;
        if taken[top.client.0] || spent[m] + top.cost > instance.budgets[m] {
            // budgets only shrink and matroid slots only fill: drop for good
            continue;
        }
        let gain = value(mass + top.score) - value(mass);
        if gain <= 0.0 {
            continue;
        }
        let density = gain / top.cost;
        if density >= threshold {
            mass += top.score;
            spent[m] += top.cost;
            taken[top.client.0] = true;
            decision.assign(top.client, top.es);
            trace.steps.push(TraceStep {
                client: top.client,
                es: top.es,
                gain,
                density,
                threshold,
            });
        } else {
            heap.push(Candidate { density, ..top });
        }
    }

    if value(best_single.score) > value(mass) {
        decision = SelectionDecision::from_pairs(num_es, [(best_single.client, best_single.es)]);
        trace.singleton_fallback = true;
    }
    Ok((decision, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(ids: impl IntoIterator<Item = usize>) -> BTreeSet<ClientId> {
        ids.into_iter().map(ClientId).collect()
    }

    #[test]
    fn single_candidate_selected() {
        let inst = Instance::new(1.0, vec![1.0], vec![set([0])]);
        let probs: PairScores = [((ClientId(0), EsId(0)), 0.4)].into_iter().collect();
        let d = flgreedy(&inst, &probs, UtilityKind::Nonconvex, 0.3).unwrap();
        assert_eq!(d.pairs(), vec![(ClientId(0), EsId(0))]);
    }

    #[test]
    fn zero_probabilities_select_nothing() {
        let inst = Instance::new(5.0, vec![1.0; 4], vec![set(0..4), set(0..4)]);
        let probs: PairScores = inst.pairs().into_iter().map(|p| (p, 0.0)).collect();
        assert!(flgreedy(&inst, &probs, UtilityKind::Nonconvex, 0.3)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn singleton_fallback_beats_dense_cheap_pair() {
        // cheap low-value pair blocks the expensive valuable one under a tight budget
        let inst = Instance::new(10.0, vec![1.0, 10.0], vec![set([0, 1])]);
        let probs: PairScores = [((ClientId(0), EsId(0)), 0.2), ((ClientId(1), EsId(0)), 0.9)]
            .into_iter()
            .collect();
        let (d, trace) = flgreedy_traced(&inst, &probs, UtilityKind::Linear, 0.3).unwrap();
        assert!(trace.singleton_fallback);
        assert_eq!(d.pairs(), vec![(ClientId(1), EsId(0))]);
    }

    #[test]
    fn trace_records_accepted_steps() {
        let inst = Instance::new(3.0, vec![1.0, 1.0, 1.0], vec![set(0..3)]);
        let probs: PairScores = [
            ((ClientId(0), EsId(0)), 0.5),
            ((ClientId(1), EsId(0)), 0.9),
            ((ClientId(2), EsId(0)), 0.7),
        ]
        .into_iter()
        .collect();
        let (d, trace) = flgreedy_traced(&inst, &probs, UtilityKind::Nonconvex, 0.3).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(trace.steps[0].client, ClientId(1));
        assert!(trace.steps.windows(2).all(|w| w[0].gain >= w[1].gain));
        assert!(serde_json::to_string(&trace).unwrap().contains("threshold"));
    }

    #[test]
    fn rejects_non_positive_epsilon() {
        let inst = Instance::new(1.0, vec![1.0], vec![set([0])]);
        assert!(flgreedy(&inst, &PairScores::new(), UtilityKind::Linear, 0.0).is_err());
    }
}
