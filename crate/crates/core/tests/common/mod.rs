//! Helpers shared by the integration test binaries.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cocs_core::solvers::{Instance, PairScores, SelectionDecision};
use cocs_core::{ClientId, EsId};
use rand::Rng;

/// Random instance with `n` clients and `m` ESs: costs in [0.5, 3], budgets in
/// [1, 6], each pair reachable with probability 0.6, scores uniform in [0, 1].
pub fn random_instance(rng: &mut impl Rng, n: usize, m: usize) -> (Instance, PairScores) {
    let costs: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let budgets: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..6.0)).collect();
    let mut feasible = vec![BTreeSet::new(); m];
    let mut probs = PairScores::new();
    for (es, set) in feasible.iter_mut().enumerate() {
        for client in 0..n {
            if rng.random_bool(0.6) {
                set.insert(ClientId(client));
                probs.insert((ClientId(client), EsId(es)), rng.random::<f64>());
            }
        }
    }
    (
        Instance {
            costs,
            budgets,
            feasible,
        },
        probs,
    )
}

/// Participation mass summed client by client in ascending id order.
pub fn mass(decision: &SelectionDecision, probs: &PairScores) -> f64 {
    let mut pairs = decision.pairs();
    pairs.sort();
    pairs.iter().map(|p| probs[p]).sum()
}

/// Brute force over every client's choice of "unassigned" or one reachable
/// ES, keeping the budget-feasible assignment of largest mass.
pub fn enumerate_best(instance: &Instance, probs: &PairScores) -> (f64, SelectionDecision) {
    let n = instance.costs.len();
    let m = instance.feasible.len();
    let options: Vec<Vec<Option<usize>>> = (0..n)
        .map(|c| {
            std::iter::once(None)
                .chain(
                    (0..m)
                        .filter(|&e| instance.feasible[e].contains(&ClientId(c)))
                        .map(Some),
                )
                .collect()
        })
        .collect();
    let mut choice = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, SelectionDecision::empty(m));
    loop {
        let mut spent = vec![0.0; m];
        for (c, &k) in choice.iter().enumerate() {
            if let Some(e) = options[c][k] {
                spent[e] += instance.costs[c];
            }
        }
        if spent
            .iter()
            .zip(&instance.budgets)
            .all(|(s, b)| *s <= b + 1e-9)
        {
            let d = SelectionDecision::from_pairs(
                m,
                choice
                    .iter()
                    .enumerate()
                    .filter_map(|(c, &k)| options[c][k].map(|e| (ClientId(c), EsId(e)))),
            );
            let v = mass(&d, probs);
            if v > best.0 {
                best = (v, d);
            }
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
