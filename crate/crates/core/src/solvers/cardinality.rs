use std::collections::BTreeSet;

use super::{Instance, SelectionDecision};
use crate::ids::{ClientId, EsId};

/// Greedy maximum-cardinality selection over `eligible` clients.
///
/// Clients are taken cheapest first (ties by id); each goes to the eligible
/// ES with the most remaining budget that can still afford it (ties by ES id).
/// Pairs outside the instance's feasible sets are ignored.
pub fn solve_max_cardinality(
    instance: &Instance,
    eligible: &[BTreeSet<ClientId>],
) -> SelectionDecision {
    let num_es = instance.num_es();
    let mut clients: Vec<ClientId> = eligible
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    clients.sort_by(|a, b| {
        instance
            .cost(*a)
            .total_cmp(&instance.cost(*b))
            .then(a.cmp(b))
    });

    let mut spent = vec![0.0; num_es];
    let mut decision = SelectionDecision::empty(num_es);
    for client in clients {
        let cost = instance.cost(client);
        let mut chosen: Option<(usize, f64)> = None;
        for m in 0..num_es.min(eligible.len()) {
            if !eligible[m].contains(&client) || !instance.is_feasible(client, EsId(m)) {
                continue;
            }
            if spent[m] + cost > instance.budgets[m] {
                continue;
            }
            let remaining = instance.budgets[m] - spent[m];
            if chosen.is_none_or(|(_, r)| remaining > r) {
                chosen = Some((m, remaining));
            }
        }
        if let Some((m, _)) = chosen {
            spent[m] += cost;
            decision.assign(client, EsId(m));
        }
    }
    decision
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: impl IntoIterator<Item = usize>) -> BTreeSet<ClientId> {
        ids.into_iter().map(ClientId).collect()
    }

    #[test]
    fn unit_costs_fill_budget() {
        let inst = Instance::new(3.0, vec![1.0; 5], vec![set(0..5)]);
        let d = solve_max_cardinality(&inst, &[set(0..5)]);
        assert_eq!(d.len(), 3);
        assert!(d.is_valid(&inst));
    }

    #[test]
    fn cheapest_first() {
        let inst = Instance::new(2.0, vec![1.0, 1.0, 5.0], vec![set(0..3)]);
        let d = solve_max_cardinality(&inst, &[set(0..3)]);
        assert_eq!(
            d.pairs(),
            vec![(ClientId(0), EsId(0)), (ClientId(1), EsId(0))]
        );
    }

    #[test]
    fn prefers_es_with_more_room() {
        let mut inst = Instance::new(3.0, vec![1.0, 1.0], vec![set(0..2), set(0..2)]);
        inst.budgets = vec![1.0, 3.0];
        let d = solve_max_cardinality(&inst, &[set(0..2), set(0..2)]);
        // client 0 goes to ES 1 (3 > 1); client 1 then compares 2 vs 1
        assert_eq!(d.es_of(ClientId(0)), Some(EsId(1)));
        assert_eq!(d.es_of(ClientId(1)), Some(EsId(1)));
    }

    #[test]
    fn ineligible_clients_ignored() {
        let inst = Instance::new(10.0, vec![1.0; 4], vec![set(0..4)]);
        let d = solve_max_cardinality(&inst, &[set([1, 3])]);
        assert_eq!(d.len(), 2);
        assert!(d.es_of(ClientId(0)).is_none());
    }
}
