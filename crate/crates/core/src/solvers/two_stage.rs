use std::collections::BTreeSet;

use super::{
    solve_best, solve_max_cardinality, Instance, PairScores, SelectionDecision, UtilityKind,
};
use crate::error::Result;
use crate::ids::{ClientId, EsId};

/// Exploration when only part of the ESs have under-explored clients.
///
/// Stage one packs as many under-explored clients as possible. Stage two
/// spends each ES's leftover budget on explored clients by estimated linear
/// utility, but only on ESs whose leftover covers the cheapest explored
/// client still available to them.
pub fn solve_two_stage_exploration(
    instance: &Instance,
    estimates: &PairScores,
    under_explored: &[BTreeSet<ClientId>],
    explored: &[BTreeSet<ClientId>],
    exact_cap: usize,
    epsilon: f64,
) -> Result<SelectionDecision> {
    let num_es = instance.num_es();
    let mut decision = solve_max_cardinality(instance, under_explored);

    let mut residual = Instance {
        costs: instance.costs.clone(),
        budgets: vec![0.0; num_es],
        feasible: vec![BTreeSet::new(); num_es],
    };
    let mut any = false;
    for m in 0..num_es {
        let es = EsId(m);
        let left = instance.budget(es) - decision.spent(es, instance);
        let candidates: BTreeSet<ClientId> = explored
            .get(m)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&n| instance.is_feasible(n, es) && decision.es_of(n).is_none())
            .collect();
        let cheapest = candidates
            .iter()
            .map(|&n| instance.cost(n))
            .fold(f64::INFINITY, f64::min);
        if left >= cheapest {
            residual.budgets[m] = left.max(0.0);
            residual.feasible[m] = candidates;
            any = true;
        }
    }
    if !any {
        return Ok(decision);
    }
    let fill = solve_best(
        &residual,
        estimates,
        UtilityKind::Linear,
        exact_cap,
        epsilon,
    )?;
    decision.extend_with(&fill);
    Ok(decision)
}
