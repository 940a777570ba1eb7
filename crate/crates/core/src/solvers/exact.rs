//! Exhaustive branch-and-bound search for the per-round selection problem.

use super::{Instance, PairScores, SelectionDecision, UtilityKind};
use crate::error::{Error, Result};
use crate::ids::{ClientId, EsId};

/// Default cap on assignable pairs for exhaustive search.
pub const DEFAULT_EXACT_CAP: usize = 18;

#[derive(Clone, Copy)]
struct Choice {
    es: usize,
    score: f64,
    cost: f64,
}

struct Search<'a> {
    options: &'a [Vec<Choice>],
    /// `suffix_best[k]` bounds the mass obtainable from clients `k..`.
    suffix_best: Vec<f64>,
    spent: Vec<f64>,
    budgets: &'a [f64],
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_mass: f64,
}

impl Search<'_> {
    fn run(&mut self, k: usize, mass: f64) {
        if k == self.options.len() {
            if mass > self.best_mass {
                self.best_mass = mass;
                self.best.clone_from(&self.current);
            }
            return;
        }
        if mass + self.suffix_best[k] <= self.best_mass {
            return;
        }
        for i in 0..self.options[k].len() {
            let opt = self.options[k][i];
            let before = self.spent[opt.es];
            if before + opt.cost <= self.budgets[opt.es] {
                self.spent[opt.es] = before + opt.cost;
                self.current[k] = Some(opt.es);
                self.run(k + 1, mass + opt.score);
                self.current[k] = None;
                self.spent[opt.es] = before;
            }
        }
        self.run(k + 1, mass);
    }
}

/// Maximizes the utility exactly. The linear and non-convex utilities are
/// monotone transforms of the same participation mass, so both share one search.
///
/// Ties resolve towards assigning lower client ids to lower ES ids.
pub fn solve_exact(
    instance: &Instance,
    probs: &PairScores,
    _kind: UtilityKind,
    cap: usize,
) -> Result<SelectionDecision> {
    let pairs = instance.assignable_pairs();
    if pairs > cap {
        return Err(Error::InstanceTooLarge { pairs, cap });
    }
    let n = instance.num_clients();
    let mut options: Vec<Vec<Choice>> = vec![Vec::new(); n];
    for (client, es) in instance.pairs() {
        let score = *probs
            .get(&(client, es))
            .ok_or(Error::MissingScore { client, es })?;
        let cost = instance.cost(client);
        if score > 0.0 && cost <= instance.budget(es) {
            options[client.0].push(Choice {
                es: es.0,
                score,
                cost,
            });
        }
    }
    // Clients without options only widen the search tree.
    let order: Vec<usize> = (0..n).filter(|&c| !options[c].is_empty()).collect();
    let options: Vec<Vec<Choice>> = order.iter().map(|&c| options[c].clone()).collect();
    let mut suffix_best = vec![0.0; options.len() + 1];
    for k in (0..options.len()).rev() {
        let best = options[k].iter().map(|o| o.score).fold(0.0, f64::max);
        suffix_best[k] = suffix_best[k + 1] + best;
    }
    let mut search = Search {
        options: &options,
        suffix_best,
        spent: vec![0.0; instance.num_es()],
        budgets: &instance.budgets,
        current: vec![None; options.len()],
        best: vec![None; options.len()],
        best_mass: 0.0,
    };
    search.run(0, 0.0);

    let mut decision = SelectionDecision::empty(instance.num_es());
    for (k, es) in search.best.iter().enumerate() {
        if let Some(m) = es {
            decision.assign(ClientId(order[k]), EsId(*m));
        }
    }
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::Pair;
    use std::collections::BTreeSet;

    fn set(ids: &[usize]) -> BTreeSet<ClientId> {
        ids.iter().map(|&i| ClientId(i)).collect()
    }

    #[test]
    fn singleton_selected() {
        let inst = Instance::new(1.0, vec![1.0], vec![set(&[0])]);
        let probs: PairScores = [((ClientId(0), EsId(0)), 0.9)].into_iter().collect();
        let d = solve_exact(&inst, &probs, UtilityKind::Linear, DEFAULT_EXACT_CAP).unwrap();
        assert!(d.contains(ClientId(0), EsId(0)));
        let u = UtilityKind::Linear.evaluate(&d, &probs).unwrap();
        assert!((u - 0.9).abs() < 1e-15);
    }

    #[test]
    fn dominant_es_wins() {
        let inst = Instance::new(1.0, vec![1.0], vec![set(&[0]), set(&[0])]);
        let probs: PairScores = [((ClientId(0), EsId(0)), 0.2), ((ClientId(0), EsId(1)), 0.8)]
            .into_iter()
            .collect();
        let d = solve_exact(&inst, &probs, UtilityKind::Linear, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(d.pairs(), vec![(ClientId(0), EsId(1))]);
    }

    #[test]
    fn over_cap_is_rejected() {
        let clients: Vec<usize> = (0..10).collect();
        let inst = Instance::new(5.0, vec![1.0; 10], vec![set(&clients), set(&clients)]);
        let probs: PairScores = inst.pairs().into_iter().map(|p: Pair| (p, 0.5)).collect();
        let err = solve_exact(&inst, &probs, UtilityKind::Linear, DEFAULT_EXACT_CAP).unwrap_err();
        assert!(matches!(
            err,
            Error::InstanceTooLarge { pairs: 20, cap: 18 }
        ));
        assert!(err.to_string().contains("greedy"));
    }

    #[test]
    fn budget_binds() {
        // three clients, budget fits either {0} or {1, 2}
        let inst = Instance::new(4.0, vec![4.0, 2.0, 2.0], vec![set(&[0, 1, 2])]);
        let probs: PairScores = [
            ((ClientId(0), EsId(0)), 0.9),
            ((ClientId(1), EsId(0)), 0.5),
            ((ClientId(2), EsId(0)), 0.5),
        ]
        .into_iter()
        .collect();
        let d = solve_exact(&inst, &probs, UtilityKind::Nonconvex, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(
            d.pairs(),
            vec![(ClientId(1), EsId(0)), (ClientId(2), EsId(0))]
        );
    }

    #[test]
    fn missing_score_is_an_error() {
        let inst = Instance::new(1.0, vec![1.0], vec![set(&[0])]);
        assert!(solve_exact(&inst, &PairScores::new(), UtilityKind::Linear, 18).is_err());
    }
}
