use std::collections::BTreeMap;

use super::{check_outcomes, Decision, Policy, PolicyInput, PolicyKind};
use crate::env::{Outcomes, RoundState};
use crate::error::Result;
use crate::ids::{ClientId, EsId, Pair};
use crate::solvers::{solve_best, Instance, PairScores, SelectionDecision, UtilityKind};

/// Index given to arms that were never pulled, so untried arms go first.
const UNTRIED_INDEX: f64 = 1e3;

#[derive(Debug, Clone, Copy, Default)]
struct ArmStats {
    pulls: u64,
    mean: f64,
}

impl ArmStats {
    fn observe(&mut self, reward: f64) {
        self.pulls += 1;
        self.mean += (reward - self.mean) / self.pulls as f64;
    }

    fn index(&self, t: u64) -> f64 {
        if self.pulls == 0 {
            return UNTRIED_INDEX;
        }
        self.mean + (2.0 * (t.max(1) as f64).ln() / self.pulls as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
enum Arms {
    /// Every maximal feasible decision of the frozen first round.
    Decisions {
        arms: Vec<Vec<Pair>>,
        stats: Vec<ArmStats>,
    },
    /// One arm per pair, combined by the constrained solver.
    Pairs { stats: BTreeMap<Pair, ArmStats> },
}

/// Combinatorial UCB without contexts.
///
/// When the first round's instance is small enough, each maximal feasible
/// decision of that round is an arm. Later rounds replay the chosen arm on
/// the current network, dropping pairs that became unreachable or no longer
/// fit the budget. Larger instances fall back to per-pair arms whose UCB
/// indices feed the constrained solver; the run metadata records which
/// variant ran.
#[derive(Debug, Clone)]
pub struct Cucb {
    arms: Arms,
    utility: UtilityKind,
    exact_cap: usize,
    epsilon: f64,
    num_es: usize,
}

impl Cucb {
    pub fn new(
        first_round: &RoundState,
        budget_per_es: f64,
        utility: UtilityKind,
        exact_cap: usize,
        arm_cap: usize,
        epsilon: f64,
    ) -> Self {
        let instance = first_round.instance(budget_per_es);
        let arms = if instance.assignable_pairs() <= exact_cap {
            enumerate_maximal(&instance, arm_cap)
        } else {
            None
        };
        let arms = match arms {
            Some(arms) => Arms::Decisions {
                stats: vec![ArmStats::default(); arms.len()],
                arms,
            },
            None => Arms::Pairs {
                stats: BTreeMap::new(),
            },
        };
        Self {
            arms,
            utility,
            exact_cap,
            epsilon,
            num_es: first_round.num_es(),
        }
    }

    /// True when the per-pair fallback is in use.
    pub fn per_pair(&self) -> bool {
        matches!(self.arms, Arms::Pairs { .. })
    }

    pub fn arm_count(&self) -> usize {
        match &self.arms {
            Arms::Decisions { arms, .. } => arms.len(),
            Arms::Pairs { .. } => 0,
        }
    }

    /// Arm a round would pull, `None` under the per-pair fallback.
    pub fn arm_for(&self, t: u64) -> Option<usize> {
        let Arms::Decisions { stats, .. } = &self.arms else {
            return None;
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in stats.iter().enumerate() {
            let idx = s.index(t);
            if best.is_none_or(|(_, b)| idx > b) {
                best = Some((i, idx));
            }
        }
        best.map(|(i, _)| i)
    }

    fn project(&self, arm: &[Pair], input: &PolicyInput<'_>) -> SelectionDecision {
        let state = input.state;
        let mut spent = vec![0.0; self.num_es];
        let mut sel = SelectionDecision::empty(self.num_es);
        for &(n, m) in arm {
            let c = state.costs[n.0];
            if state.is_feasible(n, m) && spent[m.0] + c <= input.budget_per_es {
                spent[m.0] += c;
                sel.assign(n, m);
            }
        }
        sel
    }
}

/// Maximal feasible decisions in lexicographic order, or `None` past `cap`.
fn enumerate_maximal(instance: &Instance, cap: usize) -> Option<Vec<Vec<Pair>>> {
    struct Walk<'a> {
        instance: &'a Instance,
        options: Vec<(ClientId, Vec<EsId>)>,
        spent: Vec<f64>,
        current: Vec<Pair>,
        out: Vec<Vec<Pair>>,
        cap: usize,
    }

    impl Walk<'_> {
        fn maximal(&self) -> bool {
            let taken: Vec<ClientId> = self.current.iter().map(|p| p.0).collect();
            !self.options.iter().any(|(n, ess)| {
                !taken.contains(n)
                    && ess.iter().any(|m| {
                        self.spent[m.0] + self.instance.cost(*n) <= self.instance.budget(*m)
                    })
            })
        }

        fn run(&mut self, k: usize) -> bool {
            if k == self.options.len() {
                if self.maximal() {
                    if self.out.len() == self.cap {
                        return false;
                    }
                    self.out.push(self.current.clone());
                }
                return true;
            }
            let (n, ess) = self.options[k].clone();
            let cost = self.instance.cost(n);
            for m in ess {
                let before = self.spent[m.0];
                if before + cost <= self.instance.budget(m) {
                    self.spent[m.0] = before + cost;
                    self.current.push((n, m));
                    let ok = self.run(k + 1);
                    self.current.pop();
                    self.spent[m.0] = before;
                    if !ok {
                        return false;
                    }
                }
            }
            self.run(k + 1)
        }
    }

    let mut options: Vec<(ClientId, Vec<EsId>)> = Vec::new();
    for n in 0..instance.num_clients() {
        let ess: Vec<EsId> = (0..instance.num_es())
            .map(EsId)
            .filter(|&m| {
                instance.is_feasible(ClientId(n), m)
                    && instance.cost(ClientId(n)) <= instance.budget(m)
            })
            .collect();
        if !ess.is_empty() {
            options.push((ClientId(n), ess));
        }
    }
    let mut walk = Walk {
        instance,
        spent: vec![0.0; instance.num_es()],
        options,
        current: Vec::new(),
        out: Vec::new(),
        cap,
    };
    walk.run(0).then_some(walk.out)
}

impl Policy for Cucb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Cucb
    }

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision> {
        let t = input.state.t;
        let sel = match &self.arms {
            Arms::Decisions { arms, .. } => match self.arm_for(t) {
                Some(i) => self.project(&arms[i], input),
                None => SelectionDecision::empty(self.num_es),
            },
            Arms::Pairs { stats } => {
                let scores: PairScores = input
                    .state
                    .feasible_pairs()
                    .map(|(n, m, _)| {
                        (
                            (n, m),
                            stats.get(&(n, m)).copied().unwrap_or_default().index(t),
                        )
                    })
                    .collect();
                let instance = input.state.instance(input.budget_per_es);
                solve_best(
                    &instance,
                    &scores,
                    self.utility,
                    self.exact_cap,
                    self.epsilon,
                )?
            }
        };
        Ok(Decision::new(sel, None))
    }

    fn ingest(
        &mut self,
        input: &PolicyInput<'_>,
        decision: &Decision,
        outcomes: &Outcomes,
    ) -> Result<()> {
        check_outcomes(&decision.selection, outcomes)?;
        let t = input.state.t;
        let pulled = self.arm_for(t);
        let num_es = self.num_es;
        let utility = self.utility;
        match &mut self.arms {
            Arms::Decisions { stats, .. } => {
                if let Some(i) = pulled {
                    let mass = outcomes.values().filter(|o| o.x).count() as f64;
                    stats[i].observe(utility.from_mass(mass, num_es));
                }
            }
            Arms::Pairs { stats } => {
                for (pair, o) in outcomes {
                    stats
                        .entry(*pair)
                        .or_default()
                        .observe(if o.x { 1.0 } else { 0.0 });
                }
            }
        }
        Ok(())
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": if self.per_pair() { "per-pair fallback" } else { "whole-decision arms" },
            "arms": self.arm_count(),
        })
    }
}
