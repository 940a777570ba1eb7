use std::collections::BTreeMap;

use super::{check_outcomes, Decision, Policy, PolicyInput, PolicyKind};
use crate::context::ContextVector;
use crate::env::Outcomes;
use crate::error::Result;
use crate::ids::Pair;
use crate::solvers::{solve_best, PairScores, UtilityKind};

/// Ridge-regression statistics of one pair: `A^{-1}` (kept up to date with
/// Sherman-Morrison) and `b = sum x * features`.
#[derive(Debug, Clone)]
struct Ridge {
    a_inv: Vec<f64>,
    b: Vec<f64>,
}

impl Ridge {
    fn new(dim: usize, lambda: f64) -> Self {
        let mut a_inv = vec![0.0; dim * dim];
        for i in 0..dim {
            a_inv[i * dim + i] = 1.0 / lambda;
        }
        Self {
            a_inv,
            b: vec![0.0; dim],
        }
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    fn a_inv_times(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.a_inv[i * d + j] * v[j]).sum())
            .collect()
    }

    fn theta(&self) -> Vec<f64> {
        self.a_inv_times(&self.b)
    }

    fn score(&self, x: &[f64], width: f64) -> f64 {
        let mean: f64 = self.theta().iter().zip(x).map(|(t, v)| t * v).sum();
        let spread: f64 = self.a_inv_times(x).iter().zip(x).map(|(a, v)| a * v).sum();
        mean + width * spread.max(0.0).sqrt()
    }

    fn update(&mut self, x: &[f64], reward: f64) {
        let d = self.dim();
        let ax = self.a_inv_times(x);
        let denom = 1.0 + ax.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        for i in 0..d {
            for j in 0..d {
                self.a_inv[i * d + j] -= ax[i] * ax[j] / denom;
            }
        }
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += reward * xi;
        }
    }
}

fn features(phi: &ContextVector) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(phi.coords().iter().copied())
        .collect()
}

/// Per-pair linear UCB over the context, with features `[1, phi]`.
///
/// The UCB scores, clamped at zero, go through the same constrained solver
/// COCS uses when it exploits.
#[derive(Debug, Clone)]
pub struct LinUcb {
    context_dim: usize,
    lambda: f64,
    width: f64,
    utility: UtilityKind,
    exact_cap: usize,
    epsilon: f64,
    models: BTreeMap<Pair, Ridge>,
}

impl LinUcb {
    pub fn new(
        context_dim: usize,
        lambda: f64,
        width: f64,
        utility: UtilityKind,
        exact_cap: usize,
        epsilon: f64,
    ) -> Self {
        Self {
            context_dim,
            lambda,
            width,
            utility,
            exact_cap,
            epsilon,
            models: BTreeMap::new(),
        }
    }

    /// UCB score of every feasible pair.
    pub fn scores(&self, input: &PolicyInput<'_>) -> PairScores {
        let fresh = Ridge::new(self.context_dim + 1, self.lambda);
        input
            .state
            .feasible_pairs()
            .map(|(n, m, phi)| {
                let model = self.models.get(&(n, m)).unwrap_or(&fresh);
                ((n, m), model.score(&features(phi), self.width).max(0.0))
            })
            .collect()
    }

    /// Ridge estimate `A^{-1} b` of one pair, if it has been observed.
    pub fn coefficients(&self, pair: Pair) -> Option<Vec<f64>> {
        self.models.get(&pair).map(Ridge::theta)
    }
}

impl Policy for LinUcb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Linucb
    }

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision> {
        let instance = input.state.instance(input.budget_per_es);
        let scores = self.scores(input);
        let sel = solve_best(
            &instance,
            &scores,
            self.utility,
            self.exact_cap,
            self.epsilon,
        )?;
        Ok(Decision::new(sel, None))
    }

    fn ingest(
        &mut self,
        input: &PolicyInput<'_>,
        decision: &Decision,
        outcomes: &Outcomes,
    ) -> Result<()> {
        check_outcomes(&decision.selection, outcomes)?;
        for (pair, outcome) in outcomes {
            let x = features(&input.state.contexts[pair]);
            let (dim, lambda) = (self.context_dim + 1, self.lambda);
            self.models
                .entry(*pair)
                .or_insert_with(|| Ridge::new(dim, lambda))
                .update(&x, if outcome.x { 1.0 } else { 0.0 });
        }
        Ok(())
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "lambda": self.lambda, "width": self.width })
    }
}
