use super::{check_outcomes, Decision, Policy, PolicyInput, PolicyKind};
use crate::env::Outcomes;
use crate::error::Result;
use crate::solvers::{flgreedy, solve_best, UtilityKind};

/// Knows the true participation probabilities of every pair.
///
/// The linear utility is solved exactly when the instance fits under the
/// cap; the non-convex utility always goes through FLGreedy, mirroring the
/// greedy reference used for that objective.
#[derive(Debug, Clone)]
pub struct Oracle {
    utility: UtilityKind,
    exact_cap: usize,
    epsilon: f64,
}

impl Oracle {
    pub fn new(utility: UtilityKind, exact_cap: usize, epsilon: f64) -> Self {
        Self {
            utility,
            exact_cap,
            epsilon,
        }
    }
}

impl Policy for Oracle {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Oracle
    }

    fn decide(&self, input: &PolicyInput<'_>) -> Result<Decision> {
        let instance = input.state.instance(input.budget_per_es);
        let sel = match self.utility {
            UtilityKind::Linear => solve_best(
                &instance,
                input.truth,
                self.utility,
                self.exact_cap,
                self.epsilon,
            )?,
            UtilityKind::Nonconvex => flgreedy(&instance, input.truth, self.utility, self.epsilon)?,
        };
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
