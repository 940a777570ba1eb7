//! Combinatorial solvers for the per-round client selection problem.
//!
//! All solvers are pure functions of their inputs and resolve ties towards the
//! lowest client id, then the lowest ES id.

mod cardinality;
mod decision;
mod exact;
mod flgreedy;
mod two_stage;
mod utility;

pub use cardinality::solve_max_cardinality;
pub use decision::{Instance, PairScores, SelectionDecision, Violation, BUDGET_TOLERANCE};
pub use exact::{solve_exact, DEFAULT_EXACT_CAP};
pub use flgreedy::{flgreedy, flgreedy_traced, GreedyTrace, TraceStep};
pub use two_stage::solve_two_stage_exploration;
pub use utility::{participation_mass, utility_linear, utility_nonconvex, UtilityKind};

use crate::error::Result;

/// Default FLGreedy error parameter.
pub const DEFAULT_EPSILON: f64 = 0.3;

/// Exact search when the instance is within `exact_cap`, FLGreedy otherwise.
pub fn solve_best(
    instance: &Instance,
    scores: &PairScores,
    kind: UtilityKind,
    exact_cap: usize,
    epsilon: f64,
) -> Result<SelectionDecision> {
    if instance.assignable_pairs() <= exact_cap {
        solve_exact(instance, scores, kind, exact_cap)
    } else {
        flgreedy(instance, scores, kind, epsilon)
    }
}

/// Approximation ratio guaranteed by FLGreedy with `num_es` knapsacks.
pub fn flgreedy_ratio(epsilon: f64, num_es: usize) -> f64 {
    1.0 / ((1.0 + epsilon) * (2.0 + 2.0 * num_es as f64))
}
