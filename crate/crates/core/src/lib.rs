//! Context-aware online client selection for hierarchical federated learning.
//!
//! The crate simulates a network of clients and edge servers (ESs), runs
//! client-selection bandit policies against it and measures their utility and
//! regret against an oracle that knows the true participation probabilities.
//!
//! - [`context`]: context-space partition, per-cell estimators, exploration schedule
//! - [`env`]: round-by-round network simulation (physical channel or synthetic model)
//! - [`solvers`]: exact, cardinality, two-stage and lazy-greedy selection solvers
//! - [`policies`]: COCS and the Oracle, CUCB, LinUCB and Random benchmarks
//! - [`harness`]: experiment grids, regret curves, exponent fits, CSV/JSON output

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod context;
pub mod env;
pub mod error;
pub mod harness;
pub mod ids;
pub mod par;
pub mod policies;
pub mod solvers;

pub use error::{Error, Result};
pub use ids::{ClientId, EsId, Pair};
