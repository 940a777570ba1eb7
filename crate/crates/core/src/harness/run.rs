use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::env::{z_shortfalls, Environment, Outcomes, RoundState};
use crate::error::Result;
use crate::ids::Pair;
use crate::par::Execution;
use crate::policies::{
    Cocs, Cucb, Decision, LinUcb, Oracle, Policy, PolicyInput, PolicyKind, RandomPolicy,
};
use crate::solvers::{solve_best, PairScores, SelectionDecision, UtilityKind};

/// One round of one (policy, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub t: u64,
    pub phase: String,
    pub selected: Vec<Pair>,
    /// Selected pairs whose update arrived in time.
    pub participated: Vec<Pair>,
    /// Expected utility of the decision under the true probabilities.
    pub utility: f64,
    /// Utility of the observed indicators.
    pub realized_utility: f64,
    /// Expected utility of the reference decision on the same round.
    pub oracle_utility: f64,
    pub oracle_realized_utility: f64,
    pub cum_regret: f64,
    pub ms: f64,
    /// ESs that got fewer on-time updates than the configured minimum.
    pub z_shortfall: usize,
}

impl RoundLog {
    pub fn selected_summary(&self) -> String {
        self.selected
            .iter()
            .map(|(n, m)| format!("{}:{}", n.0, m.0))
            .collect::<Vec<_>>()
            .join("|")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: PolicyKind,
    pub seed: u64,
    pub logs: Vec<RoundLog>,
    pub metadata: serde_json::Value,
    /// Hash of every network state this run saw, in order.
    pub stream_fingerprint: u64,
}

impl RunResult {
    pub fn utilities(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.utility).collect()
    }

    pub fn oracle_utilities(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.oracle_utility).collect()
    }

    pub fn regret(&self) -> Vec<f64> {
        self.logs.iter().map(|l| l.cum_regret).collect()
    }

    pub fn cumulative_utility(&self) -> f64 {
        self.logs.iter().map(|l| l.utility).sum()
    }

    pub fn cumulative_realized_utility(&self) -> f64 {
        self.logs.iter().map(|l| l.realized_utility).sum()
    }
}

/// Everything a run needs from one seed, shared by all policies of that seed.
struct SeedStream {
    seed: u64,
    env: Environment,
    states: Vec<RoundState>,
    truths: Vec<PairScores>,
    reference: Vec<(f64, f64)>,
}

fn realized(decision: &SelectionDecision, outcomes: &Outcomes, kind: UtilityKind) -> f64 {
    let mass = decision
        .pairs()
        .iter()
        .filter(|p| outcomes.get(p).is_some_and(|o| o.x))
        .count() as f64;
    kind.from_mass(mass, decision.num_es())
}

fn prepare_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedStream> {
    let env = Environment::new(config.network.clone(), seed)?;
    let kind = config.run.utility;
    let budget = config.network.budget_per_es;
    let mut states = Vec::with_capacity(config.run.horizon as usize);
    let mut truths = Vec::with_capacity(states.capacity());
    let mut reference = Vec::with_capacity(states.capacity());
    for t in 1..=config.run.horizon {
        let state = env.round(t);
        let truth = env.truth_table(&state);
        let best = solve_best(
            &state.instance(budget),
            &truth,
            kind,
            config.solver.exact_cap,
            config.solver.epsilon,
        )?;
        let outcomes = env.simulate_participation(&state, &best)?;
        reference.push((
            kind.evaluate(&best, &truth)?,
            realized(&best, &outcomes, kind),
        ));
        states.push(state);
        truths.push(truth);
    }
    Ok(SeedStream {
        seed,
        env,
        states,
        truths,
        reference,
    })
}

/// Builds a fresh policy for one seed.
pub fn build_policy(
    kind: PolicyKind,
    config: &ExperimentConfig,
    first_round: &RoundState,
    seed: u64,
) -> Result<Box<dyn Policy>> {
    let utility = config.run.utility;
    let cap = config.solver.exact_cap;
    let eps = config.solver.epsilon;
    Ok(match kind {
        PolicyKind::Oracle => Box::new(Oracle::new(utility, cap, eps)),
        PolicyKind::Cocs => Box::new(Cocs::new(
            config
                .cocs
                .partition(config.run.horizon, config.network.context_dim)?,
            config.cocs.schedule()?,
            utility,
            cap,
            eps,
        )),
        PolicyKind::Cucb => Box::new(Cucb::new(
            first_round,
            config.network.budget_per_es,
            utility,
            cap,
            config.cucb.arm_cap,
            eps,
        )),
        PolicyKind::Linucb => Box::new(LinUcb::new(
            config.network.context_dim,
            config.linucb.lambda,
            config.linucb.width,
            utility,
            cap,
            eps,
        )),
        PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
    })
}

/// Runs one policy over a prepared seed, with the caller's policy instance.
fn run_policy(
    config: &ExperimentConfig,
    stream: &SeedStream,
    policy: &mut dyn Policy,
) -> Result<(Vec<RoundLog>, u64)> {
    let kind = config.run.utility;
    let budget = config.network.budget_per_es;
    let mut logs = Vec::with_capacity(stream.states.len());
    let mut cum = 0.0;
    let mut fp = std::hash::DefaultHasher::new();
    for ((state, truth), &(ref_u, ref_real)) in stream
        .states
        .iter()
        .zip(&stream.truths)
        .zip(&stream.reference)
    {
        std::hash::Hash::hash(&state.fingerprint(), &mut fp);
        let started = config.run.record_timing.then(Instant::now);
        let input = PolicyInput {
            state,
            budget_per_es: budget,
            truth,
        };
        let decision: Decision = policy.decide(&input)?;
        let outcomes = stream
            .env
            .simulate_participation(state, &decision.selection)?;
        policy.ingest(&input, &decision, &outcomes)?;
        let ms = started.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3);

        let utility = kind.evaluate(&decision.selection, truth)?;
        cum += ref_u - utility;
        logs.push(RoundLog {
            t: state.t,
            phase: decision.phase_tag().to_string(),
            selected: decision.selection.pairs(),
            participated: outcomes
                .iter()
                .filter(|(_, o)| o.x)
                .map(|(p, _)| *p)
                .collect(),
            utility,
            realized_utility: realized(&decision.selection, &outcomes, kind),
            oracle_utility: ref_u,
            oracle_realized_utility: ref_real,
            cum_regret: cum,
            ms,
            z_shortfall: z_shortfalls(&outcomes, state.num_es(), config.network.min_updates_z),
        });
    }
    Ok((logs, std::hash::Hasher::finish(&fp)))
}

/// Runs every (policy, seed) cell of the experiment.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentResult> {
    config.validate()?;
    let streams: Vec<Arc<SeedStream>> = exec
        .map(config.run.seeds.clone(), |seed| prepare_seed(config, seed))
        .into_iter()
        .map(|s| s.map(Arc::new))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for stream in &streams {
        for &kind in &config.run.policies {
            cells.push((Arc::clone(stream), kind));
        }
    }
    let runs = exec
        .map(cells, |(stream, kind)| -> Result<RunResult> {
            let mut policy = build_policy(kind, config, &stream.states[0], stream.seed)?;
            let (logs, fingerprint) = run_policy(config, &stream, policy.as_mut())?;
            let metadata = policy.metadata();
            Ok(RunResult {
                policy: kind,
                seed: stream.seed,
                logs,
                metadata,
                stream_fingerprint: fingerprint,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let truth_standard_error = streams
        .first()
        .map_or(0.0, |s| s.env.truth_standard_error());
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
        truth_standard_error,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Ordered by seed, then by the configured policy order.
    pub runs: Vec<RunResult>,
    /// Worst-case standard error of each ground-truth probability.
    pub truth_standard_error: f64,
}

impl ExperimentResult {
    pub fn runs_of(&self, kind: PolicyKind) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(move |r| r.policy == kind)
    }

    /// Seed-mean cumulative expected utility of one policy.
    pub fn mean_cumulative_utility(&self, kind: PolicyKind) -> Option<f64> {
        let v: Vec<f64> = self
            .runs_of(kind)
            .map(RunResult::cumulative_utility)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}
