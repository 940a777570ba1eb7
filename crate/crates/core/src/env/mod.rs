//! Round-by-round simulation of the client / edge-server network.
//!
//! Every round redraws client-ES distances, per-client bandwidth and compute,
//! and per-pair fading. Feasibility comes from distance alone. Contexts are
//! revealed for feasible pairs, and costs follow `price_n * y_n`. Outcomes of
//! selected pairs come from either the deadline rule on simulated times
//! (physical mode) or a Bernoulli draw from a Hölder map (synthetic mode).
//!
//! Randomness is split into independent ChaCha streams: stream 0 holds the
//! static per-client and per-pair parameters, stream `t` holds round `t`, and
//! ground-truth Monte-Carlo estimates use one stream per (round, pair). A
//! round is therefore a pure function of `(config, seed, t)`, which is what
//! lets every policy face exactly the same network.

mod channel;
mod config;
mod truth;

pub use channel::{
    db_to_linear, dbm_to_watts, pathloss_gain_db, shannon_rate, training_time, TrainingTime,
};
pub use config::{EnvMode, NetworkConfig, TruthFamily};
pub use truth::SyntheticTruth;

use std::collections::{BTreeMap, BTreeSet};
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::context::ContextVector;
use crate::error::{Error, Result};
use crate::ids::{ClientId, EsId, Pair};
use crate::solvers::{Instance, PairScores, SelectionDecision};

const MC_STREAM_TAG: u64 = 1 << 63;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unit-mean exponential draw, the power gain of a Rayleigh-faded channel.
pub(crate) fn unit_exponential(rng: &mut impl Rng) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite
    -(1.0 - rng.random::<f64>()).ln()
}

/// Per-pair randomness of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairDraw {
    distance_km: f64,
    dt_fading: f64,
    ut_fading: f64,
    uniform: f64,
    jitter_seed: u64,
}

/// What the network looks like in one round.
///
/// The public fields are what the operator observes before deciding. The
/// pair realizations that decide outcomes stay private.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub t: u64,
    /// Clients within range of each ES.
    pub feasible: Vec<BTreeSet<ClientId>>,
    /// Context of every feasible pair.
    pub contexts: BTreeMap<Pair, ContextVector>,
    /// Price each client asks this round.
    pub costs: Vec<f64>,
    pub bandwidth_mhz: Vec<f64>,
    pub compute_mhz: Vec<f64>,
    draws: Vec<PairDraw>,
    num_es: usize,
}

impl RoundState {
    /// Hand-built round for driving policies outside an [`Environment`].
    ///
    /// A pair is feasible exactly when it has a context. There are no hidden
    /// draws: distances read 0 for feasible pairs and infinity otherwise,
    /// bandwidth and compute read 1.
    pub fn scripted(
        t: u64,
        num_es: usize,
        contexts: BTreeMap<Pair, ContextVector>,
        costs: Vec<f64>,
    ) -> Result<Self> {
        let n = costs.len();
        let mut feasible = vec![BTreeSet::new(); num_es];
        for &(client, es) in contexts.keys() {
            if client.0 >= n || es.0 >= num_es {
                return Err(Error::InvalidInput(format!(
                    "context for {client}:{es} outside {n} clients and {num_es} ESs"
                )));
            }
            feasible[es.0].insert(client);
        }
        let draws = (0..n * num_es)
            .map(|k| PairDraw {
                distance_km: if contexts.contains_key(&(ClientId(k / num_es), EsId(k % num_es))) {
                    0.0
                } else {
                    f64::INFINITY
                },
                dt_fading: 1.0,
                ut_fading: 1.0,
                uniform: 0.5,
                jitter_seed: 0,
            })
            .collect();
        Ok(Self {
            t,
            feasible,
            contexts,
            costs,
            bandwidth_mhz: vec![1.0; n],
            compute_mhz: vec![1.0; n],
            draws,
            num_es,
        })
    }

    pub fn num_clients(&self) -> usize {
        self.costs.len()
    }

    pub fn num_es(&self) -> usize {
        self.num_es
    }

    pub fn is_feasible(&self, client: ClientId, es: EsId) -> bool {
        self.feasible.get(es.0).is_some_and(|s| s.contains(&client))
    }

    /// Feasible pairs, ordered by client then ES.
    pub fn feasible_pairs(&self) -> impl Iterator<Item = (ClientId, EsId, &ContextVector)> {
        self.contexts.iter().map(|(&(n, m), phi)| (n, m, phi))
    }

    pub fn distance_km(&self, client: ClientId, es: EsId) -> f64 {
        self.draws[client.0 * self.num_es + es.0].distance_km
    }

    /// Selection instance of this round under a per-ES budget.
    pub fn instance(&self, budget_per_es: f64) -> Instance {
        Instance::new(budget_per_es, self.costs.clone(), self.feasible.clone())
    }

    /// Hash over everything in the round, hidden draws included. Two states
    /// with equal fingerprints describe the same network realization.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.t.hash(&mut h);
        self.feasible.hash(&mut h);
        for (pair, phi) in &self.contexts {
            pair.hash(&mut h);
            for c in phi.coords() {
                c.to_bits().hash(&mut h);
            }
        }
        for v in self
            .costs
            .iter()
            .chain(&self.bandwidth_mhz)
            .chain(&self.compute_mhz)
        {
            v.to_bits().hash(&mut h);
        }
        for d in &self.draws {
            for v in [d.distance_km, d.dt_fading, d.ut_fading, d.uniform] {
                v.to_bits().hash(&mut h);
            }
            d.jitter_seed.hash(&mut h);
        }
        h.finish()
    }
}

/// Result of one selected pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    /// Whether the update arrived before the deadline.
    pub x: bool,
    /// Stage times behind the outcome; `None` in synthetic mode.
    pub timing: Option<TrainingTime>,
}

pub type Outcomes = BTreeMap<Pair, PairOutcome>;

/// Number of ESs that received fewer than `z` on-time updates.
pub fn z_shortfalls(outcomes: &Outcomes, num_es: usize, z: usize) -> usize {
    let mut on_time = vec![0usize; num_es];
    for (&(_, es), o) in outcomes {
        if o.x {
            on_time[es.0] += 1;
        }
    }
    on_time.iter().filter(|&&k| k < z).count()
}

#[derive(Debug, Clone)]
pub struct Environment {
    config: NetworkConfig,
    seed: u64,
    prices: Vec<f64>,
    /// Anchor context of every pair (synthetic mode); coordinate 1 is the
    /// client's compute anchor and so is shared by all its pairs.
    anchors: Vec<Vec<f64>>,
    truth: Option<SyntheticTruth>,
    noise_w: f64,
    rate_scale_mbps: f64,
    next_round: u64,
}

impl Environment {
    pub fn new(config: NetworkConfig, seed: u64) -> Result<Self> {
        config.validate("network.")?;
        let mut rng = stream_rng(seed, 0);
        let n = config.num_clients;
        let m = config.num_es;
        let prices = (0..n)
            .map(|_| rng.random_range(config.price_min..=config.price_max))
            .collect();
        let compute_anchor: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut anchors = Vec::with_capacity(n * m);
        for &compute in &compute_anchor {
            for _ in 0..m {
                let mut a: Vec<f64> = (0..config.context_dim)
                    .map(|_| rng.random::<f64>())
                    .collect();
                if config.context_dim >= 2 {
                    a[1] = compute;
                }
                anchors.push(a);
            }
        }
        let truth = match config.mode {
            EnvMode::Synthetic => Some(SyntheticTruth::draw(&config, &mut rng)),
            EnvMode::Physical => None,
        };
        let noise_w = dbm_to_watts(config.noise_dbm);
        let best_gain = pathloss_gain_db(
            config.distance_min_km,
            config.pathloss_intercept_db,
            config.pathloss_slope_db,
        );
        let rate_scale_mbps =
            config.bandwidth_max_mhz * shannon_rate(config.p_tx_dbm, best_gain, noise_w)?;
        Ok(Self {
            config,
            seed,
            prices,
            anchors,
            truth,
            noise_w,
            rate_scale_mbps,
            next_round: 1,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-MHz price of every client, fixed for the run.
    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn synthetic_truth(&self) -> Option<&SyntheticTruth> {
        self.truth.as_ref()
    }

    /// Returns round `next` and moves on to the following one.
    pub fn advance_round(&mut self) -> RoundState {
        let state = self.round(self.next_round);
        self.next_round += 1;
        state
    }

    /// Round `t`, regardless of which rounds were generated before.
    pub fn round(&self, t: u64) -> RoundState {
        let cfg = &self.config;
        let n = cfg.num_clients;
        let m = cfg.num_es;
        let mut rng = stream_rng(self.seed, t);

        let bandwidth_mhz: Vec<f64> = (0..n)
            .map(|_| rng.random_range(cfg.bandwidth_min_mhz..=cfg.bandwidth_max_mhz))
            .collect();
        let mut compute_mhz: Vec<f64> = (0..n)
            .map(|_| rng.random_range(cfg.compute_min_mhz..=cfg.compute_max_mhz))
            .collect();
        let draws: Vec<PairDraw> = (0..n * m)
            .map(|_| PairDraw {
                distance_km: rng.random_range(cfg.distance_min_km..=cfg.distance_max_km),
                dt_fading: unit_exponential(&mut rng),
                ut_fading: unit_exponential(&mut rng),
                uniform: rng.random::<f64>(),
                jitter_seed: rng.random::<u64>(),
            })
            .collect();

        let y_span = cfg.compute_max_mhz - cfg.compute_min_mhz;
        let jitter = cfg.context_jitter;
        let synthetic = cfg.mode == EnvMode::Synthetic;
        if synthetic {
            // compute follows the client's anchor rather than a flat draw
            for (client, y) in compute_mhz.iter_mut().enumerate() {
                let anchor = self.anchors[client * m].get(1).copied().unwrap_or(0.5);
                let level = (anchor + rng.random_range(-jitter..=jitter)).clamp(0.0, 1.0);
                *y = cfg.compute_min_mhz + level * y_span;
            }
        }

        let mut feasible = vec![BTreeSet::new(); m];
        let mut contexts = BTreeMap::new();
        for client in 0..n {
            for es in 0..m {
                let d = &draws[client * m + es];
                if d.distance_km > cfg.es_radius_km {
                    continue;
                }
                feasible[es].insert(ClientId(client));
                let y_norm = if y_span > 0.0 {
                    (compute_mhz[client] - cfg.compute_min_mhz) / y_span
                } else {
                    0.5
                };
                let phi = if synthetic {
                    let mut pair_rng = stream_rng(d.jitter_seed, 0);
                    let anchor = &self.anchors[client * m + es];
                    ContextVector::clamped(anchor.iter().enumerate().map(|(k, &a)| {
                        if k == 1 {
                            y_norm
                        } else {
                            a + pair_rng.random_range(-jitter..=jitter)
                        }
                    }))
                } else {
                    let rate = bandwidth_mhz[client]
                        * self.spectral_efficiency(d.distance_km, d.dt_fading);
                    ContextVector::clamped([rate / self.rate_scale_mbps, y_norm])
                };
                contexts.insert((ClientId(client), EsId(es)), phi);
            }
        }
        let costs = (0..n).map(|c| self.prices[c] * compute_mhz[c]).collect();
        RoundState {
            t,
            feasible,
            contexts,
            costs,
            bandwidth_mhz,
            compute_mhz,
            draws,
            num_es: m,
        }
    }

    fn spectral_efficiency(&self, distance_km: f64, fading: f64) -> f64 {
        let gain_db = pathloss_gain_db(
            distance_km,
            self.config.pathloss_intercept_db,
            self.config.pathloss_slope_db,
        );
        let snr =
            dbm_to_watts(self.config.p_tx_dbm) * db_to_linear(gain_db) * fading / self.noise_w;
        (1.0 + snr).log2()
    }

    fn pair_timing(
        &self,
        state: &RoundState,
        client: ClientId,
        es: EsId,
        ut_fading: f64,
    ) -> TrainingTime {
        let d = &state.draws[client.0 * self.config.num_es + es.0];
        let cfg = &self.config;
        training_time(
            self.spectral_efficiency(d.distance_km, d.dt_fading),
            self.spectral_efficiency(d.distance_km, ut_fading),
            state.bandwidth_mhz[client.0],
            cfg.a_dt_mbit,
            cfg.a_ut_mbit,
            cfg.workload_q,
            state.compute_mhz[client.0],
        )
        .expect("bandwidth and compute ranges are validated positive")
    }

    /// Outcomes of every selected pair. Unselected pairs produce nothing.
    pub fn simulate_participation(
        &self,
        state: &RoundState,
        decision: &SelectionDecision,
    ) -> Result<Outcomes> {
        let mut out = Outcomes::new();
        for (client, es) in decision.pairs() {
            if !state.is_feasible(client, es) {
                return Err(Error::InfeasiblePair { client, es });
            }
            let d = &state.draws[client.0 * self.config.num_es + es.0];
            let outcome = match &self.truth {
                Some(truth) => {
                    let p = truth
                        .probability(self.pair_index(client, es), &state.contexts[&(client, es)]);
                    PairOutcome {
                        x: d.uniform < p,
                        timing: None,
                    }
                }
                None => {
                    let timing = self.pair_timing(state, client, es, d.ut_fading);
                    PairOutcome {
                        x: timing.tau_total <= self.config.tau_dead_s,
                        timing: Some(timing),
                    }
                }
            };
            out.insert((client, es), outcome);
        }
        Ok(out)
    }

    fn pair_index(&self, client: ClientId, es: EsId) -> usize {
        client.0 * self.config.num_es + es.0
    }

    /// True participation probability of a feasible pair given what is known
    /// before the upload: the exact map in synthetic mode, a Monte-Carlo
    /// estimate over upload fading with `mc_samples` draws in physical mode.
    pub fn ground_truth_prob(&self, state: &RoundState, client: ClientId, es: EsId) -> Result<f64> {
        self.ground_truth_with_samples(state, client, es, self.config.mc_samples)
    }

    /// As [`ground_truth_prob`](Self::ground_truth_prob) with an explicit
    /// sample count (ignored in synthetic mode).
    pub fn ground_truth_with_samples(
        &self,
        state: &RoundState,
        client: ClientId,
        es: EsId,
        samples: usize,
    ) -> Result<f64> {
        let phi = state
            .contexts
            .get(&(client, es))
            .ok_or(Error::InfeasiblePair { client, es })?;
        if let Some(truth) = &self.truth {
            return Ok(truth.probability(self.pair_index(client, es), phi));
        }
        if samples == 0 {
            return Err(Error::InvalidInput(
                "need at least one fading sample".into(),
            ));
        }
        let stream = MC_STREAM_TAG | (state.t << 24) | self.pair_index(client, es) as u64;
        let mut rng = stream_rng(self.seed, stream);
        let mut hits = 0usize;
        for _ in 0..samples {
            let h = unit_exponential(&mut rng);
            if self.pair_timing(state, client, es, h).tau_total <= self.config.tau_dead_s {
                hits += 1;
            }
        }
        Ok(hits as f64 / samples as f64)
    }

    /// Ground truth of every feasible pair of the round.
    pub fn truth_table(&self, state: &RoundState) -> PairScores {
        state
            .contexts
            .keys()
            .map(|&(n, m)| {
                let p = self
                    .ground_truth_prob(state, n, m)
                    .expect("pair is feasible by construction");
                ((n, m), p)
            })
            .collect()
    }

    /// Worst-case binomial standard error of one ground-truth estimate,
    /// zero in synthetic mode.
    pub fn truth_standard_error(&self) -> f64 {
        match self.config.mode {
            EnvMode::Synthetic => 0.0,
            EnvMode::Physical => 0.5 / (self.config.mc_samples as f64).sqrt(),
        }
    }
}
