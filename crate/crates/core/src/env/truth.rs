use rand::Rng;

use super::config::{NetworkConfig, TruthFamily};
use crate::context::ContextVector;

/// Synthetic participation probability of every client-ES pair.
///
/// The per-pair parameters are drawn once when the environment is built and
/// stay fixed for the whole run.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    family: TruthFamily,
    l: f64,
    alpha: f64,
    intercept: f64,
    slope: f64,
    floor: f64,
    peaks: Vec<f64>,
    centres: Vec<Vec<f64>>,
}

impl SyntheticTruth {
    pub(crate) fn draw(config: &NetworkConfig, rng: &mut impl Rng) -> Self {
        let pairs = config.num_clients * config.num_es;
        let mut peaks = Vec::with_capacity(pairs);
        let mut centres = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            peaks.push(rng.random_range(config.truth_peak_min..=config.truth_peak_max));
            centres.push(
                (0..config.context_dim)
                    .map(|_| rng.random::<f64>())
                    .collect(),
            );
        }
        Self {
            family: config.truth_family,
            l: config.holder_l,
            alpha: config.holder_alpha,
            intercept: config.truth_intercept,
            slope: config.truth_slope,
            floor: config.truth_floor,
            peaks,
            centres,
        }
    }

    /// Probability for the pair at flat index `pair_index` (client-major).
    pub fn probability(&self, pair_index: usize, phi: &ContextVector) -> f64 {
        match self.family {
            TruthFamily::Linear => (self.intercept + self.slope * phi.mean()).clamp(0.0, 1.0),
            TruthFamily::Peak => {
                let centre = &self.centres[pair_index];
                let dist = phi
                    .coords()
                    .iter()
                    .zip(centre)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (self.peaks[pair_index] - self.l * dist.powf(self.alpha)).clamp(self.floor, 1.0)
            }
        }
    }
}
