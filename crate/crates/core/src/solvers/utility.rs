use serde::{Deserialize, Serialize};

use super::{PairScores, SelectionDecision};
use crate::error::{Error, Result};

/// Which network utility a run maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    /// Mean number of participating clients per ES.
    #[default]
    Linear,
    /// Square root of the linear utility.
    Nonconvex,
}

impl UtilityKind {
    /// Utility from the participation mass `sum_m sum_{n in s_m} x_{n,m}`.
    pub fn from_mass(self, mass: f64, num_es: usize) -> f64 {
        let per_es = mass / num_es as f64;
        match self {
            UtilityKind::Linear => per_es,
            UtilityKind::Nonconvex => per_es.max(0.0).sqrt(),
        }
    }

    pub fn evaluate(self, decision: &SelectionDecision, probs: &PairScores) -> Result<f64> {
        Ok(self.from_mass(participation_mass(decision, probs)?, decision.num_es()))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UtilityKind::Linear => "linear",
            UtilityKind::Nonconvex => "nonconvex",
        }
    }
}

/// Sum of `probs` over the assigned pairs.
pub fn participation_mass(decision: &SelectionDecision, probs: &PairScores) -> Result<f64> {
    let mut mass = 0.0;
    for (client, es) in decision.pairs() {
        mass += probs
            .get(&(client, es))
            .copied()
            .ok_or(Error::MissingScore { client, es })?;
    }
    Ok(mass)
}

/// `(1/M) * sum_m sum_{n in s_m} probs[n, m]`.
pub fn utility_linear(decision: &SelectionDecision, probs: &PairScores) -> Result<f64> {
    UtilityKind::Linear.evaluate(decision, probs)
}

/// Square root of [`utility_linear`].
pub fn utility_nonconvex(decision: &SelectionDecision, probs: &PairScores) -> Result<f64> {
    UtilityKind::Nonconvex.evaluate(decision, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{ClientId, EsId};

    #[test]
    fn empty_decision_is_zero() {
        let d = SelectionDecision::empty(3);
        assert_eq!(utility_linear(&d, &PairScores::new()).unwrap(), 0.0);
        assert_eq!(utility_nonconvex(&d, &PairScores::new()).unwrap(), 0.0);
    }

    #[test]
    fn linear_examples() {
        let pairs = [
            (ClientId(0), EsId(0)),
            (ClientId(1), EsId(0)),
            (ClientId(2), EsId(1)),
        ];
        let d = SelectionDecision::from_pairs(2, pairs);
        let x: PairScores = pairs.iter().copied().zip([1.0, 0.0, 1.0]).collect();
        assert_eq!(utility_linear(&d, &x).unwrap(), 1.0);

        let pairs: Vec<_> = (0..6).map(|n| (ClientId(n), EsId(n % 3))).collect();
        let d = SelectionDecision::from_pairs(3, pairs.iter().copied());
        let p: PairScores = pairs.iter().map(|&k| (k, 0.5)).collect();
        assert!((utility_linear(&d, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_examples() {
        let pairs: Vec<_> = (0..4).map(|n| (ClientId(n), EsId(0))).collect();
        let d = SelectionDecision::from_pairs(1, pairs.iter().copied());
        let x: PairScores = pairs.iter().map(|&k| (k, 1.0)).collect();
        assert_eq!(utility_nonconvex(&d, &x).unwrap(), 2.0);

        let pairs = [(ClientId(0), EsId(0)), (ClientId(1), EsId(1))];
        let d = SelectionDecision::from_pairs(2, pairs);
        let x: PairScores = pairs.iter().map(|&k| (k, 1.0)).collect();
        assert_eq!(utility_nonconvex(&d, &x).unwrap(), 1.0);
    }

    #[test]
    fn missing_probability_is_an_error() {
        let d = SelectionDecision::from_pairs(1, [(ClientId(0), EsId(0))]);
        assert!(matches!(
            utility_linear(&d, &PairScores::new()),
            Err(Error::MissingScore { .. })
        ));
    }
}
