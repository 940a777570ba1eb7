use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the exploration control function `K(t) = t^z ln t` and of
/// the partition granularity `h_T = ceil(T^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSchedule {
    pub z: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl ExplorationSchedule {
    pub fn new(z: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::InvalidInput(format!("z = {z} must lie in (0, 1)")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must be > 0")));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::InvalidInput(format!(
                "gamma = {gamma} must lie in (0, 1/2)"
            )));
        }
        Ok(Self { z, alpha, gamma })
    }

    /// Regret-optimal choice for the linear utility: `z = 2a/(3a+2)`, `gamma = z/(2a)`.
    pub fn theorem_defaults(alpha: f64) -> Result<Self> {
        let z = 2.0 * alpha / (3.0 * alpha + 2.0);
        Self::new(z, alpha, z / (2.0 * alpha))
    }

    /// Schedule paired with a delta-approximate oracle: `z = (2a+2)/(3a+2)`,
    /// `gamma = 1/(3a+2)`.
    pub fn approximate_oracle_defaults(alpha: f64) -> Result<Self> {
        let z = (2.0 * alpha + 2.0) / (3.0 * alpha + 2.0);
        Self::new(z, alpha, 1.0 / (3.0 * alpha + 2.0))
    }

    /// `K(t) = t^z ln t`; zero at `t = 1`.
    pub fn control_function(&self, t: u64) -> Result<f64> {
        if t == 0 {
            return Err(Error::ZeroRound);
        }
        let t = t as f64;
        Ok(t.powf(self.z) * t.ln())
    }

    /// Cells per axis for a horizon of `horizon` rounds.
    pub fn cells_per_axis(&self, horizon: u64) -> u32 {
        ((horizon.max(1) as f64).powf(self.gamma).ceil() as u32).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_defaults() {
        let s = ExplorationSchedule::theorem_defaults(1.0).unwrap();
        assert_eq!(s.z, 0.4);
        assert_eq!(s.gamma, 0.2);
    }

    #[test]
    fn defaults_follow_identities() {
        for alpha in [0.25, 0.5, 1.0, 2.0, 7.0] {
            let s = ExplorationSchedule::theorem_defaults(alpha).unwrap();
            assert!((s.z - 2.0 * alpha / (3.0 * alpha + 2.0)).abs() < 1e-15);
            assert!((s.gamma - s.z / (2.0 * alpha)).abs() < 1e-15);
        }
    }

    #[test]
    fn control_function_values() {
        let s = ExplorationSchedule::theorem_defaults(1.0).unwrap();
        assert_eq!(s.control_function(1).unwrap(), 0.0);
        // reference values from a 30-digit evaluation of t^0.4 ln t
        assert!((s.control_function(10).unwrap() - 5.783_832_252_487_968).abs() < 1e-9);
        assert!((s.control_function(100).unwrap() - 29.056_659_514_304_04).abs() < 1e-9);
        assert!(matches!(s.control_function(0), Err(Error::ZeroRound)));
    }

    #[test]
    fn control_function_is_monotone() {
        let s = ExplorationSchedule::theorem_defaults(1.0).unwrap();
        let mut prev = s.control_function(1).unwrap();
        for t in 2..20_000 {
            let k = s.control_function(t).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ExplorationSchedule::new(1.0, 1.0, 0.2).is_err());
        assert!(ExplorationSchedule::new(0.4, 0.0, 0.2).is_err());
        assert!(ExplorationSchedule::new(0.4, 1.0, 0.5).is_err());
    }

    #[test]
    fn cells_per_axis_from_horizon() {
        let s = ExplorationSchedule::theorem_defaults(1.0).unwrap();
        assert_eq!(s.cells_per_axis(1000), 4);
        assert_eq!(s.cells_per_axis(5000), 6);
        assert_eq!(s.cells_per_axis(1), 1);
    }
}
