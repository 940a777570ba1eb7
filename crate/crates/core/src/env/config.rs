use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How participation outcomes are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvMode {
    /// Deadline test on simulated download, compute and upload times.
    #[default]
    Physical,
    /// Bernoulli draws from a configured Hölder-continuous probability map.
    Synthetic,
}

/// Shape of the synthetic participation probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthFamily {
    /// `clamp(intercept + slope * mean(phi))`, shared by every pair.
    #[default]
    Linear,
    /// `clamp(peak - L * |phi - c|^alpha, floor, 1)` with a per-pair peak
    /// height and centre.
    Peak,
}

/// Network and scenario parameters. Every key is flat; units are in the
/// key suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub mode: EnvMode,
    pub num_clients: usize,
    pub num_es: usize,
    pub context_dim: usize,
    pub es_radius_km: f64,
    pub distance_min_km: f64,
    pub distance_max_km: f64,
    pub budget_per_es: f64,
    pub tau_dead_s: f64,
    pub a_dt_mbit: f64,
    pub a_ut_mbit: f64,
    pub workload_q: f64,
    pub p_tx_dbm: f64,
    pub noise_dbm: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_slope_db: f64,
    pub bandwidth_min_mhz: f64,
    pub bandwidth_max_mhz: f64,
    pub compute_min_mhz: f64,
    pub compute_max_mhz: f64,
    pub price_min: f64,
    pub price_max: f64,
    /// Minimum number of on-time updates an ES wants per round.
    pub min_updates_z: usize,
    /// Fading samples behind each physical-mode ground-truth probability.
    pub mc_samples: usize,
    pub truth_family: TruthFamily,
    pub holder_l: f64,
    pub holder_alpha: f64,
    pub truth_intercept: f64,
    pub truth_slope: f64,
    pub truth_peak_min: f64,
    pub truth_peak_max: f64,
    pub truth_floor: f64,
    /// Half-width of the per-round uniform jitter around each pair's anchor
    /// context in synthetic mode.
    pub context_jitter: f64,
}

impl Default for NetworkConfig {
    /// MNIST-scale network.
    fn default() -> Self {
        Self {
            mode: EnvMode::Physical,
            num_clients: 50,
            num_es: 3,
            context_dim: 2,
            es_radius_km: 2.0,
            distance_min_km: 0.05,
            distance_max_km: 3.0,
            budget_per_es: 3.5,
            tau_dead_s: 3.0,
            a_dt_mbit: 0.18,
            a_ut_mbit: 0.18,
            workload_q: 2.41,
            p_tx_dbm: 23.0,
            noise_dbm: -107.0,
            pathloss_intercept_db: 128.1,
            pathloss_slope_db: 37.6,
            bandwidth_min_mhz: 0.3,
            bandwidth_max_mhz: 1.0,
            compute_min_mhz: 2.0,
            compute_max_mhz: 4.0,
            price_min: 0.5,
            price_max: 2.0,
            min_updates_z: 1,
            mc_samples: 1000,
            truth_family: TruthFamily::Linear,
            holder_l: 1.0,
            holder_alpha: 1.0,
            truth_intercept: 0.1,
            truth_slope: 0.8,
            truth_peak_min: 0.5,
            truth_peak_max: 0.95,
            truth_floor: 0.05,
            context_jitter: 0.05,
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

fn ordered(lo_path: &str, lo: f64, hi_path: &str, hi: f64) -> Result<()> {
    positive(lo_path, lo)?;
    positive(hi_path, hi)?;
    if lo > hi {
        return Err(Error::config(
            hi_path,
            format!("{hi} is below {lo_path} = {lo}"),
        ));
    }
    Ok(())
}

impl NetworkConfig {
    /// Checks the invariants. `prefix` is prepended to field paths in errors.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let p = |k: &str| format!("{prefix}{k}");
        if self.num_es == 0 {
            return Err(Error::config(p("num_es"), "need at least one ES"));
        }
        if self.num_clients < self.num_es {
            return Err(Error::config(p("num_clients"), "must be >= num_es"));
        }
        if self.context_dim == 0 {
            return Err(Error::config(p("context_dim"), "must be >= 1"));
        }
        if self.mode == EnvMode::Physical && self.context_dim != 2 {
            return Err(Error::config(
                p("context_dim"),
                "physical mode observes exactly two context coordinates (rate, compute)",
            ));
        }
        if self.min_updates_z == 0 {
            return Err(Error::config(p("min_updates_z"), "must be >= 1"));
        }
        if self.mc_samples == 0 {
            return Err(Error::config(p("mc_samples"), "must be >= 1"));
        }
        for (k, v) in [
            ("es_radius_km", self.es_radius_km),
            ("budget_per_es", self.budget_per_es),
            ("tau_dead_s", self.tau_dead_s),
            ("a_dt_mbit", self.a_dt_mbit),
            ("a_ut_mbit", self.a_ut_mbit),
            ("workload_q", self.workload_q),
            ("holder_l", self.holder_l),
            ("holder_alpha", self.holder_alpha),
        ] {
            // an infinite deadline or budget is a legitimate limit case
            if !(v > 0.0) {
                return Err(Error::config(p(k), format!("must be > 0, got {v}")));
            }
        }
        ordered(
            &p("distance_min_km"),
            self.distance_min_km,
            &p("distance_max_km"),
            self.distance_max_km,
        )?;
        ordered(
            &p("bandwidth_min_mhz"),
            self.bandwidth_min_mhz,
            &p("bandwidth_max_mhz"),
            self.bandwidth_max_mhz,
        )?;
        ordered(
            &p("compute_min_mhz"),
            self.compute_min_mhz,
            &p("compute_max_mhz"),
            self.compute_max_mhz,
        )?;
        ordered(
            &p("price_min"),
            self.price_min,
            &p("price_max"),
            self.price_max,
        )?;
        if !self.p_tx_dbm.is_finite() || !self.noise_dbm.is_finite() {
            return Err(Error::config(p("noise_dbm"), "powers must be finite"));
        }
        if !(0.0..=0.5).contains(&self.context_jitter) {
            return Err(Error::config(p("context_jitter"), "must lie in [0, 0.5]"));
        }
        if self.mode == EnvMode::Synthetic {
            self.validate_truth(prefix)?;
        }
        Ok(())
    }

    fn validate_truth(&self, prefix: &str) -> Result<()> {
        let p = |k: &str| format!("{prefix}{k}");
        for (k, v) in [
            ("truth_peak_min", self.truth_peak_min),
            ("truth_peak_max", self.truth_peak_max),
            ("truth_floor", self.truth_floor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(p(k), format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.truth_peak_min > self.truth_peak_max {
            return Err(Error::config(p("truth_peak_max"), "below truth_peak_min"));
        }
        match self.truth_family {
            TruthFamily::Linear => {
                // |slope| * |mean(phi) - mean(phi')| <= |slope| / sqrt(D) * |phi - phi'|
                let needed = self.truth_slope.abs() / (self.context_dim as f64).sqrt();
                if self.holder_alpha != 1.0 || needed > self.holder_l + 1e-12 {
                    return Err(Error::config(
                        p("truth_slope"),
                        format!("linear family is Hölder only with alpha = 1 and L >= {needed:.4}"),
                    ));
                }
            }
            TruthFamily::Peak => {
                if self.holder_alpha > 1.0 {
                    return Err(Error::config(
                        p("holder_alpha"),
                        "peak family needs alpha <= 1",
                    ));
                }
            }
        }
        Ok(())
    }
}
