//! Wireless link model: log-distance path loss, Shannon spectral efficiency and
//! the download / local-compute / upload time decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Large-scale channel gain in dB at `distance_km`:
/// `-(intercept_db + slope_db * log10(d))`.
pub fn pathloss_gain_db(distance_km: f64, intercept_db: f64, slope_db: f64) -> f64 {
    -(intercept_db + slope_db * distance_km.log10())
}

/// `log2(1 + P * g / N0)` in bits/s/Hz, with the transmit power in dBm, the
/// gain in dB and the noise power in watts.
pub fn shannon_rate(p_tx_dbm: f64, gain_db: f64, noise_w: f64) -> Result<f64> {
    if !(noise_w > 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise power {noise_w} must be > 0"
        )));
    }
    let snr = dbm_to_watts(p_tx_dbm) * db_to_linear(gain_db) / noise_w;
    Ok((1.0 + snr).log2())
}

/// Per-stage training time of one client, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingTime {
    pub tau_dt: f64,
    pub tau_lc: f64,
    pub tau_ut: f64,
    pub tau_total: f64,
}

/// Download, local-compute and upload times.
///
/// Spectral efficiencies are in bits/s/Hz, bandwidth in MHz, payloads in Mbit
/// and compute in MHz. A zero spectral efficiency gives an infinite stage time.
pub fn training_time(
    rate_dt: f64,
    rate_ut: f64,
    bandwidth_mhz: f64,
    a_dt_mbit: f64,
    a_ut_mbit: f64,
    workload: f64,
    compute_mhz: f64,
) -> Result<TrainingTime> {
    if !(bandwidth_mhz > 0.0) {
        return Err(Error::InvalidInput("bandwidth must be > 0".into()));
    }
    if !(compute_mhz > 0.0) {
        return Err(Error::InvalidInput("compute must be > 0".into()));
    }
    if rate_dt < 0.0 || rate_ut < 0.0 || a_dt_mbit < 0.0 || a_ut_mbit < 0.0 || workload < 0.0 {
        return Err(Error::InvalidInput(
            "rates, payloads and workload must be >= 0".into(),
        ));
    }
    let tau_dt = a_dt_mbit / (bandwidth_mhz * rate_dt);
    let tau_lc = workload / compute_mhz;
    let tau_ut = a_ut_mbit / (bandwidth_mhz * rate_ut);
    Ok(TrainingTime {
        tau_dt,
        tau_lc,
        tau_ut,
        tau_total: tau_dt + tau_lc + tau_ut,
    })
}
