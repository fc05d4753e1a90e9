//! Closed-form cost model of one federated-learning round: iteration counts,
//! uplink rate, and per-round computation/communication time and energy.
//!
//! Global iterations use the natural log, local iterations base 2 (the same
//! base the accuracy subproblem is written in). The local-iteration constant
//! is normalised to one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SystemConfig, UserProfile};

/// Global iterations needed at local accuracy `eps`: C1 ln(1/gamma) / (1 - eps).
///
/// For a population pass the worst (largest) accuracy of the participants.
pub fn global_iterations(config: &SystemConfig, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain {
            op: "global_iterations",
            name: "eps",
            value: eps,
        });
    }
    Ok(config.iteration_scale() / (1.0 - eps))
}

/// Local iterations needed to reach accuracy `eps`: log2(1/eps).
pub fn local_iterations(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain {
            op: "local_iterations",
            name: "eps",
            value: eps,
        });
    }
    Ok(-eps.log2())
}

/// Achievable uplink rate (bit/s) with `subchannels` subchannels and
/// `antennas` base-station antennas. A single antenna yields zero.
pub fn uplink_rate(
    config: &SystemConfig,
    user: &UserProfile,
    power: f64,
    antennas: u32,
    subchannels: u32,
) -> f64 {
    let band = f64::from(subchannels) * config.bandwidth_hz;
    let snr = f64::from(antennas.saturating_sub(1)) * power * user.channel_gain
        / (band * config.noise_w_per_hz);
    band * snr.ln_1p() / std::f64::consts::LN_2
}

/// Time of one local iteration at CPU frequency `f`.
pub fn comp_time(user: &UserProfile, f: f64) -> f64 {
    user.cycles_per_pass() / f
}

/// Energy of one local iteration at CPU frequency `f`.
pub fn comp_energy(user: &UserProfile, f: f64) -> f64 {
    user.capacitance * user.cycles_per_pass() * f * f
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub comp_time_per_local_iter: f64,
    pub comp_energy_per_local_iter: f64,
    pub rate: f64,
    pub comm_time: f64,
    pub comm_energy: f64,
    pub round_time: f64,
    pub round_energy: f64,
}

/// Time and energy of one global round for a given operating point.
pub fn round_metrics(
    config: &SystemConfig,
    user: &UserProfile,
    power: f64,
    frequency: f64,
    antennas: u32,
    subchannels: u32,
    eps: f64,
) -> Result<RoundMetrics> {
    let local = local_iterations(eps)?;
    let rate = uplink_rate(config, user, power, antennas, subchannels);
    if rate <= 0.0 {
        return Err(Error::UnreachableUplink);
    }
    let comp_time_per_local_iter = comp_time(user, frequency);
    let comp_energy_per_local_iter = comp_energy(user, frequency);
    let comm_time = config.sigma_bits / rate;
    let comm_energy = power * comm_time;
    Ok(RoundMetrics {
        comp_time_per_local_iter,
        comp_energy_per_local_iter,
        rate,
        comm_time,
        comm_energy,
        round_time: local * comp_time_per_local_iter + comm_time,
        round_energy: local * comp_energy_per_local_iter + comm_energy,
    })
}
