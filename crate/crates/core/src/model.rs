//! Domain records shared by the bid solver, the auction and the baselines.
//!
//! All physical quantities are stored in linear SI units. Decibel inputs are
//! converted with [`db_to_linear`] and [`dbm_per_hz_to_watts_per_hz`] before
//! they reach any of these types.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Convert a power ratio in dB to a linear factor.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a noise density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts_per_hz(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Task-level constants of one FL round economy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Per-subchannel bandwidth W (Hz).
    pub bandwidth_hz: f64,
    /// Noise power spectral density N0 (W/Hz, linear).
    pub noise_w_per_hz: f64,
    /// Subchannels available at the base station.
    pub b_max: u32,
    /// Antennas available at the base station.
    pub a_max: u32,
    /// Global-iteration constant C1.
    pub c1: f64,
    /// Target global accuracy, in (0,1).
    pub gamma: f64,
    /// Local model update size (bits).
    pub sigma_bits: f64,
    /// Satisfaction per unit of local accuracy.
    pub tau: f64,
    pub eta_b: f64,
    pub eta_a: f64,
    /// FL task deadline (s).
    pub t_max: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 15e3,
            noise_w_per_hz: dbm_per_hz_to_watts_per_hz(-174.0),
            b_max: 100,
            a_max: 100,
            c1: 1.0,
            gamma: 0.1,
            sigma_bits: 1e5,
            tau: 10.0,
            eta_b: 1.0,
            eta_a: 1.0,
            t_max: 100.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.bandwidth_hz > 0.0, "bandwidth_hz must be > 0"),
            (self.noise_w_per_hz > 0.0, "noise_w_per_hz must be > 0"),
            (self.b_max >= 1, "b_max must be >= 1"),
            (self.a_max >= 1, "a_max must be >= 1"),
            (self.c1 > 0.0, "c1 must be > 0"),
            (
                self.gamma > 0.0 && self.gamma < 1.0,
                "gamma must lie in (0,1)",
            ),
            (self.sigma_bits > 0.0, "sigma_bits must be > 0"),
            (self.tau >= 0.0, "tau must be >= 0"),
            (self.eta_b > 0.0, "eta_b must be > 0"),
            (self.eta_a > 0.0, "eta_a must be > 0"),
            (self.t_max > 0.0, "t_max must be > 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidConfig((*msg).to_string())),
            None => Ok(()),
        }
    }

    /// C1 * ln(1/gamma), the numerator of the global-iteration count.
    pub fn iteration_scale(&self) -> f64 {
        self.c1 * (1.0 / self.gamma).ln()
    }

    /// Weighted capacity eta_b * B_max + eta_a * A_max.
    pub fn weighted_capacity(&self) -> f64 {
        self.eta_b * f64::from(self.b_max) + self.eta_a * f64::from(self.a_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

/// Physical parameters of one seller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserProfile {
    pub id: UserId,
    /// CPU cycles per data sample.
    pub cycles_per_sample: f64,
    /// Local dataset size (samples).
    pub samples: f64,
    /// Effective switched capacitance of the chipset.
    pub capacitance: f64,
    /// Uplink channel gain (linear).
    pub channel_gain: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Largest subchannel count this user requests in one bid.
    pub b_cap: u32,
    /// Largest antenna count this user requests in one bid.
    pub a_cap: u32,
}

impl UserProfile {
    pub fn validate(&self, config: &SystemConfig) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("user {}: {msg}", self.id)));
        if !(self.p_min > 0.0 && self.p_min <= self.p_max) {
            return bad("need 0 < p_min <= p_max");
        }
        if !(self.f_min > 0.0 && self.f_min <= self.f_max) {
            return bad("need 0 < f_min <= f_max");
        }
        if !(self.cycles_per_sample > 0.0
            && self.samples > 0.0
            && self.capacitance > 0.0
            && self.channel_gain > 0.0)
        {
            return bad("c, s, zeta and h must be positive");
        }
        if self.b_cap < 1 || self.b_cap > config.b_max {
            return bad("b_cap must lie in [1, B_max]");
        }
        if self.a_cap < 1 || self.a_cap > config.a_max {
            return bad("a_cap must lie in [1, A_max]");
        }
        Ok(())
    }

    /// Mid-range physical parameters with ceilings equal to the base
    /// station's capacities. Handy for hand-built auction instances.
    pub fn nominal(id: u32, config: &SystemConfig) -> Self {
        Self {
            id: UserId(id),
            cycles_per_sample: 30.0,
            samples: 8e5,
            capacitance: 1e-26,
            channel_gain: db_to_linear(-92.5),
            p_min: 1.5e-3,
            p_max: 4.5e-3,
            f_min: 1.5e8,
            f_max: 4e9,
            b_cap: config.b_max,
            a_cap: config.a_max,
        }
    }

    /// Cycles needed for one pass over the local data, c * s.
    pub fn cycles_per_pass(&self) -> f64 {
        self.cycles_per_sample * self.samples
    }
}

/// Energy-minimal operating point of one bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidSolution {
    pub power: f64,
    pub frequency: f64,
    pub accuracy: f64,
    /// Global-iteration count at `accuracy`.
    pub global_iterations: f64,
    /// I0 * per-round energy; the true cost of the bid.
    pub total_energy: f64,
    /// I0 * per-round time.
    pub total_time: f64,
    pub iterations_used: u32,
    pub converged: bool,
    /// Objective after each outer iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

/// One seller offer: a resource bundle, the accuracy it delivers and a claimed cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub user: UserId,
    pub index: usize,
    pub subchannels: u32,
    pub antennas: u32,
    pub accuracy: f64,
    /// Claimed cost v.
    pub claimed_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<BidSolution>,
}

impl Bid {
    /// A bid without solver diagnostics; its true cost is its claim.
    pub fn new(
        user: UserId,
        index: usize,
        subchannels: u32,
        antennas: u32,
        accuracy: f64,
        claimed_cost: f64,
    ) -> Self {
        Self {
            user,
            index,
            subchannels,
            antennas,
            accuracy,
            claimed_cost,
            solution: None,
        }
    }

    /// Cost the seller actually incurs. Falls back to the claim for bids
    /// built without a solver run.
    pub fn true_cost(&self) -> f64 {
        self.solution
            .as_ref()
            .map_or(self.claimed_cost, |s| s.total_energy)
    }
}

/// Everything an allocation algorithm sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionInstance {
    pub config: SystemConfig,
    pub users: Vec<UserProfile>,
    /// `bids[k]` belongs to `users[k]`.
    pub bids: Vec<Vec<Bid>>,
}

impl AuctionInstance {
    pub fn new(config: SystemConfig, users: Vec<UserProfile>, bids: Vec<Vec<Bid>>) -> Result<Self> {
        let instance = Self {
            config,
            users,
            bids,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.users.len() != self.bids.len() {
            return Err(Error::InvalidConfig(format!(
                "{} users but {} bid lists",
                self.users.len(),
                self.bids.len()
            )));
        }
        for (user, bids) in self.users.iter().zip(&self.bids) {
            user.validate(&self.config)?;
            let mut seen = std::collections::HashSet::new();
            for bid in bids {
                if bid.user != user.id {
                    return Err(Error::InvalidConfig(format!(
                        "bid {} of {} is filed under {}",
                        bid.index, bid.user, user.id
                    )));
                }
                if !seen.insert(bid.index) {
                    return Err(Error::InvalidConfig(format!(
                        "duplicate bid index {} for {}",
                        bid.index, user.id
                    )));
                }
                if bid.subchannels < 1
                    || bid.subchannels > user.b_cap
                    || bid.antennas < 1
                    || bid.antennas > user.a_cap
                {
                    return Err(Error::InvalidConfig(format!(
                        "bid {} of {} exceeds the user's ceilings",
                        bid.index, user.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_bids(&self) -> usize {
        self.bids.iter().map(Vec::len).sum()
    }

    /// Iterate `(user position, bid)` over every bid.
    pub fn all_bids(&self) -> impl Iterator<Item = (usize, &Bid)> {
        self.bids
            .iter()
            .enumerate()
            .flat_map(|(k, bids)| bids.iter().map(move |b| (k, b)))
    }

    /// Copy of the instance with one user's bids withdrawn.
    pub fn without_user(&self, position: usize) -> Self {
        let mut reduced = self.clone();
        reduced.bids[position].clear();
        reduced
    }
}
