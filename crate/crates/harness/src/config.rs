//! Experiment configuration. Every field has a default, so `{}` is a valid
//! config file; unknown fields are rejected.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use fl_auction::auction::PaymentRule;
use fl_auction::bid_solver::Bundle;
use fl_auction::model::{dbm_per_hz_to_watts_per_hz, SystemConfig};

use crate::sweep::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSetting {
    pub eta_a: f64,
    pub eta_b: f64,
}

/// Uniform draw bounds `[lo, hi]`.
pub type Range = [f64; 2];

/// Update size used by experiments. Large enough that uploading competes
/// with computing, so bid values spread out and turn negative on the
/// smallest bundles.
pub const DEFAULT_SIGMA_BITS: f64 = 1e8;

/// Base-station and task constants shared by every instance of a sweep.
/// The weights and the deadline come from the sweep lists instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    pub bandwidth_hz: f64,
    /// Converted to W/Hz when instances are generated.
    pub noise_dbm_per_hz: f64,
    pub b_max: u32,
    pub a_max: u32,
    pub c1: f64,
    pub gamma: f64,
    pub sigma_bits: f64,
    pub tau: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let d = SystemConfig::default();
        Self {
            bandwidth_hz: d.bandwidth_hz,
            noise_dbm_per_hz: -174.0,
            b_max: d.b_max,
            a_max: d.a_max,
            c1: d.c1,
            gamma: d.gamma,
            sigma_bits: DEFAULT_SIGMA_BITS,
            tau: d.tau,
        }
    }
}

impl SystemParams {
    pub fn system_config(&self, eta: EtaSetting, t_max: f64) -> SystemConfig {
        SystemConfig {
            bandwidth_hz: self.bandwidth_hz,
            noise_w_per_hz: dbm_per_hz_to_watts_per_hz(self.noise_dbm_per_hz),
            b_max: self.b_max,
            a_max: self.a_max,
            c1: self.c1,
            gamma: self.gamma,
            sigma_bits: self.sigma_bits,
            tau: self.tau,
            eta_b: eta.eta_b,
            eta_a: eta.eta_a,
            t_max,
        }
    }
}

/// Distributions the seller population is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationParams {
    pub cycles_per_sample: Range,
    pub samples: f64,
    pub capacitance: f64,
    pub channel_gain_db: Range,
    pub p_min_mw: Range,
    pub p_max_mw: Range,
    pub f_min_ghz: Range,
    pub f_max_ghz: Range,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self {
            cycles_per_sample: [10.0, 50.0],
            samples: 800e3,
            capacitance: 1e-26,
            channel_gain_db: [-95.0, -90.0],
            p_min_mw: [1.0, 2.0],
            p_max_mw: [3.0, 6.0],
            f_min_ghz: [0.1, 0.2],
            f_max_ghz: [3.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Population sizes to sweep.
    pub users: Vec<usize>,
    /// Bundle grid each seller bids on, in menu order.
    pub bundles: Vec<Bundle>,
    /// Basic prices of the posted-price baseline.
    pub base_prices: Vec<f64>,
    pub etas: Vec<EtaSetting>,
    /// Task deadlines (s).
    pub deadlines: Vec<f64>,
    pub repetitions: usize,
    pub schemes: Vec<Scheme>,
    pub payment_rule: PaymentRule,
    /// Exact optimum is attempted only up to this many users.
    pub exact_max_users: usize,
    pub exact_node_budget: u64,
    pub system: SystemParams,
    pub population: PopulationParams,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            users: vec![10, 20, 30, 40, 50],
            bundles: vec![
                Bundle::new(50, 50),
                Bundle::new(30, 30),
                Bundle::new(10, 10),
            ],
            base_prices: vec![0.01],
            etas: vec![EtaSetting {
                eta_a: 1.0,
                eta_b: 1.0,
            }],
            deadlines: vec![100.0],
            repetitions: 20,
            schemes: Scheme::ALL.to_vec(),
            payment_rule: PaymentRule::ExactCritical,
            exact_max_users: 12,
            exact_node_budget: fl_auction::baselines::DEFAULT_NODE_BUDGET,
            system: SystemParams::default(),
            population: PopulationParams::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.users.is_empty(), "users sweep is empty");
        anyhow::ensure!(!self.bundles.is_empty(), "bundle grid is empty");
        anyhow::ensure!(!self.base_prices.is_empty(), "base price sweep is empty");
        anyhow::ensure!(!self.etas.is_empty(), "eta sweep is empty");
        anyhow::ensure!(!self.deadlines.is_empty(), "deadline sweep is empty");
        anyhow::ensure!(!self.schemes.is_empty(), "no schemes selected");
        anyhow::ensure!(self.repetitions >= 1, "repetitions must be >= 1");
        anyhow::ensure!(
            self.base_prices.iter().all(|&p| p >= 0.0),
            "base prices must be nonnegative"
        );
        for eta in &self.etas {
            for &t in &self.deadlines {
                self.system
                    .system_config(*eta, t)
                    .validate()
                    .map_err(anyhow::Error::from)?;
            }
        }
        for b in &self.bundles {
            anyhow::ensure!(
                b.subchannels >= 1
                    && b.subchannels <= self.system.b_max
                    && b.antennas >= 1
                    && b.antennas <= self.system.a_max,
                "bundle ({}, {}) exceeds base-station capacity",
                b.subchannels,
                b.antennas
            );
        }
        Ok(())
    }
}
