//! Seeded seller populations.
//!
//! Generator: ChaCha8 seeded with `seed` through `seed_from_u64`. User `k`
//! draws from its own stream (`set_stream(k)`), so a user's profile does not
//! depend on how many users precede it. The first-come-first-served arrival
//! order draws from stream [`ARRIVAL_STREAM`]. Uniform draws map one `u64`
//! to `[0, 1)` by its top 53 bits and scale linearly into `[lo, hi]`.
//!
//! Per-user draw order: cycles per sample, channel gain (dB), p_min (mW),
//! p_max (mW), f_min (GHz), f_max (GHz). Decibel and milli/giga values are
//! converted to linear SI units here; instances store only linear values.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fl_auction::bid_solver::{build_bid_menu, CostReport};
use fl_auction::model::{db_to_linear, AuctionInstance, SystemConfig, UserId, UserProfile};

use crate::config::{ExperimentConfig, PopulationParams, Range};

pub const ARRIVAL_STREAM: u64 = u64::MAX;

/// One sweep point: everything that varies between instances of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub users: usize,
    pub eta: crate::config::EtaSetting,
    pub t_max: f64,
}

impl Scenario {
    /// First entry of every sweep list.
    pub fn first_of(config: &ExperimentConfig) -> Self {
        Self {
            users: config.users[0],
            eta: config.etas[0],
            t_max: config.deadlines[0],
        }
    }
}

fn user_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, range: Range) -> f64 {
    let u: f64 = rng.gen();
    range[0] + (range[1] - range[0]) * u
}

/// Draws the physical profile of user `k`.
pub fn draw_profile(
    pop: &PopulationParams,
    system: &SystemConfig,
    seed: u64,
    k: usize,
) -> UserProfile {
    let mut rng = user_rng(seed, k as u64);
    let cycles_per_sample = uniform(&mut rng, pop.cycles_per_sample);
    let gain_db = uniform(&mut rng, pop.channel_gain_db);
    let p_min = uniform(&mut rng, pop.p_min_mw) * 1e-3;
    let p_max = uniform(&mut rng, pop.p_max_mw) * 1e-3;
    let f_min = uniform(&mut rng, pop.f_min_ghz) * 1e9;
    let f_max = uniform(&mut rng, pop.f_max_ghz) * 1e9;
    UserProfile {
        id: UserId(k as u32),
        cycles_per_sample,
        samples: pop.samples,
        capacitance: pop.capacitance,
        channel_gain: db_to_linear(gain_db),
        p_min,
        p_max,
        f_min,
        f_max,
        b_cap: system.b_max,
        a_cap: system.a_max,
    }
}

/// Builds the instance for one sweep point. Users whose menu comes out empty
/// stay in the instance with no bids.
pub fn generate_instance(
    config: &ExperimentConfig,
    scenario: &Scenario,
    seed: u64,
) -> anyhow::Result<AuctionInstance> {
    let system = config.system.system_config(scenario.eta, scenario.t_max);
    let mut users = Vec::with_capacity(scenario.users);
    let mut bids = Vec::with_capacity(scenario.users);
    for k in 0..scenario.users {
        let user = draw_profile(&config.population, &system, seed, k);
        bids.push(build_bid_menu(
            &system,
            &user,
            &config.bundles,
            CostReport::Truthful,
        )?);
        users.push(user);
    }
    Ok(AuctionInstance::new(system, users, bids)?)
}

/// Random arrival order of `n` users for the posted-price baseline.
pub fn arrival_order(seed: u64, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut user_rng(seed, ARRIVAL_STREAM));
    order
}
