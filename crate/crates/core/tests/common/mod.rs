#![allow(dead_code)]

use fl_auction::auction::bid_value;
use fl_auction::model::{AuctionInstance, Bid, BidSolution, SystemConfig, UserId, UserProfile};
use proptest::prelude::*;

pub const TAU: f64 = 100.0;

/// `(eps, v, b, A)`; the bid's true cost is `v`.
pub type RawBid = (f64, f64, u32, u32);

pub fn config(b_max: u32, a_max: u32) -> SystemConfig {
    SystemConfig {
        b_max,
        a_max,
        tau: TAU,
        ..SystemConfig::default()
    }
}

/// A bid whose true cost is carried by its solution, so claims can be
/// changed without changing what the seller actually pays.
pub fn costed_bid(user: u32, index: usize, (eps, v, b, a): RawBid) -> Bid {
    let mut bid = Bid::new(UserId(user), index, b, a, eps, v);
    bid.solution = Some(BidSolution {
        power: 1e-3,
        frequency: 1e9,
        accuracy: eps,
        global_iterations: 1.0,
        total_energy: v,
        total_time: 1.0,
        iterations_used: 1,
        converged: true,
        objective_trace: Vec::new(),
    });
    bid
}

pub fn build(config: SystemConfig, users: &[Vec<RawBid>]) -> AuctionInstance {
    let profiles = (0..users.len() as u32)
        .map(|k| UserProfile::nominal(k, &config))
        .collect();
    let bids = users
        .iter()
        .enumerate()
        .map(|(k, list)| {
            list.iter()
                .enumerate()
                .map(|(i, &r)| costed_bid(k as u32, i, r))
                .collect()
        })
        .collect();
    AuctionInstance::new(config, profiles, bids).unwrap()
}

pub fn raw_bid(max_side: u32) -> impl Strategy<Value = RawBid> + Clone {
    (0.01f64..0.99, 0.0f64..60.0, 1..=max_side, 1..=max_side)
}

/// Square bundles (`b == A`).
pub fn square_bid(max_side: u32) -> impl Strategy<Value = RawBid> + Clone {
    (0.01f64..0.99, 0.0f64..60.0, 1..=max_side).prop_map(|(e, v, s)| (e, v, s, s))
}

pub fn users_of(
    bid: impl Strategy<Value = RawBid> + Clone,
    max_users: usize,
    max_bids: usize,
) -> impl Strategy<Value = Vec<Vec<RawBid>>> {
    prop::collection::vec(prop::collection::vec(bid, 1..=max_bids), 0..=max_users)
}

/// Welfare of the best feasible assignment, by full enumeration. Values
/// are accumulated in user order, the same order the solvers report in.
pub fn brute_force(inst: &AuctionInstance) -> f64 {
    fn go(inst: &AuctionInstance, k: usize, b: u32, a: u32, acc: f64) -> f64 {
        if k == inst.bids.len() {
            return acc;
        }
        let mut best = go(inst, k + 1, b, a, acc);
        for bid in &inst.bids[k] {
            let (nb, na) = (b + bid.subchannels, a + bid.antennas);
            let q = bid_value(bid, &inst.config);
            if q > 0.0 && nb <= inst.config.b_max && na <= inst.config.a_max {
                best = best.max(go(inst, k + 1, nb, na, acc + q));
            }
        }
        best
    }
    go(inst, 0, 0, 0, 0.0)
}

pub fn rel_le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * a.abs().max(b.abs()).max(1.0)
}
