//! Buyer-side mechanism: primal-dual greedy winner determination, critical
//! value payments, the dual-feasibility certificate and the approximation
//! bound that certificate implies.
//!
//! Bids are ranked by normalised value `q / s`, where `q = tau * eps - v` and
//! `s = eta_b * b + eta_a * A`. Each user competes with its single best bid
//! (largest `q`). Admission stops at the first bid that does not fit.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{AuctionInstance, Bid, SystemConfig};

/// `eta_b * b + eta_a * A`.
pub fn weighted_size(bid: &Bid, config: &SystemConfig) -> f64 {
    config.eta_b * f64::from(bid.subchannels) + config.eta_a * f64::from(bid.antennas)
}

/// Buyer satisfaction `tau * eps`.
pub fn satisfaction(bid: &Bid, config: &SystemConfig) -> f64 {
    config.tau * bid.accuracy
}

/// Bid value `q = tau * eps - v`; may be negative.
pub fn bid_value(bid: &Bid, config: &SystemConfig) -> f64 {
    satisfaction(bid, config) - bid.claimed_cost
}

/// Dual solution built alongside the greedy allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    /// One per user; the winning value for winners, zero otherwise.
    pub y: Vec<f64>,
    /// Price of a subchannel.
    pub z: f64,
    /// Price of an antenna.
    pub t: f64,
}

impl Duals {
    /// Dual objective `sum y + z B_max + t A_max`.
    pub fn objective(&self, config: &SystemConfig) -> f64 {
        self.y.iter().sum::<f64>()
            + self.z * f64::from(config.b_max)
            + self.t * f64::from(config.a_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Per user (by position in the instance): position of the winning bid.
    pub assignment: Vec<Option<usize>>,
    /// User positions in admission order.
    pub order: Vec<usize>,
    pub welfare: f64,
    pub duals: Duals,
    /// Value-per-size of the admitted set.
    pub psi: f64,
    pub psi_bar: f64,
    pub kappa: f64,
    pub used_b: u32,
    pub used_a: u32,
}

impl Allocation {
    pub fn winners(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(k, a)| a.map(|i| (k, i)))
    }

    pub fn num_winners(&self) -> usize {
        self.assignment.iter().flatten().count()
    }
}

/// A user's entry into the greedy queue.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    user: usize,
    bid: usize,
    value: f64,
    size: f64,
}

impl Candidate {
    fn density(&self) -> f64 {
        self.value / self.size
    }
}

/// Best positive-value bid per user, in ranking order.
fn ranked_candidates(instance: &AuctionInstance) -> (Vec<Candidate>, f64) {
    let cfg = &instance.config;
    let mut kappa: f64 = 1.0;
    let mut candidates = Vec::new();
    for (k, bids) in instance.bids.iter().enumerate() {
        let positive: Vec<(usize, f64, f64)> = bids
            .iter()
            .enumerate()
            .map(|(i, b)| (i, bid_value(b, cfg), weighted_size(b, cfg)))
            .filter(|&(_, q, _)| q > 0.0)
            .collect();
        if positive.is_empty() {
            continue;
        }
        let smallest = positive.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
        let largest = positive.iter().map(|p| p.2).fold(0.0, f64::max);
        kappa = kappa.max(largest / smallest);

        // Largest value; ties go to the smaller bid index.
        let &(bid, value, size) = positive
            .iter()
            .max_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| bids[b.0].index.cmp(&bids[a.0].index))
            })
            .expect("nonempty");
        candidates.push(Candidate {
            user: k,
            bid,
            value,
            size,
        });
    }
    candidates.sort_by(|a, b| {
        b.density()
            .partial_cmp(&a.density())
            .unwrap_or(Ordering::Equal)
            .then_with(|| instance.users[a.user].id.cmp(&instance.users[b.user].id))
            .then_with(|| {
                instance.bids[a.user][a.bid]
                    .index
                    .cmp(&instance.bids[b.user][b.bid].index)
            })
    });
    (candidates, kappa)
}

/// Primal-dual greedy winner determination.
pub fn greedy_allocate(instance: &AuctionInstance) -> Allocation {
    let cfg = &instance.config;
    let n = instance.users.len();
    let (candidates, kappa) = ranked_candidates(instance);

    let mut assignment = vec![None; n];
    let mut order = Vec::new();
    let mut y = vec![0.0; n];
    let (mut used_b, mut used_a) = (0u32, 0u32);
    let (mut value_sum, mut size_sum) = (0.0, 0.0);
    for c in &candidates {
        let bid = &instance.bids[c.user][c.bid];
        if used_b + bid.subchannels > cfg.b_max || used_a + bid.antennas > cfg.a_max {
            break;
        }
        used_b += bid.subchannels;
        used_a += bid.antennas;
        assignment[c.user] = Some(c.bid);
        order.push(c.user);
        y[c.user] = c.value;
        value_sum += c.value;
        size_sum += c.size;
    }

    let psi = if size_sum > 0.0 {
        value_sum / size_sum
    } else {
        0.0
    };
    let psi_bar = kappa * psi;
    Allocation {
        assignment,
        order,
        welfare: value_sum,
        duals: Duals {
            y,
            z: cfg.eta_b * psi_bar,
            t: cfg.eta_a * psi_bar,
        },
        psi,
        psi_bar,
        kappa,
        used_b,
        used_a,
    }
}

/// How the critical value of a winner is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentRule {
    /// Highest normalised value among the losers of the auction re-run
    /// without the winner (zero if nobody loses).
    #[default]
    DisplacedLoser,
    /// Smallest normalised value at which the winner's selected bundle still
    /// wins against the re-run without it: it must be ranked ahead of the
    /// first loser and fit after everyone ranked ahead of it.
    ExactCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payment {
    pub user: usize,
    pub bid: usize,
    /// g = chi - threshold * s.
    pub amount: f64,
    /// g minus the seller's true cost.
    pub utility: f64,
    /// Critical normalised value.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentResult {
    pub payments: Vec<Payment>,
    /// Per user; zero for losers.
    pub utilities: Vec<f64>,
}

impl PaymentResult {
    pub fn total(&self) -> f64 {
        self.payments.iter().map(|p| p.amount).sum()
    }
}

/// Critical-value payments with [`PaymentRule::DisplacedLoser`].
pub fn critical_payments(instance: &AuctionInstance, allocation: &Allocation) -> PaymentResult {
    critical_payments_with(
        instance,
        allocation,
        PaymentRule::DisplacedLoser,
        &mut greedy_allocate,
    )
}

/// Payments with an explicit rule and allocator; the allocator is invoked
/// exactly once per winner.
pub fn critical_payments_with(
    instance: &AuctionInstance,
    allocation: &Allocation,
    rule: PaymentRule,
    allocate: &mut dyn FnMut(&AuctionInstance) -> Allocation,
) -> PaymentResult {
    let cfg = &instance.config;
    let mut utilities = vec![0.0; instance.users.len()];
    let mut payments = Vec::with_capacity(allocation.order.len());
    for (user, bid_pos) in allocation.winners() {
        let reduced = instance.without_user(user);
        let rerun = allocate(&reduced);
        let bid = &instance.bids[user][bid_pos];
        let threshold = match rule {
            PaymentRule::DisplacedLoser => highest_losing_density(&reduced, &rerun),
            PaymentRule::ExactCritical => exact_threshold(&reduced, &rerun, bid),
        };
        let amount = satisfaction(bid, cfg) - threshold * weighted_size(bid, cfg);
        let utility = amount - bid.true_cost();
        utilities[user] = utility;
        payments.push(Payment {
            user,
            bid: bid_pos,
            amount,
            utility,
            threshold,
        });
    }
    PaymentResult {
        payments,
        utilities,
    }
}

/// Largest normalised value among candidates that did not win.
fn highest_losing_density(instance: &AuctionInstance, allocation: &Allocation) -> f64 {
    let (candidates, _) = ranked_candidates(instance);
    candidates
        .iter()
        .filter(|c| allocation.assignment[c.user].is_none())
        .map(Candidate::density)
        .fold(0.0, f64::max)
}

fn exact_threshold(instance: &AuctionInstance, allocation: &Allocation, bid: &Bid) -> f64 {
    let cfg = &instance.config;
    let loser = highest_losing_density(instance, allocation);
    // Walk the re-run's winners in admission order; the bid must be ranked
    // ahead of the first one after which it no longer fits.
    let (mut used_b, mut used_a) = (0u32, 0u32);
    for &user in &allocation.order {
        let winner = &instance.bids[user][allocation.assignment[user].expect("winner")];
        used_b += winner.subchannels;
        used_a += winner.antennas;
        if used_b + bid.subchannels > cfg.b_max || used_a + bid.antennas > cfg.a_max {
            let density = bid_value(winner, cfg) / weighted_size(winner, cfg);
            return density.max(loser);
        }
    }
    loser
}

/// Outcome of checking the greedy duals against the dual of the LP relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub feasible: bool,
    /// Largest shortfall `q - (y + z b + t A)`, or the most negative dual.
    pub worst_violation: f64,
    /// `(user position, bid position)` of the worst bid constraint, if violated.
    pub violating: Option<(usize, usize)>,
}

/// Check `y_n + z b_ni + t A_ni >= q_ni` for every bid and nonnegativity of
/// all duals.
pub fn dual_feasible(
    instance: &AuctionInstance,
    allocation: &Allocation,
    tol: f64,
) -> DualCertificate {
    let cfg = &instance.config;
    let d = &allocation.duals;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    for (k, bids) in instance.bids.iter().enumerate() {
        for (i, bid) in bids.iter().enumerate() {
            let cover = d.y[k] + d.z * f64::from(bid.subchannels) + d.t * f64::from(bid.antennas);
            let shortfall = bid_value(bid, cfg) - cover;
            if shortfall > worst {
                worst = shortfall;
                worst_at = Some((k, i));
            }
        }
    }
    let sign =
        d.y.iter()
            .copied()
            .chain([d.z, d.t])
            .fold(0.0f64, |acc, v| acc.max(-v));
    let bids_ok = worst <= tol;
    let signs_ok = sign <= tol;
    DualCertificate {
        feasible: bids_ok && signs_ok,
        worst_violation: worst.max(sign).max(0.0),
        violating: if bids_ok { None } else { worst_at },
    }
}

/// Worst-case ratio `1 + kappa * U / (U - S)` with `U = eta_b B_max + eta_a A_max`
/// and `S` the largest bid size.
pub fn approx_bound(instance: &AuctionInstance, allocation: &Allocation) -> Result<f64> {
    let cfg = &instance.config;
    let upsilon = cfg.weighted_capacity();
    let max_size = instance
        .all_bids()
        .map(|(_, b)| weighted_size(b, cfg))
        .fold(0.0, f64::max);
    bound_formula(allocation.kappa, upsilon, max_size)
}

pub fn bound_formula(kappa: f64, upsilon: f64, max_size: f64) -> Result<f64> {
    if upsilon <= max_size {
        return Err(Error::BoundUndefined { upsilon, max_size });
    }
    Ok(1.0 + kappa * upsilon / (upsilon - max_size))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub welfare: f64,
    pub total_payments: f64,
    /// Per user; zero for losers.
    pub utilities: Vec<f64>,
    pub winners: usize,
    pub utilization_b: f64,
    pub utilization_a: f64,
    pub winner_fraction: f64,
}

pub fn allocation_report(
    instance: &AuctionInstance,
    allocation: &Allocation,
    payments: &PaymentResult,
) -> AllocationReport {
    let cfg = &instance.config;
    let n = instance.users.len();
    let winners = allocation.num_winners();
    AllocationReport {
        welfare: allocation.welfare,
        total_payments: payments.total(),
        utilities: payments.utilities.clone(),
        winners,
        utilization_b: f64::from(allocation.used_b) / f64::from(cfg.b_max),
        utilization_a: f64::from(allocation.used_a) / f64::from(cfg.a_max),
        winner_fraction: if n == 0 {
            0.0
        } else {
            winners as f64 / n as f64
        },
    }
}
