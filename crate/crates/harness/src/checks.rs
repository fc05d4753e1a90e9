//! Randomised property suites over generated instances: truthfulness,
//! individual rationality, dual feasibility and the welfare sandwich.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use fl_auction::auction::{
    approx_bound, critical_payments_with, dual_feasible, greedy_allocate, Allocation,
    PaymentResult, PaymentRule,
};
use fl_auction::baselines::{exact_optimal_with_budget, lp_relaxation};
use fl_auction::model::AuctionInstance;

use crate::config::ExperimentConfig;
use crate::generate::{generate_instance, Scenario};

/// Utility gains at or below this are not counted as profitable.
pub const TRUTHFUL_TOL: f64 = 1e-9;
pub const IR_TOL: f64 = 1e-9;
pub const DUAL_TOL: f64 = 1e-9;
pub const SANDWICH_REL_TOL: f64 = 1e-6;
/// Misreport factors are drawn from this range.
pub const MISREPORT_RANGE: (f64, f64) = (0.5, 2.0);

/// Stream of the per-trial generator that picks the deviating bid.
const PICK_STREAM: u64 = u64::MAX - 1;

pub fn trial_seed(config: &ExperimentConfig, trial: usize) -> u64 {
    config.seed.wrapping_add(trial as u64)
}

/// Running tally of dual certificates over greedy allocations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DualAudit {
    pub allocations: usize,
    pub infeasible: usize,
    pub worst_violation: f64,
}

impl DualAudit {
    pub fn passed(&self) -> bool {
        self.infeasible == 0
    }

    /// Greedy allocation with its certificate checked and tallied.
    pub fn allocate(&mut self, instance: &AuctionInstance) -> Allocation {
        let allocation = greedy_allocate(instance);
        let cert = dual_feasible(instance, &allocation, DUAL_TOL);
        self.allocations += 1;
        self.worst_violation = self.worst_violation.max(cert.worst_violation);
        if !cert.feasible {
            self.infeasible += 1;
        }
        allocation
    }

    pub fn merge(&mut self, other: &DualAudit) {
        self.allocations += other.allocations;
        self.infeasible += other.infeasible;
        self.worst_violation = self.worst_violation.max(other.worst_violation);
    }
}

/// Allocation and payments; every greedy run, payment re-runs included, is
/// audited.
pub fn allocate_and_pay(
    instance: &AuctionInstance,
    rule: PaymentRule,
    audit: &mut DualAudit,
) -> (Allocation, PaymentResult) {
    let allocation = audit.allocate(instance);
    let payments = critical_payments_with(instance, &allocation, rule, &mut |i| audit.allocate(i));
    (allocation, payments)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub seed: u64,
    pub user: usize,
    pub bid: usize,
    pub factor: f64,
    pub truthful_utility: f64,
    pub misreport_utility: f64,
}

impl Deviation {
    pub fn advantage(&self) -> f64 {
        self.misreport_utility - self.truthful_utility
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthfulnessReport {
    pub trials: usize,
    /// Trials whose instance had no bids to misreport.
    pub skipped: usize,
    pub max_advantage: f64,
    pub profitable: Vec<Deviation>,
    /// Smallest truthful winner utility seen along the way.
    pub min_truthful_utility: f64,
    pub audit: DualAudit,
}

impl TruthfulnessReport {
    pub fn passed(&self) -> bool {
        self.profitable.is_empty()
    }
}

/// Replaces the claimed cost of one bid by `factor` times its true cost.
pub fn misreport(
    instance: &AuctionInstance,
    user: usize,
    bid: usize,
    factor: f64,
) -> AuctionInstance {
    let mut out = instance.clone();
    let target = &mut out.bids[user][bid];
    target.claimed_cost = factor * target.true_cost();
    out
}

/// One misreport per trial on the config's first sweep point.
pub fn check_truthfulness(
    config: &ExperimentConfig,
    trials: usize,
) -> anyhow::Result<TruthfulnessReport> {
    let scenario = Scenario::first_of(config);
    let mut report = TruthfulnessReport {
        trials,
        skipped: 0,
        max_advantage: f64::NEG_INFINITY,
        profitable: Vec::new(),
        min_truthful_utility: f64::INFINITY,
        audit: DualAudit::default(),
    };
    for trial in 0..trials {
        let seed = trial_seed(config, trial);
        let instance = generate_instance(config, &scenario, seed)?;
        let (allocation, truthful) =
            allocate_and_pay(&instance, config.payment_rule, &mut report.audit);
        for (k, _) in allocation.winners() {
            report.min_truthful_utility = report.min_truthful_utility.min(truthful.utilities[k]);
        }

        let holders: Vec<usize> = (0..instance.bids.len())
            .filter(|&k| !instance.bids[k].is_empty())
            .collect();
        if holders.is_empty() {
            report.skipped += 1;
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PICK_STREAM);
        let user = holders[rng.gen_range(0..holders.len())];
        let bid = rng.gen_range(0..instance.bids[user].len());
        let factor = rng.gen_range(MISREPORT_RANGE.0..=MISREPORT_RANGE.1);

        let lying = misreport(&instance, user, bid, factor);
        let (_, lying_pay) = allocate_and_pay(&lying, config.payment_rule, &mut report.audit);
        let deviation = Deviation {
            seed,
            user,
            bid,
            factor,
            truthful_utility: truthful.utilities[user],
            misreport_utility: lying_pay.utilities[user],
        };
        report.max_advantage = report.max_advantage.max(deviation.advantage());
        if deviation.advantage() > TRUTHFUL_TOL {
            report.profitable.push(deviation);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityReport {
    pub trials: usize,
    pub winners: usize,
    /// `+inf` when no trial produced a winner.
    pub min_utility: f64,
    /// Losers whose utility is not exactly zero.
    pub paid_losers: usize,
    pub audit: DualAudit,
}

impl RationalityReport {
    pub fn passed(&self) -> bool {
        self.min_utility >= -IR_TOL && self.paid_losers == 0
    }
}

pub fn check_individual_rationality(
    config: &ExperimentConfig,
    trials: usize,
) -> anyhow::Result<RationalityReport> {
    let scenario = Scenario::first_of(config);
    let mut report = RationalityReport {
        trials,
        winners: 0,
        min_utility: f64::INFINITY,
        paid_losers: 0,
        audit: DualAudit::default(),
    };
    for trial in 0..trials {
        let instance = generate_instance(config, &scenario, trial_seed(config, trial))?;
        let (allocation, payments) =
            allocate_and_pay(&instance, config.payment_rule, &mut report.audit);
        for (k, u) in payments.utilities.iter().enumerate() {
            if allocation.assignment[k].is_some() {
                report.winners += 1;
                report.min_utility = report.min_utility.min(*u);
            } else if *u != 0.0 {
                report.paid_losers += 1;
            }
        }
    }
    Ok(report)
}

/// Certificates of the greedy allocations at every configured population size.
pub fn check_dual_feasibility(
    config: &ExperimentConfig,
    trials: usize,
) -> anyhow::Result<DualAudit> {
    let mut audit = DualAudit::default();
    for trial in 0..trials {
        for &users in &config.users {
            let scenario = Scenario {
                users,
                ..Scenario::first_of(config)
            };
            let instance = generate_instance(config, &scenario, trial_seed(config, trial))?;
            audit.allocate(&instance);
        }
    }
    Ok(audit)
}

/// Welfare chain of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub seed: u64,
    pub users: usize,
    pub lower_bound: f64,
    pub greedy: f64,
    pub exact: f64,
    pub lpr: f64,
    pub alpha: f64,
}

impl Sandwich {
    pub fn compute(
        instance: &AuctionInstance,
        seed: u64,
        node_budget: u64,
        audit: &mut DualAudit,
    ) -> anyhow::Result<Self> {
        let allocation = audit.allocate(instance);
        let exact = exact_optimal_with_budget(instance, node_budget)?;
        let lpr = lp_relaxation(instance).welfare;
        let alpha = approx_bound(instance, &allocation)?;
        Ok(Self {
            seed,
            users: instance.users.len(),
            lower_bound: lpr / alpha,
            greedy: allocation.welfare,
            exact: exact.welfare,
            lpr,
            alpha,
        })
    }

    /// `lower_bound <= greedy <= exact <= lpr` up to a relative tolerance.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + rel_tol * a.abs().max(b.abs()).max(1.0);
        le(self.lower_bound, self.greedy) && le(self.greedy, self.exact) && le(self.exact, self.lpr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub instances: usize,
    pub failures: Vec<Sandwich>,
    /// Largest observed `lpr / greedy`.
    pub worst_ratio: f64,
    pub audit: DualAudit,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sandwich over every population size in the config that the exact solver
/// is allowed to handle.
pub fn check_sandwich(config: &ExperimentConfig, trials: usize) -> anyhow::Result<SandwichReport> {
    let mut report = SandwichReport {
        instances: 0,
        failures: Vec::new(),
        worst_ratio: 1.0,
        audit: DualAudit::default(),
    };
    let sizes: Vec<usize> = config
        .users
        .iter()
        .copied()
        .filter(|&n| n <= config.exact_max_users)
        .collect();
    for trial in 0..trials {
        for &users in &sizes {
            let seed = trial_seed(config, trial);
            let scenario = Scenario {
                users,
                ..Scenario::first_of(config)
            };
            let instance = generate_instance(config, &scenario, seed)?;
            let s =
                Sandwich::compute(&instance, seed, config.exact_node_budget, &mut report.audit)?;
            report.instances += 1;
            if s.greedy > 0.0 {
                report.worst_ratio = report.worst_ratio.max(s.lpr / s.greedy);
            }
            if !s.holds(SANDWICH_REL_TOL) {
                report.failures.push(s);
            }
        }
    }
    Ok(report)
}
