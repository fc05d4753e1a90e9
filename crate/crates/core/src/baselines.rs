//! Reference mechanisms for the winner-determination program: the exact
//! integral optimum, the LP relaxation, the welfare floor implied by the
//! approximation bound, and a posted-price first-come-first-served scheme.

use serde::{Deserialize, Serialize};

use crate::auction::{approx_bound, bid_value, greedy_allocate, Allocation};
use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::model::AuctionInstance;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub welfare: f64,
    /// Per user position: position of the chosen bid.
    pub assignment: Vec<Option<usize>>,
    pub nodes: u64,
}

/// One bid that can take part in an optimal assignment.
#[derive(Debug, Clone, Copy)]
struct Item {
    bid: usize,
    value: f64,
    b: u32,
    a: u32,
}

struct Search<'a> {
    groups: &'a [(usize, Vec<Item>)],
    /// suffix sums of each group's best value
    optimistic: Vec<f64>,
    b_max: u32,
    a_max: u32,
    budget: u64,
    nodes: u64,
    best: f64,
    best_choice: Vec<Option<usize>>,
    choice: Vec<Option<usize>>,
}

impl Search<'_> {
    fn residual_lp(&self, from: usize, rem_b: u32, rem_a: u32) -> f64 {
        let mut c = Vec::new();
        let mut owner = Vec::new();
        let mut cols_b = Vec::new();
        let mut cols_a = Vec::new();
        for (g, (_, items)) in self.groups[from..].iter().enumerate() {
            for it in items.iter().filter(|it| it.b <= rem_b && it.a <= rem_a) {
                c.push(it.value);
                owner.push(g);
                cols_b.push(f64::from(it.b));
                cols_a.push(f64::from(it.a));
            }
        }
        if c.is_empty() {
            return 0.0;
        }
        let groups = self.groups.len() - from;
        let mut rows = vec![cols_b, cols_a];
        let mut rhs = vec![f64::from(rem_b), f64::from(rem_a)];
        for g in 0..groups {
            rows.push(
                owner
                    .iter()
                    .map(|&o| if o == g { 1.0 } else { 0.0 })
                    .collect(),
            );
            rhs.push(1.0);
        }
        match lp::maximize(&c, &rows, &rhs) {
            LpOutcome::Optimal(s) => s.objective,
            LpOutcome::Unbounded => unreachable!("bounded by the user rows"),
        }
    }

    fn prune(&self, bound: f64) -> bool {
        // Keep ties and near-ties alive so rounding in the LP cannot hide a
        // strictly better assignment.
        bound < self.best - 1e-9 * self.best.abs().max(1.0)
    }

    fn dfs(&mut self, k: usize, rem_b: u32, rem_a: u32, value: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::ExactBudgetExceeded {
                budget: self.budget,
            });
        }
        if k == self.groups.len() {
            if value > self.best {
                self.best = value;
                self.best_choice.clone_from(&self.choice);
            }
            return Ok(());
        }
        if self.prune(value + self.optimistic[k]) {
            return Ok(());
        }
        if self.prune(value + self.residual_lp(k, rem_b, rem_a)) {
            return Ok(());
        }
        let items = self.groups[k].1.clone();
        for it in items {
            if it.b <= rem_b && it.a <= rem_a {
                self.choice[k] = Some(it.bid);
                self.dfs(k + 1, rem_b - it.b, rem_a - it.a, value + it.value)?;
            }
        }
        self.choice[k] = None;
        self.dfs(k + 1, rem_b, rem_a, value)
    }
}

/// Exact optimum by depth-first branch and bound over per-user choices,
/// pruned with the LP relaxation of the residual problem.
pub fn exact_optimal(instance: &AuctionInstance) -> Result<ExactSolution> {
    exact_optimal_with_budget(instance, DEFAULT_NODE_BUDGET)
}

pub fn exact_optimal_with_budget(instance: &AuctionInstance, budget: u64) -> Result<ExactSolution> {
    let cfg = &instance.config;
    let mut groups: Vec<(usize, Vec<Item>)> = instance
        .bids
        .iter()
        .enumerate()
        .map(|(k, bids)| {
            let mut items: Vec<Item> = bids
                .iter()
                .enumerate()
                .map(|(i, b)| Item {
                    bid: i,
                    value: bid_value(b, cfg),
                    b: b.subchannels,
                    a: b.antennas,
                })
                .filter(|it| it.value > 0.0 && it.b <= cfg.b_max && it.a <= cfg.a_max)
                .collect();
            items.sort_by(|x, y| y.value.total_cmp(&x.value));
            (k, items)
        })
        .filter(|(_, items)| !items.is_empty())
        .collect();
    // Dense users first: good incumbents early.
    let best_density = |items: &[Item]| {
        items
            .iter()
            .map(|it| it.value / (cfg.eta_b * f64::from(it.b) + cfg.eta_a * f64::from(it.a)))
            .fold(0.0, f64::max)
    };
    groups.sort_by(|x, y| best_density(&y.1).total_cmp(&best_density(&x.1)));

    let mut optimistic = vec![0.0; groups.len() + 1];
    for g in (0..groups.len()).rev() {
        optimistic[g] = optimistic[g + 1] + groups[g].1[0].value;
    }

    // Greedy incumbent.
    let greedy = greedy_allocate(instance);
    let incumbent: Vec<Option<usize>> = groups.iter().map(|(k, _)| greedy.assignment[*k]).collect();

    let mut search = Search {
        groups: &groups,
        optimistic,
        b_max: cfg.b_max,
        a_max: cfg.a_max,
        budget,
        nodes: 0,
        best: greedy.welfare,
        best_choice: incumbent,
        choice: vec![None; groups.len()],
    };
    search.dfs(0, search.b_max, search.a_max, 0.0)?;

    let mut assignment = vec![None; instance.users.len()];
    for ((k, _), choice) in groups.iter().zip(&search.best_choice) {
        assignment[*k] = *choice;
    }
    Ok(ExactSolution {
        welfare: assignment_welfare(instance, &assignment),
        assignment,
        nodes: search.nodes,
    })
}

/// Sum of bid values over an assignment, accumulated in user order.
pub fn assignment_welfare(instance: &AuctionInstance, assignment: &[Option<usize>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(k, a)| a.map(|i| bid_value(&instance.bids[k][i], &instance.config)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRelaxation {
    pub welfare: f64,
    /// `x[k][i]` for every bid of every user.
    pub x: Vec<Vec<f64>>,
}

/// Optimum of the LP relaxation `0 <= x <= 1`.
pub fn lp_relaxation(instance: &AuctionInstance) -> LpRelaxation {
    let cfg = &instance.config;
    let mut x: Vec<Vec<f64>> = instance.bids.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut cols = Vec::new();
    for (k, bids) in instance.bids.iter().enumerate() {
        for (i, bid) in bids.iter().enumerate() {
            // nonpositive columns are zero at some optimum
            if bid_value(bid, cfg) > 0.0 {
                cols.push((k, i));
            }
        }
    }
    if cols.is_empty() {
        return LpRelaxation { welfare: 0.0, x };
    }
    let bid = |&(k, i): &(usize, usize)| &instance.bids[k][i];
    let c: Vec<f64> = cols.iter().map(|ki| bid_value(bid(ki), cfg)).collect();
    let mut rows = vec![
        cols.iter()
            .map(|ki| f64::from(bid(ki).subchannels))
            .collect::<Vec<_>>(),
        cols.iter().map(|ki| f64::from(bid(ki).antennas)).collect(),
    ];
    let mut rhs = vec![f64::from(cfg.b_max), f64::from(cfg.a_max)];
    let users: Vec<usize> = {
        let mut u: Vec<usize> = cols.iter().map(|&(k, _)| k).collect();
        u.dedup();
        u
    };
    for &user in &users {
        rows.push(
            cols.iter()
                .map(|&(k, _)| if k == user { 1.0 } else { 0.0 })
                .collect(),
        );
        rhs.push(1.0);
    }
    let LpOutcome::Optimal(sol) = lp::maximize(&c, &rows, &rhs) else {
        unreachable!("bounded by the user rows");
    };
    for (&(k, i), &v) in cols.iter().zip(&sol.x) {
        x[k][i] = v.min(1.0);
    }
    LpRelaxation {
        welfare: sol.objective,
        x,
    }
}

/// `OP_f / alpha`: the welfare the greedy allocation is guaranteed to reach.
pub fn welfare_lower_bound(instance: &AuctionInstance, allocation: &Allocation) -> Result<f64> {
    let alpha = approx_bound(instance, allocation)?;
    Ok(lp_relaxation(instance).welfare / alpha)
}

/// Price-vector family of the posted-price scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceShape {
    Linear,
    Sublinear,
    Superlinear,
}

impl PriceShape {
    pub const ALL: [PriceShape; 3] = [
        PriceShape::Linear,
        PriceShape::Sublinear,
        PriceShape::Superlinear,
    ];

    pub fn exponent(self) -> f64 {
        match self {
            PriceShape::Linear => 1.0,
            PriceShape::Sublinear => 0.85,
            PriceShape::Superlinear => 1.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPriceConfig {
    pub base_price: f64,
    pub shape: PriceShape,
}

impl FixedPriceConfig {
    /// `(f_b, f_a)` = `f_o * eta^exponent` per resource.
    pub fn prices(&self, config: &crate::model::SystemConfig) -> (f64, f64) {
        let e = self.shape.exponent();
        (
            self.base_price * config.eta_b.powf(e),
            self.base_price * config.eta_a.powf(e),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPriceOutcome {
    pub welfare: f64,
    pub assignment: Vec<Option<usize>>,
    /// Price charged to each user (zero for those served nothing).
    pub payments: Vec<f64>,
    pub used_b: u32,
    pub used_a: u32,
}

/// Posted prices, first come first served in instance order.
pub fn fixed_price_allocate(
    instance: &AuctionInstance,
    fp: &FixedPriceConfig,
) -> FixedPriceOutcome {
    let order: Vec<usize> = (0..instance.users.len()).collect();
    fixed_price_allocate_in_order(instance, fp, &order)
}

/// Posted prices with users arriving in `order` (positions into the
/// instance). Each arriving user takes its first bid, in index order, whose
/// value covers the posted price of its bundle and which still fits.
pub fn fixed_price_allocate_in_order(
    instance: &AuctionInstance,
    fp: &FixedPriceConfig,
    order: &[usize],
) -> FixedPriceOutcome {
    let cfg = &instance.config;
    let (f_b, f_a) = fp.prices(cfg);
    let n = instance.users.len();
    let mut assignment = vec![None; n];
    let mut payments = vec![0.0; n];
    let (mut used_b, mut used_a) = (0u32, 0u32);
    let mut welfare = 0.0;
    for &k in order {
        let mut bids: Vec<(usize, &crate::model::Bid)> =
            instance.bids[k].iter().enumerate().collect();
        bids.sort_by_key(|(_, b)| b.index);
        for (i, bid) in bids {
            let price = f64::from(bid.subchannels) * f_b + f64::from(bid.antennas) * f_a;
            let value = bid_value(bid, cfg);
            if value >= price
                && used_b + bid.subchannels <= cfg.b_max
                && used_a + bid.antennas <= cfg.a_max
            {
                used_b += bid.subchannels;
                used_a += bid.antennas;
                assignment[k] = Some(i);
                payments[k] = price;
                welfare += value;
                break;
            }
        }
    }
    FixedPriceOutcome {
        welfare,
        assignment,
        payments,
        used_b,
        used_a,
    }
}
