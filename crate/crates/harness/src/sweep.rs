//! Experiment sweeps. Every sweep point and repetition yields one instance;
//! every selected scheme yields one CSV row per instance (posted-price
//! schemes one row per base price). Rows come back ordered by sweep index
//! regardless of which worker finished first.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fl_auction::auction::{approx_bound, critical_payments_with, greedy_allocate, PaymentRule};
use fl_auction::baselines::{
    exact_optimal_with_budget, fixed_price_allocate_in_order, lp_relaxation, FixedPriceConfig,
    PriceShape,
};
use fl_auction::model::AuctionInstance;

use crate::config::{EtaSetting, ExperimentConfig};
use crate::generate::{arrival_order, generate_instance, Scenario};

/// Written into the first column of every row.
pub const SCHEMA: &str = "flauction-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Greedy,
    Exact,
    Lpr,
    LowerBound,
    FixedLinear,
    FixedSublinear,
    FixedSuperlinear,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Greedy,
        Scheme::Exact,
        Scheme::Lpr,
        Scheme::LowerBound,
        Scheme::FixedLinear,
        Scheme::FixedSublinear,
        Scheme::FixedSuperlinear,
    ];

    pub fn price_shape(self) -> Option<PriceShape> {
        match self {
            Scheme::FixedLinear => Some(PriceShape::Linear),
            Scheme::FixedSublinear => Some(PriceShape::Sublinear),
            Scheme::FixedSuperlinear => Some(PriceShape::Superlinear),
            _ => None,
        }
    }
}

/// One CSV record. Empty cells mean "not applicable" (or, for `exact`, that
/// the solver gave up within its node budget).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub schema: String,
    pub seed: u64,
    pub sweep_key: String,
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    pub eta_a: f64,
    pub eta_b: f64,
    pub f_o: Option<f64>,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub welfare: Option<f64>,
    pub payments: Option<f64>,
    #[serde(rename = "util_B")]
    pub util_b: Option<f64>,
    #[serde(rename = "util_A")]
    pub util_a: Option<f64>,
    pub winner_frac: Option<f64>,
    pub alpha: Option<f64>,
    pub runtime_ms: f64,
}

/// A point of the cartesian sweep `users x etas x deadlines`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub scenario: Scenario,
}

impl SweepPoint {
    pub fn key(&self) -> String {
        format!(
            "n={};eta_a={};eta_b={};t_max={}",
            self.scenario.users,
            self.scenario.eta.eta_a,
            self.scenario.eta.eta_b,
            self.scenario.t_max
        )
    }
}

pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for &users in &config.users {
        for &eta in &config.etas {
            for &t_max in &config.deadlines {
                points.push(SweepPoint {
                    index: points.len(),
                    scenario: Scenario { users, eta, t_max },
                });
            }
        }
    }
    points
}

/// Seed of repetition `rep`; shared by every sweep point so that points are
/// compared on common random draws.
pub fn repetition_seed(config: &ExperimentConfig, rep: usize) -> u64 {
    config.seed.wrapping_add(rep as u64)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

struct RowBase<'a> {
    seed: u64,
    key: &'a str,
    n: usize,
    eta: EtaSetting,
    t_max: f64,
}

impl RowBase<'_> {
    fn row(&self, scheme: Scheme) -> Row {
        Row {
            schema: SCHEMA.to_owned(),
            seed: self.seed,
            sweep_key: self.key.to_owned(),
            scheme,
            n: self.n,
            eta_a: self.eta.eta_a,
            eta_b: self.eta.eta_b,
            f_o: None,
            t_max: self.t_max,
            welfare: None,
            payments: None,
            util_b: None,
            util_a: None,
            winner_frac: None,
            alpha: None,
            runtime_ms: 0.0,
        }
    }
}

/// Resource usage and winner share of an integral assignment.
fn usage(instance: &AuctionInstance, assignment: &[Option<usize>]) -> (f64, f64, f64) {
    let cfg = &instance.config;
    let (mut b, mut a, mut winners) = (0u32, 0u32, 0usize);
    for (k, choice) in assignment.iter().enumerate() {
        if let Some(i) = choice {
            b += instance.bids[k][*i].subchannels;
            a += instance.bids[k][*i].antennas;
            winners += 1;
        }
    }
    let n = instance.users.len().max(1) as f64;
    (
        f64::from(b) / f64::from(cfg.b_max),
        f64::from(a) / f64::from(cfg.a_max),
        winners as f64 / n,
    )
}

/// All rows of one instance, in scheme order then base-price order.
pub fn evaluate_instance(
    config: &ExperimentConfig,
    point: &SweepPoint,
    seed: u64,
    instance: &AuctionInstance,
    rule: PaymentRule,
) -> Vec<Row> {
    let key = point.key();
    let base = RowBase {
        seed,
        key: &key,
        n: point.scenario.users,
        eta: point.scenario.eta,
        t_max: point.scenario.t_max,
    };
    let cfg = &instance.config;
    let mut rows = Vec::new();

    let start = Instant::now();
    let allocation = greedy_allocate(instance);
    let greedy_ms = elapsed_ms(start);
    let alpha = approx_bound(instance, &allocation).ok();

    for &scheme in &config.schemes {
        match scheme {
            Scheme::Greedy => {
                let start = Instant::now();
                let payments =
                    critical_payments_with(instance, &allocation, rule, &mut greedy_allocate);
                let (ub, ua, wf) = usage(instance, &allocation.assignment);
                rows.push(Row {
                    welfare: Some(allocation.welfare),
                    payments: Some(payments.total()),
                    util_b: Some(ub),
                    util_a: Some(ua),
                    winner_frac: Some(wf),
                    alpha,
                    runtime_ms: greedy_ms + elapsed_ms(start),
                    ..base.row(scheme)
                });
            }
            Scheme::Exact => {
                if point.scenario.users > config.exact_max_users {
                    continue;
                }
                let start = Instant::now();
                let mut row = base.row(scheme);
                if let Ok(sol) = exact_optimal_with_budget(instance, config.exact_node_budget) {
                    let (ub, ua, wf) = usage(instance, &sol.assignment);
                    row.welfare = Some(sol.welfare);
                    row.util_b = Some(ub);
                    row.util_a = Some(ua);
                    row.winner_frac = Some(wf);
                }
                row.alpha = alpha;
                row.runtime_ms = elapsed_ms(start);
                rows.push(row);
            }
            Scheme::Lpr | Scheme::LowerBound => {
                let start = Instant::now();
                let lp = lp_relaxation(instance);
                let mut row = base.row(scheme);
                row.alpha = alpha;
                if scheme == Scheme::Lpr {
                    let (mut b, mut a, mut w) = (0.0, 0.0, 0.0);
                    for (bids, xs) in instance.bids.iter().zip(&lp.x) {
                        for (bid, x) in bids.iter().zip(xs) {
                            b += x * f64::from(bid.subchannels);
                            a += x * f64::from(bid.antennas);
                            w += x;
                        }
                    }
                    row.welfare = Some(lp.welfare);
                    row.util_b = Some(b / f64::from(cfg.b_max));
                    row.util_a = Some(a / f64::from(cfg.a_max));
                    row.winner_frac = Some(w / instance.users.len().max(1) as f64);
                } else {
                    row.welfare = alpha.map(|al| lp.welfare / al);
                }
                row.runtime_ms = elapsed_ms(start);
                rows.push(row);
            }
            Scheme::FixedLinear | Scheme::FixedSublinear | Scheme::FixedSuperlinear => {
                let shape = scheme.price_shape().expect("posted-price scheme");
                let order = arrival_order(seed, instance.users.len());
                for &f_o in &config.base_prices {
                    let start = Instant::now();
                    let fp = FixedPriceConfig {
                        base_price: f_o,
                        shape,
                    };
                    let out = fixed_price_allocate_in_order(instance, &fp, &order);
                    let (ub, ua, wf) = usage(instance, &out.assignment);
                    rows.push(Row {
                        f_o: Some(f_o),
                        welfare: Some(out.welfare),
                        payments: Some(out.payments.iter().sum()),
                        util_b: Some(ub),
                        util_a: Some(ua),
                        winner_frac: Some(wf),
                        runtime_ms: elapsed_ms(start),
                        ..base.row(scheme)
                    });
                }
            }
        }
    }
    rows
}

/// Runs the whole sweep on the global rayon pool.
pub fn run_sweep(config: &ExperimentConfig) -> anyhow::Result<Vec<Row>> {
    config.validate()?;
    let tasks: Vec<(SweepPoint, usize)> = sweep_points(config)
        .into_iter()
        .flat_map(|p| (0..config.repetitions).map(move |rep| (p, rep)))
        .collect();
    let chunks: Vec<anyhow::Result<Vec<Row>>> = tasks
        .par_iter()
        .map(|(point, rep)| {
            let seed = repetition_seed(config, *rep);
            let instance = generate_instance(config, &point.scenario, seed)?;
            Ok(evaluate_instance(
                config,
                point,
                seed,
                &instance,
                config.payment_rule,
            ))
        })
        .collect();
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], out: W) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> anyhow::Result<Vec<Row>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: Row = record?;
        anyhow::ensure!(
            row.schema == SCHEMA,
            "unsupported schema tag {:?}",
            row.schema
        );
        rows.push(row);
    }
    Ok(rows)
}
