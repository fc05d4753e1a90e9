//! JSON files: experiment configs, instances and auction results.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use fl_auction::auction::{
    allocation_report, approx_bound, dual_feasible, Allocation, AllocationReport, DualCertificate,
    PaymentResult, PaymentRule,
};
use fl_auction::model::AuctionInstance;

use crate::checks::{allocate_and_pay, DualAudit, DUAL_TOL};
use crate::config::ExperimentConfig;

pub fn read_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

pub fn read_instance(path: &Path) -> anyhow::Result<AuctionInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance: AuctionInstance = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance {}", path.display()))?;
    instance.validate()?;
    Ok(instance)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Everything the `auction` subcommand reports about one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionResult {
    pub payment_rule: PaymentRule,
    pub allocation: Allocation,
    pub payments: PaymentResult,
    pub report: AllocationReport,
    /// Absent when the bound is undefined for this instance.
    pub alpha: Option<f64>,
    pub certificate: DualCertificate,
}

pub fn run_auction(instance: &AuctionInstance, rule: PaymentRule) -> AuctionResult {
    let (allocation, payments) = allocate_and_pay(instance, rule, &mut DualAudit::default());
    AuctionResult {
        payment_rule: rule,
        report: allocation_report(instance, &allocation, &payments),
        alpha: approx_bound(instance, &allocation).ok(),
        certificate: dual_feasible(instance, &allocation, DUAL_TOL),
        allocation,
        payments,
    }
}
