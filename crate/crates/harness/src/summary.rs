//! Mean-over-seeds aggregation of sweep rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sweep::{Row, Scheme, SCHEMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema: String,
    pub sweep_key: String,
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    pub eta_a: f64,
    pub eta_b: f64,
    pub f_o: Option<f64>,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    /// Rows in the group.
    pub count: usize,
    pub welfare: Option<f64>,
    pub welfare_std: Option<f64>,
    pub payments: Option<f64>,
    #[serde(rename = "util_B")]
    pub util_b: Option<f64>,
    #[serde(rename = "util_A")]
    pub util_a: Option<f64>,
    pub winner_frac: Option<f64>,
    pub alpha: Option<f64>,
    pub runtime_ms: f64,
}

/// Mean of the present values; `None` when every value is missing.
fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Sample standard deviation of the present values.
fn std_dev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Some(var.sqrt())
}

/// Groups rows by sweep point, scheme and base price, keeping first-seen order.
pub fn summarize(rows: &[Row]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, Scheme, Option<u64>)> = Vec::new();
    let mut groups: BTreeMap<(String, Scheme, Option<u64>), Vec<&Row>> = BTreeMap::new();
    for row in rows {
        let key = (row.sweep_key.clone(), row.scheme, row.f_o.map(f64::to_bits));
        let entry = groups.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(row);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            let first = group[0];
            let welfare: Vec<f64> = group.iter().filter_map(|r| r.welfare).collect();
            SummaryRow {
                schema: SCHEMA.to_owned(),
                sweep_key: first.sweep_key.clone(),
                scheme: first.scheme,
                n: first.n,
                eta_a: first.eta_a,
                eta_b: first.eta_b,
                f_o: first.f_o,
                t_max: first.t_max,
                count: group.len(),
                welfare: mean(group.iter().map(|r| r.welfare)),
                welfare_std: std_dev(&welfare),
                payments: mean(group.iter().map(|r| r.payments)),
                util_b: mean(group.iter().map(|r| r.util_b)),
                util_a: mean(group.iter().map(|r| r.util_a)),
                winner_frac: mean(group.iter().map(|r| r.winner_frac)),
                alpha: mean(group.iter().map(|r| r.alpha)),
                runtime_ms: group.iter().map(|r| r.runtime_ms).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], out: W) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
