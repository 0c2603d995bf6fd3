use serde::{Deserialize, Serialize};

use super::regions::{partition, region_summary, RegionSummary, ThresholdRule};
use super::stats::{kendall_tau, pearson};
use crate::error::Result;
use crate::record::CheckpointRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub rule: ThresholdRule,
    pub zeta: f64,
    pub train_acc: f64,
}

/// Correlation of one metric with test accuracy; `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub metric: String,
    pub pearson: Option<f64>,
    pub kendall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub records: usize,
    pub runs: usize,
    pub blind: bool,
    pub thresholds: Thresholds,
    pub regions: Vec<RegionSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub correlations: Vec<Correlation>,
}

type Metric = fn(&CheckpointRecord) -> f64;

/// Partitions `records` and summarizes each region. In blind mode no test
/// accuracy statistic of any kind enters the report.
pub fn selection_report(records: &[CheckpointRecord], rule: ThresholdRule, blind: bool) -> Result<SelectionReport> {
    let part = partition(records, rule)?;
    let mut regions = region_summary(&part, records);
    let mut correlations = Vec::new();
    if blind {
        for r in &mut regions {
            r.test_acc_mean = None;
            r.test_acc_std = None;
        }
    } else {
        let with_test: Vec<&CheckpointRecord> = records.iter().filter(|r| r.test_acc.is_some()).collect();
        let test: Vec<f64> = with_test.iter().filter_map(|r| r.test_acc).collect();
        let metrics: [(&str, Metric); 2] = [("train_acc", |r| r.train_acc), ("zeta", |r| r.zeta)];
        for (name, get) in metrics {
            let values: Vec<f64> = with_test.iter().map(|r| get(r)).collect();
            correlations.push(Correlation {
                metric: name.into(),
                pearson: pearson(&values, &test).ok(),
                kendall: kendall_tau(&values, &test).ok(),
            });
        }
    }
    let mut runs: Vec<&str> = records.iter().map(|r| r.run_id.as_str()).collect();
    runs.sort_unstable();
    runs.dedup();
    Ok(SelectionReport {
        records: records.len(),
        runs: runs.len(),
        blind,
        thresholds: Thresholds { rule, zeta: part.zeta_threshold, train_acc: part.acc_threshold },
        regions,
        correlations,
    })
}
