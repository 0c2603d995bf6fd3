//! Checkpoint selection from run logs: correlations, ζ-filtering and the
//! four-region partition by training accuracy and susceptibility.

mod regions;
mod report;
mod stats;

pub use regions::{filter_by_zeta, partition, region_summary, Region, RegionPartition, RegionSummary, ThresholdRule, ZetaThreshold};
pub use report::{selection_report, Correlation, SelectionReport, Thresholds};
pub use stats::{kendall_tau, pearson, percentile};
