use serde::{Deserialize, Serialize};

use super::stats::percentile;
use crate::error::{invalid, Result};
use crate::record::CheckpointRecord;

/// Quadrant of the (training accuracy, ζ) plane.
///
/// Region 1 is trainable and resistant, Region 2 trainable but susceptible,
/// Region 3 resistant but not trainable, Region 4 neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    One = 1,
    Two = 2,
    Three = 3,
    Four = 4,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::One, Region::Two, Region::Three, Region::Four];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn classify(zeta: f64, train_acc: f64, zeta_threshold: f64, acc_threshold: f64) -> Region {
        match (zeta <= zeta_threshold, train_acc >= acc_threshold) {
            (true, true) => Region::One,
            (false, true) => Region::Two,
            (true, false) => Region::Three,
            (false, false) => Region::Four,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Means of ζ and training accuracy over all records.
    Mean,
    /// The given percentiles (0–100) of ζ and of training accuracy.
    Percentile { zeta: f64, train_acc: f64 },
    Fixed { zeta: f64, train_acc: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub zeta_threshold: f64,
    pub acc_threshold: f64,
    /// Region of each record, in input order.
    pub assignment: Vec<Region>,
}

impl RegionPartition {
    pub fn count(&self, region: Region) -> usize {
        self.assignment.iter().filter(|&&r| r == region).count()
    }

    pub fn members<'a>(&'a self, records: &'a [CheckpointRecord], region: Region) -> impl Iterator<Item = &'a CheckpointRecord> {
        records.iter().zip(&self.assignment).filter(move |(_, &r)| r == region).map(|(rec, _)| rec)
    }
}

pub fn partition(records: &[CheckpointRecord], rule: ThresholdRule) -> Result<RegionPartition> {
    if records.is_empty() {
        return Err(invalid("cannot partition an empty record set"));
    }
    let zetas: Vec<f64> = records.iter().map(|r| r.zeta).collect();
    let accs: Vec<f64> = records.iter().map(|r| r.train_acc).collect();
    let (zeta_threshold, acc_threshold) = match rule {
        ThresholdRule::Mean => {
            let n = records.len() as f64;
            (zetas.iter().sum::<f64>() / n, accs.iter().sum::<f64>() / n)
        }
        ThresholdRule::Percentile { zeta, train_acc } => (percentile(&zetas, zeta)?, percentile(&accs, train_acc)?),
        ThresholdRule::Fixed { zeta, train_acc } => (zeta, train_acc),
    };
    let assignment = records
        .iter()
        .map(|r| Region::classify(r.zeta, r.train_acc, zeta_threshold, acc_threshold))
        .collect();
    Ok(RegionPartition { zeta_threshold, acc_threshold, assignment })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub region: u8,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_acc_mean: Option<f64>,
    /// Population standard deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_acc_std: Option<f64>,
}

/// Count and test-accuracy statistics per region. Records without a test
/// accuracy are counted but do not enter the statistics.
pub fn region_summary(partition: &RegionPartition, records: &[CheckpointRecord]) -> Vec<RegionSummary> {
    Region::ALL
        .iter()
        .map(|&region| {
            let accs: Vec<f64> = partition.members(records, region).filter_map(|r| r.test_acc).collect();
            let (mean, std) = if accs.is_empty() {
                (None, None)
            } else {
                let n = accs.len() as f64;
                let mean = accs.iter().sum::<f64>() / n;
                let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
                (Some(mean), Some(var.sqrt()))
            };
            RegionSummary { region: region.number(), count: partition.count(region), test_acc_mean: mean, test_acc_std: std }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaThreshold {
    Value(f64),
    /// Keep the ⌈N/2⌉ records with the smallest ζ.
    Median,
}

/// Records with ζ at or below the threshold, in input order.
pub fn filter_by_zeta(records: &[CheckpointRecord], threshold: ZetaThreshold) -> Vec<CheckpointRecord> {
    match threshold {
        ZetaThreshold::Value(t) => records.iter().filter(|r| r.zeta <= t).cloned().collect(),
        ZetaThreshold::Median => {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.sort_by(|&i, &j| {
                let (a, b) = (&records[i], &records[j]);
                a.zeta.total_cmp(&b.zeta).then_with(|| a.run_id.cmp(&b.run_id)).then_with(|| a.epoch.cmp(&b.epoch))
            });
            let mut keep = vec![false; records.len()];
            for &i in &order[..records.len().div_ceil(2)] {
                keep[i] = true;
            }
            records.iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r.clone()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn rec(run: &str, epoch: usize, zeta: f64, train_acc: f64, test_acc: Option<f64>) -> CheckpointRecord {
        CheckpointRecord {
            run_id: run.into(),
            epoch,
            lr: 0.1,
            train_loss: 1.0,
            train_acc,
            train_acc_clean: train_acc,
            train_acc_noisy: 0.0,
            test_acc,
            zeta_increment: zeta,
            zeta,
        }
    }

    #[test]
    fn single_record_is_region_one() {
        let p = partition(&[rec("a", 1, 0.3, 0.7, None)], ThresholdRule::Mean).unwrap();
        assert_eq!(p.assignment, vec![Region::One]);
    }

    #[test]
    fn opposite_corners() {
        let rs = [rec("a", 1, 0.0, 1.0, None), rec("a", 2, 1.0, 0.0, None)];
        let p = partition(&rs, ThresholdRule::Mean).unwrap();
        assert_eq!(p.assignment, vec![Region::One, Region::Four]);
        assert!(partition(&[], ThresholdRule::Mean).is_err());
    }

    #[test]
    fn grid_matches_brute_force() {
        let mut rs = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                rs.push(rec("g", i * 10 + j, i as f64 * 0.1, j as f64 * 0.1, None));
            }
        }
        let p = partition(&rs, ThresholdRule::Mean).unwrap();
        let (mz, ma) = (0.45, 0.45);
        let mut counts = [0usize; 4];
        for r in &rs {
            let idx = match (r.zeta <= mz + 1e-12, r.train_acc >= ma - 1e-12) {
                (true, true) => 0,
                (false, true) => 1,
                (true, false) => 2,
                (false, false) => 3,
            };
            counts[idx] += 1;
        }
        assert_eq!(counts, [25, 25, 25, 25]);
        for (k, region) in Region::ALL.iter().enumerate() {
            assert_eq!(p.count(*region), counts[k]);
        }
    }

    #[test]
    fn percentile_thresholds() {
        let rs: Vec<_> = (0..5).map(|i| rec("p", i, i as f64, i as f64 / 4.0, None)).collect();
        let p = partition(&rs, ThresholdRule::Percentile { zeta: 40.0, train_acc: 60.0 }).unwrap();
        assert!((p.zeta_threshold - 1.6).abs() < 1e-12);
        assert!((p.acc_threshold - 0.6).abs() < 1e-12);
    }

    #[test]
    fn summary_one_per_region() {
        let rs = [
            rec("a", 1, 0.0, 1.0, Some(0.9)),
            rec("a", 2, 1.0, 1.0, Some(0.8)),
            rec("a", 3, 0.0, 0.0, Some(0.7)),
            rec("a", 4, 1.0, 0.0, Some(0.6)),
        ];
        let p = partition(&rs, ThresholdRule::Mean).unwrap();
        let s = region_summary(&p, &rs);
        let means: Vec<_> = s.iter().map(|r| r.test_acc_mean.unwrap()).collect();
        assert_eq!(means, vec![0.9, 0.8, 0.7, 0.6]);
        assert!(s.iter().all(|r| r.count == 1 && r.test_acc_std == Some(0.0)));
    }

    #[test]
    fn empty_region_has_no_stats() {
        let rs = [rec("a", 1, 0.5, 0.5, Some(0.4)), rec("a", 2, 0.5, 0.5, Some(0.4))];
        let p = partition(&rs, ThresholdRule::Mean).unwrap();
        let s = region_summary(&p, &rs);
        assert_eq!(s[0].count, 2);
        assert_eq!(s[0].test_acc_std, Some(0.0));
        assert!(s[1..].iter().all(|r| r.count == 0 && r.test_acc_mean.is_none()));
    }

    #[test]
    fn zeta_filter_extremes_and_median_ties() {
        let rs = [rec("b", 1, 0.2, 0.5, None), rec("a", 2, 0.2, 0.5, None), rec("a", 1, 0.1, 0.5, None)];
        assert_eq!(filter_by_zeta(&rs, ZetaThreshold::Value(f64::INFINITY)), rs.to_vec());
        assert!(filter_by_zeta(&rs, ZetaThreshold::Value(f64::NEG_INFINITY)).is_empty());
        let kept = filter_by_zeta(&rs, ZetaThreshold::Median);
        assert_eq!(kept, vec![rs[1].clone(), rs[2].clone()]);
    }

    proptest! {
        #[test]
        fn partition_is_total(points in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..60)) {
            let rs: Vec<_> = points.iter().enumerate().map(|(i, &(z, a))| rec("r", i, z, a, None)).collect();
            let p = partition(&rs, ThresholdRule::Mean).unwrap();
            prop_assert_eq!(p.assignment.len(), rs.len());
            let total: usize = Region::ALL.iter().map(|&r| p.count(r)).sum();
            prop_assert_eq!(total, rs.len());
            let kept = filter_by_zeta(&rs, ZetaThreshold::Median).len();
            prop_assert!(kept == rs.len() / 2 || kept == rs.len().div_ceil(2));
        }
    }
}
