use std::fs::File;
use std::io::BufReader;

use proptest::prelude::*;
use resistlab::record::{read_run_log, write_run_log};
use resistlab::selection::{kendall_tau, partition, pearson, selection_report, Region, ThresholdRule};
use resistlab::CheckpointRecord;

fn record(run: usize, epoch: usize, train_acc: f64, zeta: f64, test_acc: f64) -> CheckpointRecord {
    CheckpointRecord {
        run_id: format!("run-{run}"),
        epoch,
        lr: 0.01,
        train_loss: 1.0 - train_acc,
        train_acc,
        train_acc_clean: train_acc,
        train_acc_noisy: zeta,
        test_acc: Some(test_acc),
        zeta_increment: zeta,
        zeta,
    }
}

fn fleet() -> Vec<CheckpointRecord> {
    let mut out = Vec::new();
    for run in 0..4 {
        for epoch in 1..=10 {
            let t = epoch as f64 / 10.0;
            let memorizes = run % 2 == 1;
            let zeta = if memorizes { 0.1 + 0.8 * t } else { 0.1 + 0.1 * t };
            let train = 0.4 + 0.5 * t + 0.01 * run as f64;
            let test = if memorizes { 0.7 - 0.3 * t } else { 0.5 + 0.3 * t };
            out.push(record(run, epoch, train, zeta, test));
        }
    }
    out
}

#[test]
fn report_from_log_files_equals_report_from_memory() {
    let records = fleet();
    let dir = tempfile::tempdir().unwrap();
    let mut loaded = Vec::new();
    for run in 0..4 {
        let path = dir.path().join(format!("run-{run}.csv"));
        let mine: Vec<_> = records.iter().filter(|r| r.run_id == format!("run-{run}")).cloned().collect();
        write_run_log(File::create(&path).unwrap(), &mine).unwrap();
        loaded.extend(read_run_log(BufReader::new(File::open(&path).unwrap())).unwrap());
    }
    assert_eq!(loaded, records);
    for rule in [ThresholdRule::Mean, ThresholdRule::Percentile { zeta: 40.0, train_acc: 60.0 }] {
        let a = selection_report(&records, rule, false).unwrap();
        let b = selection_report(&loaded, rule, false).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn resistant_trainable_checkpoints_generalize_best_on_a_synthetic_fleet() {
    let records = fleet();
    let part = partition(&records, ThresholdRule::Mean).unwrap();
    let mean_test = |g: Region| {
        let v: Vec<f64> = part.members(&records, g).map(|r| r.test_acc.unwrap()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(part.count(Region::One) > 0);
    assert!(mean_test(Region::One) > mean_test(Region::Two));
    let zeta: Vec<f64> = records.iter().map(|r| r.zeta).collect();
    let noisy: Vec<f64> = records.iter().map(|r| r.train_acc_noisy).collect();
    assert_eq!(pearson(&zeta, &noisy).unwrap(), 1.0);
    assert_eq!(kendall_tau(&zeta, &noisy).unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regions_match_a_naive_double_threshold(points in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..80)) {
        let records: Vec<_> = points.iter().enumerate().map(|(i, &(z, a))| record(0, i, a, z, 0.5)).collect();
        let part = partition(&records, ThresholdRule::Mean).unwrap();
        let n = records.len() as f64;
        let zt = points.iter().map(|p| p.0).sum::<f64>() / n;
        let at = points.iter().map(|p| p.1).sum::<f64>() / n;
        for (r, got) in records.iter().zip(&part.assignment) {
            let expected = match (r.zeta <= zt, r.train_acc >= at) {
                (true, true) => Region::One,
                (false, true) => Region::Two,
                (true, false) => Region::Three,
                (false, false) => Region::Four,
            };
            prop_assert_eq!(*got, expected);
        }
    }
}
