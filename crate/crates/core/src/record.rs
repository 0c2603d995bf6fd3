//! Per-epoch checkpoint measurements and their CSV run-log form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Column order of a run log.
pub const RUN_LOG_HEADER: &str =
    "run_id,epoch,lr,train_loss,train_acc,train_acc_clean,train_acc_noisy,test_acc,zeta_increment,zeta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub run_id: String,
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_acc: f64,
    pub train_acc_clean: f64,
    pub train_acc_noisy: f64,
    /// Absent in blind mode.
    pub test_acc: Option<f64>,
    pub zeta_increment: f64,
    pub zeta: f64,
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

impl CheckpointRecord {
    pub fn to_csv_row(&self) -> String {
        if self.run_id.contains([',', '\n', '"']) {
            // Run ids are generated identifiers; quoting is not supported.
            log::warn!("run id {:?} contains CSV metacharacters", self.run_id);
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.epoch,
            fmt_f64(self.lr),
            fmt_f64(self.train_loss),
            fmt_f64(self.train_acc),
            fmt_f64(self.train_acc_clean),
            fmt_f64(self.train_acc_noisy),
            self.test_acc.map(fmt_f64).unwrap_or_default(),
            fmt_f64(self.zeta_increment),
            fmt_f64(self.zeta),
        )
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        if fields.len() != 10 {
            return Err(invalid(format!("run-log row has {} fields, expected 10: {line:?}", fields.len())));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].parse::<f64>().map_err(|e| invalid(format!("bad number {:?} in column {i}: {e}", fields[i])))
        };
        Ok(Self {
            run_id: fields[0].to_string(),
            epoch: fields[1].parse().map_err(|e| invalid(format!("bad epoch {:?}: {e}", fields[1])))?,
            lr: num(2)?,
            train_loss: num(3)?,
            train_acc: num(4)?,
            train_acc_clean: num(5)?,
            train_acc_noisy: num(6)?,
            test_acc: if fields[7].is_empty() { None } else { Some(num(7)?) },
            zeta_increment: num(8)?,
            zeta: num(9)?,
        })
    }
}

pub fn write_run_log<W: Write>(mut out: W, records: &[CheckpointRecord]) -> std::io::Result<()> {
    writeln!(out, "{RUN_LOG_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    out.flush()
}

pub fn read_run_log<R: BufRead>(input: R) -> Result<Vec<CheckpointRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| invalid("empty run log"))?
        .map_err(|source| Error::Io { path: "<run log>".into(), source })?;
    if header.trim_end() != RUN_LOG_HEADER {
        return Err(invalid(format!("unexpected run-log header {header:?}")));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|source| Error::Io { path: "<run log>".into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(CheckpointRecord::from_csv_row(&line)?);
    }
    Ok(out)
}
