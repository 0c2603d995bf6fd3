use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use resistlab::record::read_run_log;
use resistlab::selection::{selection_report, ThresholdRule};
use resistlab::CheckpointRecord;

use super::write_text;
use crate::{CliError, CliResult, SelectArgs};

fn expand(patterns: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for p in patterns {
        let matches = glob::glob(p).with_context(|| format!("bad glob pattern {p}")).map_err(CliError::usage)?;
        for m in matches {
            paths.push(m.map_err(CliError::usage)?);
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(CliError::usage(anyhow!("no run logs match {}", patterns.join(" "))));
    }
    Ok(paths)
}

pub fn load_records(patterns: &[String]) -> CliResult<Vec<CheckpointRecord>> {
    let mut records = Vec::new();
    for path in expand(patterns)? {
        let file = File::open(&path).with_context(|| format!("opening {}", path.display())).map_err(CliError::usage)?;
        let mut recs = read_run_log(BufReader::new(file)).map_err(|e| CliError::usage(anyhow!("{}: {e}", path.display())))?;
        records.append(&mut recs);
    }
    Ok(records)
}

pub fn run(args: &SelectArgs) -> CliResult {
    let records = load_records(&args.logs)?;
    let rule = match args.percentile.as_deref() {
        None => ThresholdRule::Mean,
        Some([z, a]) => ThresholdRule::Percentile { zeta: *z, train_acc: *a },
        Some(_) => return Err(CliError::usage(anyhow!("--percentile takes ZETA,TRAIN_ACC"))),
    };
    let report = selection_report(&records, rule, args.blind)?;
    let text = serde_json::to_string_pretty(&report).map_err(CliError::usage)? + "\n";
    match &args.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
