use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use resistlab::experiment::{execute, RunConfig};
use resistlab::record::write_run_log;

use super::create;
use crate::{CliError, CliResult, TrainArgs};

fn apply_overrides(cfg: &mut RunConfig, args: &TrainArgs) {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.optimizer.epochs = epochs;
    }
    if let Some(eta) = args.eta {
        cfg.optimizer.eta = eta;
    }
    if let Some(level) = args.noise_level {
        cfg.noise.level = level;
    }
    if let Some(id) = &args.run_id {
        cfg.run_id = Some(id.clone());
    }
}

fn log_path(cfg: &RunConfig, args: &TrainArgs) -> CliResult<PathBuf> {
    if let Some(out) = &args.out {
        return Ok(out.clone());
    }
    if let Some(p) = &cfg.output.run_log_path {
        return Ok(p.clone());
    }
    match &args.out_dir {
        Some(dir) => Ok(dir.join(format!("{}.csv", cfg.run_id()))),
        None => Err(CliError::usage(anyhow!(
            "run {}: no run-log path (set output.run_log_path, --out or --out-dir)",
            cfg.run_id()
        ))),
    }
}

fn run_one(cfg: &RunConfig, path: &Path) -> CliResult {
    let outcome = execute(cfg)?;
    let mut out = create(path)?;
    write_run_log(&mut out, &outcome.records)
        .and_then(|_| std::io::Write::flush(&mut out))
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::usage)?;
    if let Some(last) = outcome.records.last() {
        log::info!("{}: {} epochs, train_acc {:.4}, zeta {:.4}", cfg.run_id(), last.epoch, last.train_acc, last.zeta);
    }
    println!("{}", path.display());
    Ok(())
}

pub fn run(args: &TrainArgs) -> CliResult {
    if args.out.is_some() && args.configs.len() > 1 {
        return Err(CliError::usage(anyhow!("--out needs exactly one --config; use --out-dir")));
    }
    if args.jobs == 0 {
        return Err(CliError::usage(anyhow!("--jobs must be at least 1")));
    }
    let mut jobs = Vec::with_capacity(args.configs.len());
    for path in &args.configs {
        let mut cfg = RunConfig::load(path)?;
        apply_overrides(&mut cfg, args);
        cfg.validate().map_err(|e| CliError::usage(anyhow!("{}: {e}", path.display())))?;
        let log = log_path(&cfg, args)?;
        jobs.push((cfg, log));
    }
    // Whole runs are the unit of parallelism; each run owns its state and file.
    let results: Vec<CliResult> = std::thread::scope(|scope| {
        let mut results = Vec::with_capacity(jobs.len());
        for batch in jobs.chunks(args.jobs) {
            let handles: Vec<_> = batch.iter().map(|(cfg, log)| scope.spawn(move || run_one(cfg, log))).collect();
            results.extend(handles.into_iter().map(|h| h.join().expect("run thread panicked")));
        }
        results
    });
    let mut first_err = None;
    for (r, (cfg, _)) in results.into_iter().zip(&jobs) {
        if let Err(e) = r {
            eprintln!("run {} failed: {:#}", cfg.run_id(), e.source);
            first_err.get_or_insert(e);
        }
    }
    first_err.map_or(Ok(()), Err)
}
