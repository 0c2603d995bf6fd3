use anyhow::{anyhow, Context};
use resistlab::data::{load_idx, synth_sphere_dataset, IdxOptions};
use resistlab::ntk::{
    bound_curves, eigendecompose, gram_infinity, validate_against_gd, BoundParams, StepSize, ValidateParams, ValidationReport,
};

use super::{create, write_text};
use crate::{BoundsArgs, CliError, CliResult, ValidateArgs};

pub fn bounds(args: &BoundsArgs) -> CliResult {
    if args.n > args.max_n {
        return Err(CliError::usage(anyhow!("n = {} exceeds --max-n {}", args.n, args.max_n)));
    }
    let ds = match (&args.idx_images, &args.idx_labels) {
        (Some(images), Some(labels)) => {
            load_idx::<f64>(images, labels, IdxOptions { limit: Some(args.n), ntk_mode: true })?
        }
        _ => synth_sphere_dataset::<f64>(args.n, args.d, args.seed)?,
    };
    let spec = eigendecompose(gram_infinity(ds.inputs.view())?.view())?;
    log::info!("n = {}, lambda_min = {:.3e}, lambda_max = {:.3e}", ds.len(), spec.lambda_min(), spec.lambda_max());
    let params = BoundParams {
        eta: args.eta,
        k: args.k,
        k_tilde_grid: args.k_tilde.clone(),
        delta: args.delta,
        lnl_grid: args.lnl.clone(),
        draws: args.draws,
        seed: args.seed,
    };
    params.validate(&spec)?;
    let curve = bound_curves(&spec, &ds.signed_true()?, &params)?;
    let mut out = create(&args.out)?;
    curve
        .write_csv(&mut out)
        .and_then(|_| std::io::Write::flush(&mut out))
        .with_context(|| format!("writing {}", args.out.display()))
        .map_err(CliError::usage)?;
    println!("{} rows written to {}", curve.points.len(), args.out.display());
    Ok(())
}

fn print_report(r: &ValidationReport) {
    println!(
        "seed {} m {} lnl {} eta {:.4e} lambda_min {:.4e} lambda_max {:.4e}",
        r.seed, r.m, r.lnl, r.eta, r.lambda_min, r.lambda_max
    );
    println!("  {:>8} {:>14} {:>14} {:>10}", "k_tilde", "predicted", "actual", "rel_err");
    for row in &r.rows {
        println!("  {:>8} {:>14.8} {:>14.8} {:>10.4}", row.k_tilde, row.predicted, row.actual, row.relative_error);
    }
}

pub fn validate(args: &ValidateArgs) -> CliResult {
    let eta = match args.eta {
        Some(eta) => StepSize::Absolute(eta),
        None => StepSize::RelativeToLambdaMax(args.eta_factor),
    };
    let widths: Vec<usize> = if args.m_sweep { vec![args.m, 2 * args.m] } else { vec![args.m] };
    let mut reports = Vec::new();
    for &m in &widths {
        for &seed in &args.seeds {
            let params = ValidateParams {
                n: args.n,
                d: args.d,
                m,
                kappa: args.kappa,
                eta,
                k: args.k,
                k_tilde_grid: args.k_tilde.clone(),
                lnl: args.lnl,
                seed,
            };
            let report = validate_against_gd(&params)?;
            print_report(&report);
            reports.push(report);
        }
    }
    let worst = reports.iter().filter(|r| r.m == args.m).map(ValidationReport::max_relative_error).fold(0.0, f64::max);
    println!("max relative error at m = {}: {:.4} ({})", args.m, worst, if worst <= 0.10 { "pass" } else { "FAIL" });
    if args.m_sweep {
        let (narrow, wide) = reports.split_at(args.seeds.len());
        let mut shrunk = 0;
        let mut cells = 0;
        for (a, b) in narrow.iter().zip(wide) {
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                cells += 1;
                shrunk += usize::from(rb.relative_error < ra.relative_error);
            }
        }
        println!("error shrinks from m = {} to m = {} in {shrunk} of {cells} cells", args.m, 2 * args.m);
    }
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&reports).map_err(CliError::usage)? + "\n";
        write_text(path, &text)?;
    }
    Ok(())
}
