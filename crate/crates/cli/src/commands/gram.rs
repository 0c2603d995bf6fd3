use anyhow::anyhow;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use resistlab::ntk::{gram_entry_monte_carlo, kernel_entry};
use resistlab::rng;

use crate::{CliError, CliResult, GramCheckArgs};

fn unit_vector(d: usize, r: &mut impl Rng) -> Array1<f64> {
    let v: Array1<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
    let norm = v.dot(&v).sqrt();
    v / norm
}

pub fn check(args: &GramCheckArgs) -> CliResult {
    if args.mc < 10_000 {
        return Err(CliError::usage(anyhow!("--mc must be at least 10000, got {}", args.mc)));
    }
    if args.d < 2 {
        return Err(CliError::usage(anyhow!("--d must be at least 2")));
    }
    let mut r = rng::stream(args.seed, "gram-check-pairs");
    let base = unit_vector(args.d, &mut r);
    let mut pairs: Vec<(String, Array2<f64>)> = vec![
        ("identical".into(), ndarray::stack![ndarray::Axis(0), base, base]),
        ("antipodal".into(), ndarray::stack![ndarray::Axis(0), base, -&base]),
    ];
    for i in 0..args.samples {
        let (a, b) = (unit_vector(args.d, &mut r), unit_vector(args.d, &mut r));
        pairs.push((format!("random-{i}"), ndarray::stack![ndarray::Axis(0), a, b]));
    }
    println!("{:<12} {:>10} {:>12} {:>12} {:>10} {:>10}  result", "pair", "inner", "closed_form", "monte_carlo", "gap", "tol");
    let mut failures = 0;
    for (i, (name, x)) in pairs.iter().enumerate() {
        let inner = x.row(0).dot(&x.row(1));
        let closed = kernel_entry(inner);
        let (mc, se) = gram_entry_monte_carlo(x.row(0), x.row(1), args.mc, rng::derive_seed(args.seed, &format!("mc-{i}")));
        let gap = (closed - mc).abs();
        let tol = 3.0 * se + 1e-3;
        let ok = gap <= tol;
        failures += usize::from(!ok);
        println!(
            "{name:<12} {inner:>10.6} {closed:>12.8} {mc:>12.8} {gap:>10.2e} {tol:>10.2e}  {}",
            if ok { "pass" } else { "FAIL" }
        );
    }
    if failures > 0 {
        return Err(CliError::numeric(anyhow!("{failures} of {} pairs outside tolerance", pairs.len())));
    }
    Ok(())
}
