use crate::error::{invalid, Error, Result};

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(crate::error::shape(format!("sequences have lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(invalid(format!("correlation needs at least 2 points, got {}", x.len())));
    }
    Ok(())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric("Pearson correlation of a constant sequence".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Kendall τ-b with the usual tie correction, by direct pair counting.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let sx = (x[i] - x[j]).partial_cmp(&0.0);
            let sy = (y[i] - y[j]).partial_cmp(&0.0);
            use std::cmp::Ordering::Equal;
            match (sx, sy) {
                (Some(Equal), Some(Equal)) => {}
                (Some(Equal), _) => tied_x += 1,
                (_, Some(Equal)) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let nx = (concordant + discordant + tied_x) as f64;
    let ny = (concordant + discordant + tied_y) as f64;
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::UndefinedMetric("Kendall tau of an all-tied sequence".into()));
    }
    Ok((concordant - discordant) as f64 / (nx * ny).sqrt())
}

/// Linear-interpolation percentile (`pct` in `[0, 100]`) of a non-empty sample.
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("percentile of an empty sample"));
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(invalid(format!("percentile must lie in [0, 100], got {pct}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}
