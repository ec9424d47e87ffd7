use super::ErrorStats;
use crate::{Error, Result};
use std::io::Write;

/// Schema line written as the first (comment) line of every CSV file.
pub const CSV_SCHEMA: &str = "ull-sim/1";

const EXACT_INTEGER_LIMIT: f64 = 9_007_199_254_740_992.0;

fn format_target(t: f64) -> String {
    if t < 1e17 && t.fract() == 0.0 {
        format!("{}", t as u64)
    } else {
        format!("{t:.16e}")
    }
}

/// Writes statistics as CSV with a schema comment and a header row.
pub fn write_csv<W: Write>(mut out: W, stats: &[ErrorStats]) -> std::io::Result<()> {
    writeln!(out, "# schema: {CSV_SCHEMA}")?;
    writeln!(out, "target_n,estimator,trials,mean_rel_bias,rel_rmse,theoretical_rmse")?;
    for s in stats {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e}",
            format_target(s.target_n),
            s.estimator,
            s.trials,
            s.mean_rel_bias,
            s.rel_rmse,
            s.theoretical_rmse
        )?;
    }
    Ok(())
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::InvalidPlan(format!("cannot parse target '{}'", s.trim())))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidPlan(format!("invalid target '{}'", s.trim())));
    }
    Ok(v)
}

fn normalize(t: f64) -> f64 {
    if t < EXACT_INTEGER_LIMIT {
        t.round()
    } else {
        t
    }
}

/// Parses a comma-separated target list. Items are numbers (`1000`, `1e6`) or
/// `geom:start:stop:points` for log-spaced values. Values below `2^53` are
/// rounded to integers; the result is sorted and free of duplicates.
pub fn parse_targets(input: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in input.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(rest) = item.strip_prefix("geom:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidPlan(format!("expected geom:start:stop:points, got '{item}'")));
            }
            let start = parse_number(parts[0])?;
            let stop = parse_number(parts[1])?;
            let points: usize =
                parts[2].trim().parse().map_err(|_| Error::InvalidPlan(format!("invalid point count in '{item}'")))?;
            if start <= 0.0 || stop < start || points == 0 || (points == 1 && stop != start) {
                return Err(Error::InvalidPlan(format!("invalid geometric range '{item}'")));
            }
            if points == 1 {
                out.push(normalize(start));
                continue;
            }
            let (a, b) = (start.ln(), stop.ln());
            for i in 0..points {
                let x = if i + 1 == points { stop } else { (a + (b - a) * i as f64 / (points - 1) as f64).exp() };
                out.push(normalize(x));
            }
        } else {
            out.push(normalize(parse_number(item)?));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidPlan("no targets given".into()));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}
