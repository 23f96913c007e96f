//! `start:step:end` grid specs.

use crate::error::CliError;

/// Snap distance for the end point.
const END_SLACK: f64 = 1e-12;

/// Parses `start:step:end` (inclusive, end snapped within 1e-12) or a single
/// value. All points must lie in `[0, 1]`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("grid '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    let values = match parts.as_slice() {
        [single] => vec![num(single)?],
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if !(start.is_finite() && step.is_finite() && end.is_finite()) {
                return Err(bad("non-finite value"));
            }
            if !(step > 0.0) {
                return Err(bad("step must be positive"));
            }
            let mut out = Vec::new();
            let mut k = 0u32;
            loop {
                let v = start + f64::from(k) * step;
                if v > end + END_SLACK {
                    break;
                }
                out.push(if (v - end).abs() <= END_SLACK { end } else { v });
                k += 1;
                if k > 1_000_000 {
                    return Err(bad("more than 10^6 points"));
                }
            }
            out
        }
        _ => return Err(bad("expected start:step:end or a single value")),
    };
    if values.is_empty() {
        return Err(bad("empty grid"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(bad(&format!("{v} is outside [0, 1]")));
    }
    Ok(values)
}
