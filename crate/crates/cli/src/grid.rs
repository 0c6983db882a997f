//! Axis specifications for `eval`: `x=-2:2:101` (inclusive range with a
//! point count) or `z=0` (a fixed value). Unmentioned axes sit at 0.

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub axis: char,
    pub values: Vec<f64>,
}

pub fn parse_axis(spec: &str) -> Result<AxisSpec, CliError> {
    let bad = |why: &str| CliError::Config(format!("bad axis spec '{spec}': {why}"));
    let (name, rest) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected name=value or name=lo:hi:count"))?;
    let axis = match name.trim() {
        "x" => 'x',
        "y" => 'y',
        "z" => 'z',
        other => return Err(bad(&format!("unknown axis '{other}'"))),
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let values = match parts.as_slice() {
        [v] => vec![v.trim().parse::<f64>().map_err(|e| bad(&format!("{e}")))?],
        [lo, hi, n] => {
            let lo: f64 = lo.trim().parse().map_err(|e| bad(&format!("{e}")))?;
            let hi: f64 = hi.trim().parse().map_err(|e| bad(&format!("{e}")))?;
            let n: usize = n.trim().parse().map_err(|e| bad(&format!("{e}")))?;
            if n == 0 {
                return Err(bad("count must be at least 1"));
            }
            if n == 1 {
                if lo != hi {
                    return Err(bad("count 1 needs lo = hi"));
                }
                vec![lo]
            } else {
                (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
        _ => return Err(bad("expected name=value or name=lo:hi:count")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(AxisSpec { axis, values })
}

/// Combine axis specs into per-axis value lists (missing axes default to 0).
pub fn resolve_axes(specs: &[String]) -> Result<[Vec<f64>; 3], CliError> {
    let mut axes: [Option<Vec<f64>>; 3] = [None, None, None];
    for s in specs {
        let parsed = parse_axis(s)?;
        let idx = (parsed.axis as u8 - b'x') as usize;
        if axes[idx].is_some() {
            return Err(CliError::Config(format!(
                "axis '{}' specified twice",
                parsed.axis
            )));
        }
        axes[idx] = Some(parsed.values);
    }
    Ok(axes.map(|a| a.unwrap_or_else(|| vec![0.0])))
}

/// Parse `lo:hi:count` (used by portrait ranges).
pub fn parse_range(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = |why: &str| CliError::Config(format!("bad range '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad("expected lo:hi:count"));
    };
    let lo: f64 = lo.trim().parse().map_err(|e| bad(&format!("{e}")))?;
    let hi: f64 = hi.trim().parse().map_err(|e| bad(&format!("{e}")))?;
    let n: usize = n.trim().parse().map_err(|e| bad(&format!("{e}")))?;
    if !(lo.is_finite() && hi.is_finite() && hi > lo && n >= 2) {
        return Err(bad("need finite lo < hi and count >= 2"));
    }
    Ok((lo, hi, n))
}

/// Parse a comma-separated list of floats (energy levels, state vectors).
pub fn parse_floats(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad number '{s}' in '{spec}': {e}")))
        })
        .collect()
}
