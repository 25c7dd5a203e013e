//! Command-line inputs: vectors, radius grids and metric sources.

use std::path::Path;

use finsler_core::{zoo, Metric, MetricSpec};

#[derive(Debug)]
pub struct UsageError(pub String);

impl From<finsler_core::FinslerError> for UsageError {
    fn from(e: finsler_core::FinslerError) -> Self {
        UsageError(e.to_string())
    }
}

/// Comma-separated decimals, '.' as the decimal separator.
pub fn parse_vector(name: &str, s: &str) -> Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| UsageError(format!("--{name}: {p:?} is not a finite number")))
        })
        .collect()
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, h] => {
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| UsageError(format!("--grid: bad number {t:?}")));
            let (a, b, h) = (num(a)?, num(b)?, num(h)?);
            if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(UsageError("--grid: need start <= stop and step > 0".into()));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(UsageError("--grid: too many radii".into()));
            }
            Ok((0..count).map(|k| a + k as f64 * h).collect())
        }
        [_] => parse_vector("grid", s),
        _ => Err(UsageError("--grid: expected start:stop:step or a comma list".into())),
    }
}

/// Inline JSON, a file path, or a zoo name, in that order.
pub fn load_metric(source: &str) -> Result<Metric, UsageError> {
    let trimmed = source.trim_start();
    if trimmed.starts_with('{') {
        return Ok(Metric::from_json(trimmed)?);
    }
    if Path::new(source).exists() {
        let text = std::fs::read_to_string(source).map_err(|e| UsageError(format!("{source}: {e}")))?;
        return Ok(Metric::from_json(&text)?);
    }
    zoo::by_name(source).ok_or_else(|| UsageError(format!("{source}: no such file, and not a zoo metric")))
}

/// `zoo`, or a JSON file with one metric or an array of metrics.
pub fn load_metric_set(source: &str) -> Result<Vec<MetricSpec>, UsageError> {
    if source == "zoo" {
        return Ok(zoo::zoo_specs());
    }
    let text = std::fs::read_to_string(source).map_err(|e| UsageError(format!("{source}: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| UsageError(format!("{source}: {e}")))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        one => vec![one],
    };
    items
        .into_iter()
        .map(|v| MetricSpec::from_json(&v.to_string()).map_err(UsageError::from))
        .collect()
}
