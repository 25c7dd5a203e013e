//! Shared fixtures for the criterion benches.

use finsler_core::{zoo, Metric};

/// A metric with a representative flag and a target point for shooting.
pub struct Fixture {
    pub metric: Metric,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub target: Vec<f64>,
}

pub fn fixtures() -> Vec<Fixture> {
    let cases = [
        ("euclidean", [0.1, 0.2], [0.6, -0.3], [0.5, -0.4]),
        ("poincare", [0.1, 0.2], [0.6, -0.3], [0.4, -0.3]),
        ("sphere", [0.1, 0.2], [0.6, -0.3], [0.5, -0.4]),
        ("randers_expr", [0.1, 0.2], [0.6, -0.3], [0.5, -0.4]),
        ("randers_wind", [0.1, 0.2], [0.6, -0.3], [0.4, -0.3]),
    ];
    cases
        .iter()
        .map(|(name, x, y, t)| Fixture {
            metric: zoo::by_name(name).expect("zoo metric"),
            x: x.to_vec(),
            y: y.to_vec(),
            target: t.to_vec(),
        })
        .collect()
}
