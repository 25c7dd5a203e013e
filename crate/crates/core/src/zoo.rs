//! Built-in example metrics.

use crate::metric::{Entry, Metric, MetricSpec};

pub const ZOO_NAMES: [&str; 5] = ["euclidean", "poincare", "sphere", "randers_flat", "randers_expr"];

pub fn euclidean_spec(n: usize) -> MetricSpec {
    MetricSpec::Euclidean { n, domain: None, name: Some("euclidean".into()) }
}

/// Poincaré disk, `F = 2|y|/(1 − |x|²)` on the unit disk.
pub fn poincare_spec() -> MetricSpec {
    MetricSpec::RiemannianConformal { n: 2, factor: "poincare".into(), domain: None, name: Some("poincare".into()) }
}

/// Round sphere in stereographic coordinates, `F = 2|y|/(1 + |x|²)`.
pub fn sphere_spec() -> MetricSpec {
    MetricSpec::RiemannianConformal { n: 2, factor: "sphere".into(), domain: None, name: Some("sphere".into()) }
}

/// `F = |y| + 0.5 y¹`.
pub fn randers_flat_spec() -> MetricSpec {
    MetricSpec::Randers {
        n: 2,
        alpha: vec![vec![Entry::Const(1.0), Entry::Const(0.0)], vec![Entry::Const(0.0), Entry::Const(1.0)]],
        beta: vec![Entry::Const(0.5), Entry::Const(0.0)],
        domain: None,
        name: Some("randers_flat".into()),
    }
}

/// The flat Randers metric written as an expression.
pub fn randers_expr_spec() -> MetricSpec {
    MetricSpec::Expression {
        n: 2,
        source: "sqrt(y1^2+y2^2)+0.5*y1".into(),
        domain: None,
        name: Some("randers_expr".into()),
    }
}

/// Randers metric with a position-dependent wind; not in the default zoo.
pub fn wind_spec() -> MetricSpec {
    MetricSpec::Randers {
        n: 2,
        alpha: vec![vec![Entry::Const(1.0), Entry::Const(0.0)], vec![Entry::Const(0.0), Entry::Const(1.0)]],
        beta: vec![Entry::Expr("0.3*tanh(x2)".into()), Entry::Expr("0.2*sin(x1)".into())],
        domain: None,
        name: Some("randers_wind".into()),
    }
}

/// A positive, 1-homogeneous quartic whose indicatrix is not convex.
pub fn nonconvex_quartic_spec() -> MetricSpec {
    MetricSpec::Expression {
        n: 2,
        source: "(y1^4+y2^4-1.5*y1^2*y2^2)^0.25".into(),
        domain: None,
        name: Some("nonconvex_quartic".into()),
    }
}

pub fn spec_by_name(name: &str) -> Option<MetricSpec> {
    Some(match name {
        "euclidean" => euclidean_spec(2),
        "poincare" => poincare_spec(),
        "sphere" => sphere_spec(),
        "randers_flat" => randers_flat_spec(),
        "randers_expr" => randers_expr_spec(),
        "randers_wind" => wind_spec(),
        "nonconvex_quartic" => nonconvex_quartic_spec(),
        _ => return None,
    })
}

pub fn by_name(name: &str) -> Option<Metric> {
    spec_by_name(name).map(|s| Metric::from_spec(&s).expect("built-in metric is valid"))
}

/// The default zoo: euclidean, Poincaré, sphere, flat and expression Randers.
pub fn zoo() -> Vec<Metric> {
    ZOO_NAMES.iter().map(|n| by_name(n).expect("zoo name")).collect()
}

pub fn zoo_specs() -> Vec<MetricSpec> {
    ZOO_NAMES.iter().map(|n| spec_by_name(n).expect("zoo name")).collect()
}
