//! JSON schema for metric definitions.
//!
//! ```json
//! {"kind": "euclidean", "n": 2}
//! {"kind": "riemannian_conformal", "n": 2, "factor": "poincare"}
//! {"kind": "riemannian_conformal", "n": 2, "factor": "exp(x1)"}
//! {"kind": "randers", "n": 2, "alpha": [[1, 0], [0, 1]], "beta": [0.5, "0.1*x2"]}
//! {"kind": "expression", "n": 2, "F": "sqrt(y1^2+y2^2)+0.5*y1"}
//! ```
//!
//! Every kind accepts an optional `"name"` and an optional `"domain"`, either
//! `"all"`, `"unit_ball"` or `{"center": [..], "radius": r}`. The conformal
//! factors `"poincare"` (`2/(1-|x|^2)`) and `"sphere"` (`2/(1+|x|^2)`) are
//! built in; any other string is an expression in `x1..xn`. Randers entries
//! are numbers or expressions in `x1..xn`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<DomainSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    RiemannianConformal {
        n: usize,
        factor: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<DomainSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Randers {
        n: usize,
        alpha: Vec<Vec<Entry>>,
        beta: Vec<Entry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<DomainSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Expression {
        n: usize,
        #[serde(rename = "F")]
        source: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<DomainSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

/// A constant or an expression in the base coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Const(f64),
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Named(String),
    Ball { center: Vec<f64>, radius: f64 },
}

impl MetricSpec {
    pub fn n(&self) -> usize {
        match self {
            MetricSpec::Euclidean { n, .. }
            | MetricSpec::RiemannianConformal { n, .. }
            | MetricSpec::Randers { n, .. }
            | MetricSpec::Expression { n, .. } => *n,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            MetricSpec::Euclidean { name, .. }
            | MetricSpec::RiemannianConformal { name, .. }
            | MetricSpec::Randers { name, .. }
            | MetricSpec::Expression { name, .. } => name.as_deref(),
        }
    }

    pub fn domain(&self) -> Option<&DomainSpec> {
        match self {
            MetricSpec::Euclidean { domain, .. }
            | MetricSpec::RiemannianConformal { domain, .. }
            | MetricSpec::Randers { domain, .. }
            | MetricSpec::Expression { domain, .. } => domain.as_ref(),
        }
    }

    pub fn from_json(text: &str) -> crate::Result<MetricSpec> {
        serde_json::from_str(text)
            .map_err(|e| crate::FinslerError::Input(format!("metric JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metric spec serializes")
    }
}
