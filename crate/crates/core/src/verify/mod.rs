//! Numerical property checks with declared tolerances and replayable
//! worst-case witnesses.

mod checks;
pub mod tolerances;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metric::{Metric, MetricSpec};

pub use checks::{
    check_algebra, check_chern, check_energy_conservation, check_family_invariance, check_fundamental_inequality,
    check_gauss_lemma, check_quadratic_growth, check_radial_minimality, GrowthOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    FHomogeneity,
    GHomogeneity,
    NormReproduction,
    PositiveDefinite,
    EnergyConservation,
    ChernContraction,
    ChernRiemannian,
    GaussNorm,
    GaussOrthogonality,
    RadialMinimality,
    RadialStrictness,
    FundamentalInequality,
    FundamentalStrictness,
    QuadraticGrowth,
    FamilyInvariance,
    InadmissibleControl,
    Admission,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::FHomogeneity => "f_homogeneity",
            Check::GHomogeneity => "g_homogeneity",
            Check::NormReproduction => "norm_reproduction",
            Check::PositiveDefinite => "positive_definite",
            Check::EnergyConservation => "energy_conservation",
            Check::ChernContraction => "chern_contraction",
            Check::ChernRiemannian => "chern_riemannian",
            Check::GaussNorm => "gauss_norm",
            Check::GaussOrthogonality => "gauss_orthogonality",
            Check::RadialMinimality => "radial_minimality",
            Check::RadialStrictness => "radial_strictness",
            Check::FundamentalInequality => "fundamental_inequality",
            Check::FundamentalStrictness => "fundamental_strictness",
            Check::QuadraticGrowth => "quadratic_growth",
            Check::FamilyInvariance => "family_invariance",
            Check::InadmissibleControl => "inadmissible_control",
            Check::Admission => "admission",
        }
    }

    pub fn tolerance(self) -> f64 {
        tolerances::tolerance(self)
    }
}

/// Inputs that reproduce one sample's residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub metric: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Re-evaluates a report's witness; matches `max_residual` for a
/// deterministic check.
pub fn replay(metric: &Metric, report: &CheckReport) -> Result<Option<f64>> {
    match &report.witness {
        Some(w) => checks::residual(report.check, metric, w),
        None => Ok(None),
    }
}

/// Sample counts per check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub algebra_flags: usize,
    pub energy_flags: usize,
    pub chern_flags: usize,
    pub gauss_flags: usize,
    pub radial_curves: usize,
    pub fundamental_trials: usize,
    pub family_flags: usize,
    pub growth: GrowthOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            algebra_flags: 100,
            energy_flags: 20,
            chern_flags: 50,
            gauss_flags: 100,
            radial_curves: 200,
            fundamental_trials: 200,
            family_flags: 6,
            growth: GrowthOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub admitted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
    pub checks: Vec<CheckReport>,
}

impl MetricReport {
    pub fn pass(&self) -> bool {
        self.admitted && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub metrics: Vec<MetricReport>,
}

impl SuiteReport {
    pub fn find(&self, metric: &str, check: Check) -> Option<&CheckReport> {
        self.metrics.iter().find(|m| m.metric == metric)?.checks.iter().find(|c| c.check == check)
    }
}

/// Every check on one metric, after an admission pass that samples the
/// fundamental tensor for strong convexity.
pub fn run_metric(metric: &Metric, seed: u64, config: &SuiteConfig) -> MetricReport {
    let admission = checks::check_admission(metric, seed);
    if !admission.pass {
        let rejection = admission.errors.first().cloned().unwrap_or_else(|| "not strongly convex".into());
        return MetricReport { metric: metric.name().into(), admitted: false, rejection: Some(rejection), checks: vec![admission] };
    }
    let mut out = vec![admission];
    out.extend(check_algebra(metric, seed, config.algebra_flags));
    out.push(check_energy_conservation(metric, seed, config.energy_flags));
    out.extend(check_chern(metric, seed, config.chern_flags));
    out.extend(check_gauss_lemma(metric, seed, config.gauss_flags));
    out.extend(check_radial_minimality(metric, seed, config.radial_curves));
    out.extend(check_fundamental_inequality(metric, seed, config.fundamental_trials));
    out.push(check_quadratic_growth(metric, &config.growth));
    out.extend(check_family_invariance(metric, seed, config.family_flags));
    MetricReport { metric: metric.name().into(), admitted: true, rejection: None, checks: out }
}

/// Runs the suite over a metric set with one master seed. Metrics that fail
/// to build or to pass admission are reported as rejected.
pub fn run_all(specs: &[MetricSpec], seed: u64, config: &SuiteConfig) -> SuiteReport {
    let metrics: Vec<MetricReport> = specs
        .iter()
        .map(|spec| match Metric::from_spec(spec) {
            Ok(m) => run_metric(&m, seed, config),
            Err(e) => MetricReport {
                metric: spec.name().map(str::to_string).unwrap_or_else(|| "unnamed".into()),
                admitted: false,
                rejection: Some(e.to_string()),
                checks: Vec::new(),
            },
        })
        .collect();
    SuiteReport { seed, pass: metrics.iter().all(MetricReport::pass), metrics }
}
