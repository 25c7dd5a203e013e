//! The single table of pass thresholds used by every check.
//!
//! Lower-bound checks (a margin that must stay above a floor) report
//! `floor / margin` against a tolerance of 1, so that for every check
//! `pass ⇔ max_residual ≤ tolerance`.

use super::Check;

/// Smallest relative strictness margin distinguishable from quadrature noise.
pub const RADIAL_STRICT_FLOOR: f64 = 1e-6;
/// Smallest relative gap counted as a strict fundamental inequality.
pub const FUNDAMENTAL_STRICT_FLOOR: f64 = 1e-9;
/// Smallest endpoint deviation the inadmissible control must produce.
pub const CONTROL_FLOOR: f64 = 1e-3;
/// Perturbation amplitude (relative to `F(x, X)`) above which strictness is asserted.
pub const STRICT_AMPLITUDE: f64 = 0.05;
/// Largest accepted condition number of `g`.
pub const MAX_CONDITION: f64 = 1e12;

pub fn tolerance(check: Check) -> f64 {
    match check {
        Check::FHomogeneity => 1e-9,
        Check::GHomogeneity => 1e-7,
        Check::NormReproduction => 1e-6,
        Check::PositiveDefinite => MAX_CONDITION,
        Check::EnergyConservation => 1e-6,
        Check::ChernContraction => 1e-6,
        Check::ChernRiemannian => 1e-6,
        Check::GaussNorm => 1e-5,
        Check::GaussOrthogonality => 1e-5,
        Check::RadialMinimality => 1e-6,
        Check::RadialStrictness => 1.0,
        Check::FundamentalInequality => 1e-9,
        Check::FundamentalStrictness => 1.0,
        Check::QuadraticGrowth => 1e-7,
        Check::FamilyInvariance => 1e-8,
        Check::InadmissibleControl => 1.0,
        Check::Admission => 0.0,
    }
}
