//! Numerical Finsler geometry on a single coordinate chart.
//!
//! A metric `F(x, y)` is given declaratively ([`MetricSpec`]) and evaluated
//! through a forward-mode derivative engine, so the fundamental tensor,
//! geodesic spray and connection coefficients are exact up to rounding.
//! On top of that sit an RK4 geodesic integrator with the exponential map,
//! a shooting solver for the two-point problem, a convexity-radius
//! estimator and a suite of numerical property checks.

pub mod connection;
pub mod connectivity;
pub mod error;
pub mod expr;
pub mod geodesic;
pub mod metric;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod verify;
pub mod zoo;

pub use connection::{
    chern_coefficients, check_path_condition, make_admissible_perturbation, make_inadmissible_control,
    perturbed_spray, spray, spray_coefficients, AdmissiblePerturbation, ChernCoefficients, NonlinearConnection,
    PathSample,
};
pub use connectivity::{
    connect, connect_all, distance, estimate_convexity_radii, check_uniqueness_escape, ConvexityOptions, ConvexityReport,
    EscapeFinding, MultistartPolicy, ShootOptions, ShootingResult,
};
pub use error::{FinslerError, ParseError, ParseErrorKind, Result};
pub use expr::{parse_metric, MetricExpression};
pub use geodesic::{
    curve_length, d_exp, d_exp_matrix, exp_map, image_length, integrate_geodesic, GeodesicSolution, ImageVelocity,
    IntegrateOptions, SampledCurve,
};
pub use metric::{Dir, Domain, FundamentalTensor, Metric, MetricSpec};
