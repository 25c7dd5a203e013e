//! End-to-end checks against closed-form values.

use finsler_core::verify::{self, Check, SuiteConfig};
use finsler_core::{
    check_uniqueness_escape, connect, curve_length, distance, estimate_convexity_radii, zoo, ConvexityOptions, Metric,
    MetricSpec, SampledCurve, ShootOptions,
};
use std::f64::consts::{FRAC_PI_2, PI};

fn small_config() -> SuiteConfig {
    SuiteConfig {
        algebra_flags: 12,
        energy_flags: 3,
        chern_flags: 6,
        gauss_flags: 12,
        radial_curves: 12,
        fundamental_trials: 12,
        family_flags: 2,
        growth: Default::default(),
    }
}

#[test]
fn quarter_circle_on_euclidean_plane() {
    let m = zoo::by_name("euclidean").unwrap();
    let c = SampledCurve::from_fn(0.0, FRAC_PI_2, 257, |s| vec![s.cos(), s.sin()]).unwrap();
    let l = curve_length(&m, &c).unwrap().length;
    assert!((l - FRAC_PI_2).abs() <= 1e-8, "{l}");
}

#[test]
fn randers_segment_lengths() {
    let m = zoo::by_name("randers_flat").unwrap();
    let forward = SampledCurve::from_fn(0.0, 1.0, 33, |s| vec![s, 0.0]).unwrap();
    let backward = SampledCurve::from_fn(0.0, 1.0, 33, |s| vec![1.0 - s, 0.0]).unwrap();
    assert!((curve_length(&m, &forward).unwrap().length - 1.5).abs() <= 1e-12);
    assert!((curve_length(&m, &backward).unwrap().length - 0.5).abs() <= 1e-12);
}

#[test]
fn poincare_distances_match_arccosh() {
    let m = zoo::by_name("poincare").unwrap();
    let o = ShootOptions::default();
    let pairs: [([f64; 2], [f64; 2]); 3] = [([0.0, 0.0], [0.5, 0.0]), ([0.1, -0.2], [-0.3, 0.4]), ([0.6, 0.1], [0.2, 0.5])];
    for (y, z) in pairs {
        let d2 = (y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2);
        let ny = 1.0 - y[0] * y[0] - y[1] * y[1];
        let nz = 1.0 - z[0] * z[0] - z[1] * z[1];
        let exact = (1.0 + 2.0 * d2 / (ny * nz)).acosh();
        let d = distance(&m, &y, &z, &o).unwrap();
        assert!((d - exact).abs() <= 1e-6, "{y:?} {z:?}: {d} vs {exact}");
    }
}

#[test]
fn sphere_distance_is_great_circle_angle() {
    let m = zoo::by_name("sphere").unwrap();
    let lift = |p: [f64; 2]| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [2.0 * p[0] / (1.0 + r2), 2.0 * p[1] / (1.0 + r2), (r2 - 1.0) / (1.0 + r2)]
    };
    let y = [0.2, 0.1];
    let z = [-0.4, 0.5];
    let (a, b) = (lift(y), lift(z));
    let exact = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).acos();
    let d = distance(&m, &y, &z, &ShootOptions::default()).unwrap();
    assert!((d - exact).abs() <= 1e-6, "{d} vs {exact}");
    assert!(exact < PI);
}

#[test]
fn shooting_reports_the_velocity_length() {
    let m = zoo::by_name("randers_flat").unwrap();
    let r = connect(&m, &[0.0, 0.0], &[0.0, 1.0], &ShootOptions::default()).unwrap();
    assert!((r.velocity[0]).abs() <= 1e-9 && (r.velocity[1] - 1.0).abs() <= 1e-9);
    assert!((r.length - 1.0).abs() <= 1e-9);
}

#[test]
fn poincare_convexity_reaches_grid_max() {
    let m = zoo::by_name("poincare").unwrap();
    let opts = ConvexityOptions { samples_per_radius: 6, rank_samples: 2, ..Default::default() };
    let r = estimate_convexity_radii(&m, &[0.0, 0.0], &[0.5, 1.0], &opts).unwrap();
    assert_eq!(r.epsilon, 1.0, "{:?}", r.failures);
    assert!(r.failures.is_empty());
    assert_eq!(r.eta, 3.0);
    assert!((r.epsilon_tilde - 1.0 / 3.0).abs() <= 1e-15);
}

#[test]
fn poincare_has_no_escaping_geodesics() {
    let m = zoo::by_name("poincare").unwrap();
    let found = check_uniqueness_escape(&m, &[0.0, 0.0], &[0.3, 0.1], 1.0, &ShootOptions::default()).unwrap();
    assert!(found.is_empty(), "{found:?}");
}

#[test]
fn empty_metric_set_passes() {
    let r = verify::run_all(&[], 0, &small_config());
    assert!(r.pass);
    assert!(r.metrics.is_empty());
}

#[test]
fn quartic_is_rejected_by_the_suite() {
    let specs = vec![zoo::spec_by_name("euclidean").unwrap(), zoo::spec_by_name("nonconvex_quartic").unwrap()];
    let r = verify::run_all(&specs, 0, &small_config());
    assert!(!r.pass);
    assert!(r.metrics[0].pass());
    assert!(!r.metrics[1].admitted);
    assert!(r.metrics[1].rejection.is_some());
}

#[test]
fn suite_is_deterministic_and_replayable() {
    let specs = vec![zoo::spec_by_name("poincare").unwrap()];
    let a = verify::run_all(&specs, 7, &small_config());
    let b = verify::run_all(&specs, 7, &small_config());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a.pass, "{}", serde_json::to_string_pretty(&a).unwrap());

    let m = zoo::by_name("poincare").unwrap();
    for check in [Check::FHomogeneity, Check::EnergyConservation, Check::GaussNorm, Check::RadialMinimality, Check::FundamentalInequality] {
        let report = a.find("poincare", check).unwrap();
        let Some(v) = verify::replay(&m, report).unwrap() else { continue };
        let scale = report.max_residual.abs().max(1e-300);
        assert!((v - report.max_residual).abs() <= 0.01 * scale, "{check:?}: {v} vs {}", report.max_residual);
    }
}

#[test]
fn expression_randers_matches_builtin() {
    let expr = zoo::by_name("randers_expr").unwrap();
    let built = zoo::by_name("randers_flat").unwrap();
    for k in 0..24 {
        let a = k as f64 * 0.7;
        let x = [0.3 * a.sin(), -0.2 * a.cos()];
        let y = [a.cos() * (1.0 + 0.1 * k as f64), a.sin()];
        let ge = expr.fundamental_tensor(&x, &y).unwrap().g;
        let gb = built.fundamental_tensor(&x, &y).unwrap().g;
        assert!((ge - gb).abs().max() <= 1e-10);
    }
}

#[test]
fn json_spec_round_trip() {
    for spec in zoo::zoo_specs() {
        let text = spec.to_json();
        let back = MetricSpec::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let m = Metric::from_json(&text).unwrap();
        assert_eq!(m.name(), spec.name().unwrap());
    }
}
