//! Sample generation and per-sample residuals for every check.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tolerances::{CONTROL_FLOOR, FUNDAMENTAL_STRICT_FLOOR, RADIAL_STRICT_FLOOR, STRICT_AMPLITUDE};
use super::{Check, CheckReport, Witness};
use crate::connection::{chern_coefficients, make_admissible_perturbation, make_inadmissible_control, perturbed_spray, spray_coefficients};
use crate::connectivity::{distance, ShootOptions};
use crate::error::{FinslerError, Result};
use crate::geodesic::{
    d_exp, exp_map, image_length, integrate_backward, integrate_geodesic, integrate_with_spray, ImageVelocity,
    IntegrateOptions, SampledCurve,
};
use crate::metric::{norm, Metric, MetricSpec};
use crate::sampling::{self, stream_id, SeededRng};

const MAX_ERRORS: usize = 5;
/// Floor for the Chern contraction residual denominator, relative to `F²`.
const CHERN_FLOOR: f64 = 1e-3;
/// Step for the many short integrations behind image lengths.
const RADIAL_STEP: f64 = 1e-2;
const RADIAL_SAMPLES: usize = 17;
const ADMISSION_FLAGS: usize = 32;
/// Chart size of the perturbation acceleration in the family checks.
const FAMILY_ACCEL: f64 = 0.05;

fn rng_for(seed: u64, check: &str, metric: &Metric) -> SeededRng {
    sampling::rng(seed, stream_id(&format!("{check}/{}", metric.name())))
}

fn scaled(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|a| a * c).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + q).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// `floor / margin`, or `f64::MAX` when the margin is not positive.
fn lower_bound(floor: f64, margin: f64) -> f64 {
    if margin > 0.0 {
        floor / margin
    } else {
        f64::MAX
    }
}

struct Acc {
    check: Check,
    samples: usize,
    max: f64,
    witness: Option<Witness>,
    errors: Vec<String>,
}

impl Acc {
    fn record(&mut self, r: f64, w: &Witness) {
        self.samples += 1;
        if self.witness.is_none() || r > self.max {
            self.max = r;
            self.witness = Some(w.clone());
        }
    }

    fn error(&mut self, e: &FinslerError, w: Option<&Witness>) {
        self.samples += 1;
        if self.errors.len() < MAX_ERRORS {
            self.errors.push(e.to_string());
        }
        if self.max < f64::MAX {
            self.max = f64::MAX;
            self.witness = w.cloned();
        }
    }

    fn report(self, metric: &Metric) -> CheckReport {
        let tolerance = self.check.tolerance();
        let mut notes = Vec::new();
        if self.samples == 0 {
            notes.push("no applicable samples".into());
        }
        CheckReport {
            check: self.check,
            metric: metric.name().into(),
            samples: self.samples,
            max_residual: self.max,
            tolerance,
            pass: self.errors.is_empty() && self.max <= tolerance,
            witness: self.witness,
            errors: self.errors,
            notes,
        }
    }
}

type GroupFn = fn(&Metric, &Witness) -> Result<Vec<f64>>;

/// Evaluates a group of checks on shared samples. A NaN residual marks a
/// check that does not apply to that sample.
fn run_group(checks: &[Check], metric: &Metric, witnesses: Vec<Result<Witness>>, f: GroupFn) -> Vec<CheckReport> {
    let mut accs: Vec<Acc> =
        checks.iter().map(|&check| Acc { check, samples: 0, max: 0.0, witness: None, errors: Vec::new() }).collect();
    for w in witnesses {
        match w {
            Err(e) => accs.iter_mut().for_each(|a| a.error(&e, None)),
            Ok(w) => match f(metric, &w) {
                Ok(rs) => {
                    for (a, r) in accs.iter_mut().zip(rs) {
                        if !r.is_nan() {
                            a.record(r, &w);
                        }
                    }
                }
                Err(e) => accs.iter_mut().for_each(|a| a.error(&e, Some(&w))),
            },
        }
    }
    accs.into_iter().map(|a| a.report(metric)).collect()
}

/// Single residual of `check` at a witness; `None` if it does not apply.
pub(super) fn residual(check: Check, metric: &Metric, w: &Witness) -> Result<Option<f64>> {
    let (f, idx): (GroupFn, usize) = match check {
        Check::FHomogeneity => (algebra_residuals, 0),
        Check::GHomogeneity => (algebra_residuals, 1),
        Check::NormReproduction => (algebra_residuals, 2),
        Check::PositiveDefinite => (algebra_residuals, 3),
        Check::EnergyConservation => (energy_residuals, 0),
        Check::ChernContraction => (chern_residuals, 0),
        Check::ChernRiemannian => (chern_residuals, 1),
        Check::GaussNorm => (gauss_residuals, 0),
        Check::GaussOrthogonality => (gauss_residuals, 1),
        Check::RadialMinimality => (radial_residuals, 0),
        Check::RadialStrictness => (radial_residuals, 1),
        Check::FundamentalInequality => (fundamental_residuals, 0),
        Check::FundamentalStrictness => (fundamental_residuals, 1),
        Check::QuadraticGrowth => (growth_residuals, 0),
        Check::FamilyInvariance => (family_residuals, 0),
        Check::InadmissibleControl => (family_residuals, 1),
        Check::Admission => (admission_residuals, 0),
    };
    let r = f(metric, w)?[idx];
    Ok((!r.is_nan()).then_some(r))
}

fn flags(metric: &Metric, rng: &mut SeededRng, count: usize, frac: f64, f_lo: f64, f_hi: f64) -> Vec<Result<(Vec<f64>, Vec<f64>)>> {
    (0..count).map(|_| sampling::flag(metric, frac, f_lo, f_hi, rng)).collect()
}

fn admission_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    Ok(vec![if metric.fundamental_tensor(&w.x, &w.y).is_ok() { 0.0 } else { 1.0 }])
}

/// Samples the fundamental tensor over the domain; any flag where it fails
/// to be positive definite rejects the metric.
pub fn check_admission(metric: &Metric, seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, "admission", metric);
    let mut acc = Acc { check: Check::Admission, samples: 0, max: 0.0, witness: None, errors: Vec::new() };
    for f in flags(metric, &mut rng, ADMISSION_FLAGS, 0.9, 0.5, 2.0) {
        match f {
            Ok((x, y)) => {
                let w = Witness { x, y, extra: vec![], params: vec![] };
                match metric.fundamental_tensor(&w.x, &w.y) {
                    Ok(_) => acc.record(0.0, &w),
                    Err(e) => {
                        if acc.errors.len() < MAX_ERRORS {
                            acc.errors.push(e.to_string());
                        }
                        acc.record(1.0, &w);
                    }
                }
            }
            Err(e) => acc.error(&e, None),
        }
    }
    let mut r = acc.report(metric);
    r.pass = r.max_residual <= r.tolerance;
    r
}

fn algebra_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let lambda = w.params[0];
    let f = metric.eval(&w.x, &w.y)?;
    let fl = metric.eval(&w.x, &scaled(&w.y, lambda))?;
    let t = metric.fundamental_tensor(&w.x, &w.y)?;
    let tl = metric.fundamental_tensor(&w.x, &scaled(&w.y, lambda))?;
    let gmax = t.g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![
        (fl - lambda * f).abs() / (lambda * f),
        max_abs_diff(tl.g.as_slice(), t.g.as_slice()) / gmax,
        (t.inner(&w.y, &w.y) - f * f).abs() / (f * f),
        t.condition,
    ])
}

/// 1-homogeneity of F, 0-homogeneity of g, `yᵀgy = F²` and positive
/// definiteness at seeded flags and scalings.
pub fn check_algebra(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "algebra", metric);
    let ws = flags(metric, &mut rng.clone(), count, 0.9, 0.1, 10.0)
        .into_iter()
        .map(|f| {
            let lambda = 10f64.powf(rng.gen_range(-1.0..1.0));
            f.map(|(x, y)| Witness { x, y, extra: vec![], params: vec![lambda] })
        })
        .collect();
    run_group(
        &[Check::FHomogeneity, Check::GHomogeneity, Check::NormReproduction, Check::PositiveDefinite],
        metric,
        ws,
        algebra_residuals,
    )
}

fn energy_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let sol = integrate_geodesic(metric, &w.x, &w.y, 1.0, &IntegrateOptions::default())?;
    let f0 = sol.f_values[0];
    Ok(vec![sol.f_values.iter().map(|f| (f - f0).abs() / f0).fold(0.0, f64::max)])
}

/// Relative F-drift along geodesics on `[0, 1]` at the default step.
pub fn check_energy_conservation(metric: &Metric, seed: u64, count: usize) -> CheckReport {
    let mut rng = rng_for(seed, "energy", metric);
    let ws = flags(metric, &mut rng, count, 0.5, 0.1, 1.0)
        .into_iter()
        .map(|f| f.map(|(x, y)| Witness { x, y, extra: vec![], params: vec![] }))
        .collect();
    run_group(&[Check::EnergyConservation], metric, ws, energy_residuals).remove(0)
}

fn is_riemannian(metric: &Metric) -> bool {
    matches!(metric.spec(), MetricSpec::Euclidean { .. } | MetricSpec::RiemannianConformal { .. })
}

/// Christoffel symbols of a Riemannian metric from Richardson-extrapolated
/// central differences of `g` in `x`, index `(i*n + j)*n + k`.
fn christoffel_fd(metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = metric.n();
    let h = 1e-3 * (1.0 + norm(x));
    let g_at = |m: usize, d: f64| -> Result<Vec<f64>> {
        let mut xs = x.to_vec();
        xs[m] += d;
        Ok(metric.fundamental_tensor(&xs, y)?.g.as_slice().to_vec())
    };
    let mut dg = vec![0.0; n * n * n];
    for m in 0..n {
        let (cp, cm) = (g_at(m, h)?, g_at(m, -h)?);
        let (fp, fm) = (g_at(m, h / 2.0)?, g_at(m, -h / 2.0)?);
        for a in 0..n * n {
            let coarse = (cp[a] - cm[a]) / (2.0 * h);
            let fine = (fp[a] - fm[a]) / h;
            dg[m * n * n + a] = (4.0 * fine - coarse) / 3.0;
        }
    }
    // column-major storage is symmetric here, so (a, b) order is immaterial
    let d = |m: usize, a: usize, b: usize| dg[m * n * n + a * n + b];
    let g_inv = metric.fundamental_tensor(x, y)?.g_inv;
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] =
                    0.5 * (0..n).map(|l| g_inv[(i, l)] * (d(j, l, k) + d(k, l, j) - d(l, j, k))).sum::<f64>();
            }
        }
    }
    Ok(out)
}

fn chern_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let gamma = chern_coefficients(metric, &w.x, &w.y)?;
    let two_g = scaled(&spray_coefficients(metric, &w.x, &w.y)?, 2.0);
    let f = metric.eval(&w.x, &w.y)?;
    let scale = two_g.iter().fold(CHERN_FLOOR * f * f, |m, v| m.max(v.abs()));
    let contraction = max_abs_diff(&gamma.contract(&w.y, &w.y), &two_g) / scale;
    let riemannian = if is_riemannian(metric) {
        let oracle = christoffel_fd(metric, &w.x, &w.y)?;
        let big = oracle.iter().fold(CHERN_FLOOR, |m, v| m.max(v.abs()));
        max_abs_diff(&gamma.gamma1, &oracle) / big
    } else {
        f64::NAN
    };
    Ok(vec![contraction, riemannian])
}

/// `Γ(y, y) = 2G`, and agreement with Christoffel symbols on Riemannian
/// metrics.
pub fn check_chern(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "chern", metric);
    let ws = flags(metric, &mut rng, count, 0.5, 0.1, 1.0)
        .into_iter()
        .map(|f| f.map(|(x, y)| Witness { x, y, extra: vec![], params: vec![] }))
        .collect();
    let mut out = run_group(&[Check::ChernContraction, Check::ChernRiemannian], metric, ws, chern_residuals);
    if !is_riemannian(metric) {
        out.pop();
    }
    out
}

fn gauss_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let opts = IntegrateOptions::default();
    let (x, big_x, big_y) = (&w.x, &w.y, &w.extra[0]);
    let q = exp_map(metric, x, big_x, &opts)?;
    let jx = d_exp(metric, x, big_x, big_x, &opts)?;
    let jy = d_exp(metric, x, big_x, big_y, &opts)?;
    let f = metric.eval(x, big_x)?;
    let t = metric.fundamental_tensor(&q, &jx)?;
    let norm_res = (f - metric.eval(&q, &jx)?).abs() / f;
    let orth_res = t.inner(&jx, &jy).abs() / (f * t.inner(&jy, &jy).sqrt());
    Ok(vec![norm_res, orth_res])
}

/// `F(x, X) = F(Exp X, DExp X)` and g-orthogonality of `DExp X`, `DExp Y`
/// for `Y ⊥ X`.
pub fn check_gauss_lemma(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "gauss", metric);
    let ws = (0..count)
        .map(|_| {
            let (x, y) = sampling::flag(metric, 0.5, 0.1, 1.0, &mut rng)?;
            let z = sampling::orthogonal_to(metric, &x, &y, &mut rng)?;
            Ok(Witness { x, y, extra: vec![z], params: vec![] })
        })
        .collect();
    run_group(&[Check::GaussNorm, Check::GaussOrthogonality], metric, ws, gauss_residuals)
}

fn radial_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let (x, big_x, big_w) = (&w.x, &w.y, &w.extra[0]);
    let (amp, k) = (w.params[0], w.params[1]);
    let om = k * std::f64::consts::PI;
    let s: Vec<f64> = (0..RADIAL_SAMPLES).map(|j| j as f64 / (RADIAL_SAMPLES - 1) as f64).collect();
    let pts = s.iter().map(|&t| add(&scaled(big_x, t), &scaled(big_w, amp * (om * t).sin()))).collect();
    let vel = s.iter().map(|&t| add(big_x, &scaled(big_w, amp * om * (om * t).cos()))).collect();
    let curve = SampledCurve::with_velocities(s, pts, vel)?;
    let l = image_length(metric, x, &curve, ImageVelocity::Chain, &IntegrateOptions::with_step(RADIAL_STEP))?;
    let f = metric.eval(x, big_x)?;
    let violation = (f - l).max(0.0) / f;
    let strict = if amp >= STRICT_AMPLITUDE { lower_bound(RADIAL_STRICT_FLOOR, (l - f) / f) } else { f64::NAN };
    Ok(vec![violation, strict])
}

/// Images under Exp of perturbed radial segments `sX + a·sin(kπs)W`, with
/// `W ⊥ X` and `F(x, W) = F(x, X)`, are never shorter than `F(x, X)`, and
/// strictly longer once `a ≥ 5%`.
pub fn check_radial_minimality(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "radial", metric);
    let ws = (0..count)
        .map(|i| {
            let (x, y) = sampling::flag(metric, 0.5, 0.1, 1.0, &mut rng)?;
            let z = sampling::orthogonal_to(metric, &x, &y, &mut rng)?;
            let z = scaled(&z, metric.eval(&x, &y)? / metric.eval(&x, &z)?);
            let amp = if i == 0 { 0.0 } else { rng.gen_range(0.0..0.3) };
            let k = rng.gen_range(1..=2) as f64;
            Ok(Witness { x, y, extra: vec![z], params: vec![amp, k] })
        })
        .collect();
    run_group(&[Check::RadialMinimality, Check::RadialStrictness], metric, ws, radial_residuals)
}

fn fundamental_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let tau = w.params[0];
    let fz = metric.eval(&w.x, &w.y)?;
    let gap = (metric.eval(&w.x, &add(&w.y, &scaled(&w.extra[0], tau)))? - fz) / fz;
    Ok(if tau == 0.0 {
        vec![gap.abs(), f64::NAN]
    } else {
        vec![(-gap).max(0.0), lower_bound(FUNDAMENTAL_STRICT_FLOOR, gap)]
    })
}

/// `F(x, Z + τY) ≥ F(x, Z)` for `Y` g_Z-orthogonal to `Z`, with equality
/// only at `τ = 0`.
pub fn check_fundamental_inequality(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "fundamental", metric);
    let ws = (0..count)
        .map(|i| {
            let (x, z) = sampling::flag(metric, 0.9, 0.1, 10.0, &mut rng)?;
            let t = metric.fundamental_tensor(&x, &z)?;
            let y = sampling::orthogonal_to(metric, &x, &z, &mut rng)?;
            let y = scaled(&y, (t.inner(&z, &z) / t.inner(&y, &y)).sqrt());
            let tau = [0.0, 0.1, 1.0, 10.0][i % 4];
            Ok(Witness { x, y: z, extra: vec![y], params: vec![tau] })
        })
        .collect();
    run_group(&[Check::FundamentalInequality, Check::FundamentalStrictness], metric, ws, fundamental_residuals)
}

fn family_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let admissible = w.params[0] != 0.0;
    let pert = if admissible {
        make_admissible_perturbation(metric, &w.extra[0])?
    } else {
        make_inadmissible_control(metric, &w.extra[0])?
    };
    let base = integrate_geodesic(metric, &w.x, &w.y, 1.0, &IntegrateOptions::default())?;
    // the control changes F along the path, so the drift monitor is relaxed
    let loose = IntegrateOptions { drift_tol: 1.0, ..IntegrateOptions::default() };
    let spray = |x: &[f64], v: &[f64]| perturbed_spray(metric, x, v, &pert);
    let moved = integrate_with_spray(metric, &w.x, &w.y, 1.0, &loose, &spray)?;
    let dev = norm(&add(moved.endpoint(), &scaled(base.endpoint(), -1.0)));
    Ok(if admissible { vec![dev, f64::NAN] } else { vec![f64::NAN, lower_bound(CONTROL_FLOOR, dev)] })
}

/// Geodesics of the spray perturbed by an admissible `Ñ = h ⊗ V` coincide
/// with the originals; the inadmissible `δ ⊗ V` visibly moves them.
pub fn check_family_invariance(metric: &Metric, seed: u64, count: usize) -> Vec<CheckReport> {
    let mut rng = rng_for(seed, "family", metric);
    let mut ws = Vec::new();
    for _ in 0..count {
        let made = (|| {
            let (x, y) = sampling::flag(metric, 0.5, 0.5, 1.0, &mut rng)?;
            let s = sampling::orthogonal_to(metric, &x, &y, &mut rng)?;
            let y2: f64 = y.iter().map(|v| v * v).sum();
            let s = scaled(&s, 2.0 * FAMILY_ACCEL / (y2 * norm(&s)));
            Ok((x, y, s))
        })();
        match made {
            Ok((x, y, s)) => {
                ws.push(Ok(Witness { x: x.clone(), y: y.clone(), extra: vec![s.clone()], params: vec![1.0] }));
                ws.push(Ok(Witness { x, y, extra: vec![s], params: vec![0.0] }));
            }
            Err(e) => ws.push(Err(e)),
        }
    }
    run_group(&[Check::FamilyInvariance, Check::InadmissibleControl], metric, ws, family_residuals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthOptions {
    /// F-radius of the sphere the curve is tangent to.
    pub epsilon: f64,
    /// Window points on each side of `t₀`.
    pub half_points: usize,
    pub bisections: usize,
    /// Fit window as a fraction of `ε`.
    pub fit_fraction: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions { epsilon: 0.2, half_points: 3, bisections: 7, fit_fraction: 0.25 }
    }
}

/// Points `c(t_k)`, `t_k = kρ/K`, `k = ±1..±K`, of the geodesic through `p`
/// with velocity `v`.
fn window(metric: &Metric, p: &[f64], v: &[f64], rho: f64, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let opts = IntegrateOptions::default();
    let mut out = Vec::with_capacity(2 * k);
    for j in 1..=k {
        let t = rho * j as f64 / k as f64;
        out.push((t, exp_map(metric, p, &scaled(v, t), &opts)?));
        out.push((-t, integrate_backward(metric, p, v, -t, &opts)?.endpoint().to_vec()));
    }
    Ok(out)
}

/// `(t, d(x, c(t)) − d(x, c(0)))` over the window.
fn profile(metric: &Metric, x: &[f64], p: &[f64], v: &[f64], rho: f64, k: usize) -> Result<Vec<(f64, f64)>> {
    let shoot = ShootOptions::default();
    let d0 = distance(metric, x, p, &shoot)?;
    window(metric, p, v, rho, k)?
        .into_iter()
        .map(|(t, c)| Ok((t, distance(metric, x, &c, &shoot)? - d0)))
        .collect()
}

fn growth_residuals(metric: &Metric, w: &Witness) -> Result<Vec<f64>> {
    let (mu, rho, k) = (w.params[1], w.params[2], w.params[3] as usize);
    let prof = profile(metric, &w.x, &w.extra[0], &w.extra[1], rho, k)?;
    Ok(vec![prof.iter().map(|(t, dd)| (mu * t * t - dd).max(0.0)).fold(0.0, f64::max)])
}

/// Distance from `x` along a geodesic tangent to the F-sphere of radius `ε`
/// grows at least quadratically. μ is `0.4/ε` on Euclidean space and half a
/// least-squares fit elsewhere; the window half-width ρ is found by
/// bisection on `(0, 2ε]`.
pub fn check_quadratic_growth(metric: &Metric, opts: &GrowthOptions) -> CheckReport {
    let eps = opts.epsilon;
    let k = opts.half_points.max(1);
    let mut report = CheckReport {
        check: Check::QuadraticGrowth,
        metric: metric.name().into(),
        samples: 0,
        max_residual: f64::MAX,
        tolerance: Check::QuadraticGrowth.tolerance(),
        pass: false,
        witness: None,
        errors: Vec::new(),
        notes: Vec::new(),
    };
    let setup = (|| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = metric.n();
        let x = metric.anchor();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let big_x = metric.indicatrix_point(&x, &e1, eps)?;
        let t = metric.fundamental_tensor(&x, &big_x)?;
        let mut e2 = vec![0.0; n];
        e2[1] = 1.0;
        let c = t.inner(&e2, &big_x) / t.inner(&big_x, &big_x);
        let big_y = add(&e2, &scaled(&big_x, -c));
        let opts = IntegrateOptions::default();
        let p = exp_map(metric, &x, &big_x, &opts)?;
        let v = d_exp(metric, &x, &big_x, &big_y, &opts)?;
        let v = scaled(&v, 1.0 / metric.eval(&p, &v)?);
        Ok((x, big_x, p, v))
    })();
    let (x, big_x, p, v) = match setup {
        Ok(s) => s,
        Err(e) => {
            report.errors.push(e.to_string());
            return report;
        }
    };
    let mu = if matches!(metric.spec(), MetricSpec::Euclidean { .. }) {
        report.notes.push(format!("mu = 0.4/epsilon = {:e} (prescribed)", 0.4 / eps));
        0.4 / eps
    } else {
        match profile(metric, &x, &p, &v, opts.fit_fraction * eps, k) {
            Ok(prof) => {
                let num: f64 = prof.iter().map(|(t, d)| d * t * t).sum();
                let den: f64 = prof.iter().map(|(t, _)| t.powi(4)).sum();
                let fit = num / den;
                report.notes.push(format!("mu_fit = {fit:e}, mu = mu_fit/2 = {:e}", fit / 2.0));
                if !(fit > 0.0) {
                    report.errors.push("fitted mu is not positive".into());
                    return report;
                }
                fit / 2.0
            }
            Err(e) => {
                report.errors.push(format!("fit window: {e}"));
                return report;
            }
        }
    };
    let witness = |rho: f64| Witness {
        x: x.clone(),
        y: big_x.clone(),
        extra: vec![p.clone(), v.clone()],
        params: vec![eps, mu, rho, k as f64],
    };
    let tol = report.tolerance;
    let attempt = |rho: f64| -> (Witness, std::result::Result<f64, String>) {
        let w = witness(rho);
        let r = growth_residuals(metric, &w).map(|r| r[0]).map_err(|e| e.to_string());
        (w, r)
    };
    let (mut lo, mut hi) = (0.0, 2.0 * eps);
    let mut best: Option<(Witness, f64)> = None;
    let mut last = attempt(hi);
    let mut evaluations = 1;
    if matches!(last.1, Ok(r) if r <= tol) {
        lo = hi;
        best = Some((last.0.clone(), *last.1.as_ref().unwrap()));
    } else {
        for _ in 0..opts.bisections {
            let mid = 0.5 * (lo + hi);
            let cur = attempt(mid);
            evaluations += 1;
            match cur.1 {
                Ok(r) if r <= tol => {
                    lo = mid;
                    best = Some((cur.0, r));
                }
                _ => {
                    hi = mid;
                    last = cur;
                }
            }
        }
    }
    report.samples = evaluations * 2 * k;
    match best {
        Some((w, r)) => {
            report.notes.push(format!("rho = {lo:e} (epsilon = {eps:e})"));
            report.max_residual = r;
            report.witness = Some(w);
            report.pass = true;
        }
        None => {
            report.notes.push(format!("no window passed down to rho = {hi:e}"));
            match last.1 {
                Ok(r) => report.max_residual = r,
                Err(e) => report.errors.push(e),
            }
            report.witness = Some(last.0);
        }
    }
    report
}
