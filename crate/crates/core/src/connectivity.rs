//! Two-point geodesic problem by shooting, directed distance, and estimation
//! of convex-neighbourhood radii.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::geodesic::{curve_length, d_exp_matrix, flow, integrate_geodesic, GeodesicSolution, IntegrateOptions, SampledCurve};
use crate::metric::{norm, y_min_tol, Metric};
use crate::sampling::{self, stream_id};

const MAX_HALVINGS: usize = 30;
const MAX_SHRINKS: usize = 20;
const MULTISTART_SPREAD: f64 = 0.5;
const CONTINUATION_STAGES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultistartPolicy {
    /// Perturbed restarts only when the primary guess fails.
    OnFailure,
    /// Always run every restart and keep the shortest solution.
    Always,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub integrate: IntegrateOptions,
    /// Endpoint hit tolerance in chart units.
    pub tol: f64,
    pub max_iter: usize,
    pub multistart: usize,
    pub policy: MultistartPolicy,
    pub seed: u64,
    /// Additional initial velocities, always tried.
    pub extra_guesses: Vec<Vec<f64>>,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            integrate: IntegrateOptions::default(),
            tol: 1e-9,
            max_iter: 60,
            multistart: 8,
            policy: MultistartPolicy::OnFailure,
            seed: 0,
            extra_guesses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShootingResult {
    /// Initial velocity `X` with `Exp_y(X) = z`.
    pub velocity: Vec<f64>,
    pub iterations: usize,
    /// `|Exp_y(X) − z|` in chart units.
    pub residual: f64,
    pub converged: bool,
    /// `F(y, X)`, the length of the affinely parameterized geodesic.
    pub length: f64,
    /// Which initial guess produced it: 0 primary, then extras, then the
    /// continuation path, then restarts.
    pub start: usize,
    #[serde(skip)]
    pub geodesic: Option<GeodesicSolution>,
}

struct Attempt {
    velocity: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// Endpoint of `Exp_y(X)` or `None` on integration failure.
fn try_exp(metric: &Metric, y: &[f64], v: &[f64], opts: &IntegrateOptions) -> Result<Option<Vec<f64>>> {
    if norm(v) < y_min_tol(y) {
        return Ok(Some(y.to_vec()));
    }
    match flow(metric, y, v, opts) {
        Ok((e, _)) => Ok(Some(e)),
        Err(e) if e.is_numerical() || matches!(e, FinslerError::Convexity(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn newton(metric: &Metric, y: &[f64], z: &[f64], guess: &[f64], opts: &ShootOptions) -> Result<Attempt> {
    let mut v = guess.to_vec();
    let mut end = None;
    for _ in 0..MAX_SHRINKS {
        end = try_exp(metric, y, &v, &opts.integrate)?;
        if end.is_some() {
            break;
        }
        v.iter_mut().for_each(|c| *c *= 0.5);
    }
    let Some(mut end) = end else {
        return Ok(Attempt { velocity: v, iterations: 0, residual: f64::INFINITY, converged: false });
    };
    let mut r = sub(&end, z);
    let mut res = norm(&r);
    let mut it = 0;
    while it < opts.max_iter && res > opts.tol {
        it += 1;
        let j = match d_exp_matrix(metric, y, &v, &opts.integrate) {
            Ok(j) => j,
            Err(e) if e.is_numerical() => break,
            Err(e) => return Err(e),
        };
        let Some(delta) = j.lu().solve(&-DVector::from_column_slice(&r)) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(e) = try_exp(metric, y, &cand, &opts.integrate)? {
                let rn = sub(&e, z);
                let nn = norm(&rn);
                if nn < res {
                    v = cand;
                    end = e;
                    r = rn;
                    res = nn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let _ = end;
    Ok(Attempt { velocity: v, iterations: it, residual: res, converged: res <= opts.tol })
}

/// F-length of the chart segment from `y` to `z`, an upper bound for the
/// distance up to quadrature error.
fn segment_length(metric: &Metric, y: &[f64], z: &[f64]) -> Result<f64> {
    let d = sub(z, y);
    let seg = SampledCurve::from_fn(0.0, 1.0, 33, |s| y.iter().zip(&d).map(|(a, b)| a + s * b).collect())?;
    Ok(curve_length(metric, &seg)?.length)
}

/// `(z − y)` rescaled so that `F(y, X₀)` equals the length of the chart
/// segment from `y` to `z`.
pub fn initial_guess(metric: &Metric, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let d = sub(z, y);
    let l = segment_length(metric, y, z)?;
    let f = metric.eval(y, &d)?;
    Ok(d.iter().map(|c| c * l / f).collect())
}

/// Shoots at `y + (k/m)(z − y)` for `k = 1..m`, predicting each stage from
/// the previous solution, so that the result stays on the branch of short
/// geodesics.
fn continuation(metric: &Metric, y: &[f64], z: &[f64], opts: &ShootOptions) -> Result<Attempt> {
    let d = sub(z, y);
    let mut prev: Option<Vec<f64>> = None;
    let mut last = None;
    for k in 1..=CONTINUATION_STAGES {
        let frac = k as f64 / CONTINUATION_STAGES as f64;
        let zk: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + frac * b).collect();
        let guess = match &prev {
            Some(v) => v.iter().map(|c| c * k as f64 / (k - 1) as f64).collect(),
            None => initial_guess(metric, y, &zk)?,
        };
        let a = newton(metric, y, &zk, &guess, opts)?;
        if !a.converged {
            return Ok(a);
        }
        prev = Some(a.velocity.clone());
        last = Some(a);
    }
    Ok(last.expect("at least one stage"))
}

fn guesses(metric: &Metric, y: &[f64], z: &[f64], opts: &ShootOptions) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let base = initial_guess(metric, y, z)?;
    let mut primary = vec![base.clone()];
    for g in &opts.extra_guesses {
        if g.len() != metric.n() {
            return Err(FinslerError::Input("extra guess has the wrong dimension".into()));
        }
        primary.push(g.clone());
    }
    let mut rng = sampling::rng(opts.seed, stream_id("multistart"));
    let scale = norm(&base);
    let restarts = (0..opts.multistart)
        .map(|_| {
            let noise = sampling::gaussian_vector(metric.n(), &mut rng);
            let stretch = 0.5 + rand::Rng::gen::<f64>(&mut rng);
            base.iter().zip(&noise).map(|(b, e)| stretch * b + MULTISTART_SPREAD * scale * e).collect()
        })
        .collect();
    Ok((primary, restarts))
}

fn finish(metric: &Metric, y: &[f64], a: Attempt, start: usize, opts: &ShootOptions) -> Result<ShootingResult> {
    let length = metric.eval(y, &a.velocity)?;
    let geodesic = if norm(&a.velocity) >= y_min_tol(y) {
        integrate_geodesic(metric, y, &a.velocity, 1.0, &opts.integrate).ok()
    } else {
        None
    };
    Ok(ShootingResult {
        velocity: a.velocity,
        iterations: a.iterations,
        residual: a.residual,
        converged: a.converged,
        length,
        start,
        geodesic,
    })
}

fn distinct(a: &[f64], b: &[f64]) -> bool {
    norm(&sub(a, b)) > 1e-6 * (1.0 + norm(a))
}

fn check_endpoints(metric: &Metric, y: &[f64], z: &[f64]) -> Result<()> {
    for p in [y, z] {
        if p.len() != metric.n() || !p.iter().all(|c| c.is_finite()) {
            return Err(FinslerError::Input(format!("points must have {} finite coordinates", metric.n())));
        }
        if !metric.contains(p) {
            return Err(FinslerError::Domain { point: p.to_vec() });
        }
    }
    Ok(())
}

fn trivial(metric: &Metric) -> ShootingResult {
    ShootingResult {
        velocity: vec![0.0; metric.n()],
        iterations: 0,
        residual: 0.0,
        converged: true,
        length: 0.0,
        start: 0,
        geodesic: None,
    }
}

/// Every distinct converged geodesic from `y` to `z` found from the primary
/// guess, the extra guesses and (per policy) the seeded restarts, shortest
/// first. The best residual is returned when nothing converged.
pub fn connect_all(metric: &Metric, y: &[f64], z: &[f64], opts: &ShootOptions) -> Result<std::result::Result<Vec<ShootingResult>, f64>> {
    check_endpoints(metric, y, z)?;
    if y == z {
        return Ok(Ok(vec![trivial(metric)]));
    }
    let (primary, restarts) = guesses(metric, y, z, opts)?;
    let bound = segment_length(metric, y, z)? * (1.0 + 1e-6);
    let mut found: Vec<(Attempt, usize, f64)> = Vec::new();
    let mut best_residual = f64::INFINITY;
    let mut consider = |a: Attempt, idx: usize, found: &mut Vec<(Attempt, usize, f64)>| -> Result<()> {
        best_residual = best_residual.min(a.residual);
        if a.converged && found.iter().all(|(b, _, _)| distinct(&a.velocity, &b.velocity)) {
            let len = metric.eval(y, &a.velocity)?;
            found.push((a, idx, len));
        }
        Ok(())
    };
    let short = |found: &[(Attempt, usize, f64)]| found.iter().any(|(_, _, l)| *l <= bound);
    for (k, g) in primary.iter().enumerate() {
        let a = newton(metric, y, z, g, opts)?;
        consider(a, k, &mut found)?;
    }
    // nothing found is shorter than the chart segment: certainly not minimal
    if !short(&found) {
        let a = continuation(metric, y, z, opts)?;
        consider(a, primary.len(), &mut found)?;
    }
    if opts.policy == MultistartPolicy::Always || !short(&found) {
        for (k, g) in restarts.iter().enumerate() {
            let a = newton(metric, y, z, g, opts)?;
            consider(a, primary.len() + 1 + k, &mut found)?;
        }
    }
    if found.is_empty() {
        return Ok(Err(best_residual));
    }
    let mut out: Vec<ShootingResult> =
        found.into_iter().map(|(a, k, _)| finish(metric, y, a, k, opts)).collect::<Result<_>>()?;
    out.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.start.cmp(&b.start)));
    Ok(Ok(out))
}

/// Shortest converged geodesic from `y` to `z` by damped Newton shooting on
/// `Exp_y(X) − z`.
pub fn connect(metric: &Metric, y: &[f64], z: &[f64], opts: &ShootOptions) -> Result<ShootingResult> {
    match connect_all(metric, y, z, opts)? {
        Ok(mut all) => Ok(all.swap_remove(0)),
        Err(best_residual) => Err(FinslerError::NoGeodesic { best_residual }),
    }
}

/// Directed distance `d(y, z)`: length of the shortest geodesic found.
pub fn distance(metric: &Metric, y: &[f64], z: &[f64], opts: &ShootOptions) -> Result<f64> {
    Ok(connect(metric, y, z, opts)?.length)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    NonConvergence,
    MultipleSolutions,
    LengthExceedsEta,
    EscapeFromBall,
    RankDeficient,
    IntegrationFailure,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub radius: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusTrial {
    pub radius: f64,
    pub eta: f64,
    pub pairs: usize,
    pub rank_flags: usize,
    /// Smallest intrinsic singular value of `DExp` seen.
    pub min_singular_value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub x: Vec<f64>,
    pub epsilon: f64,
    pub eta: f64,
    pub epsilon_tilde: f64,
    pub eta_factor: f64,
    pub samples_tested: usize,
    pub trials: Vec<RadiusTrial>,
    pub failures: Vec<Failure>,
    pub failure_modes: Vec<FailureKind>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityOptions {
    pub samples_per_radius: usize,
    /// Flags per radius at which the `DExp` rank is checked.
    pub rank_samples: usize,
    pub rank_tol: f64,
    pub eta_factor: f64,
    pub seed: u64,
    pub shoot: ShootOptions,
}

impl Default for ConvexityOptions {
    fn default() -> Self {
        ConvexityOptions {
            samples_per_radius: 16,
            rank_samples: 4,
            rank_tol: 1e-3,
            eta_factor: 3.0,
            seed: 0,
            shoot: ShootOptions::default(),
        }
    }
}

/// Smallest singular value of `DExp_x` at `X` measured in the flag inner
/// products at both ends, and `det DExp`.
pub fn dexp_health(metric: &Metric, x: &[f64], big_x: &[f64], opts: &IntegrateOptions) -> Result<(f64, f64)> {
    let j = d_exp_matrix(metric, x, big_x, opts)?;
    let (q, w) = flow(metric, x, big_x, opts)?;
    let gx = metric.fundamental_tensor(x, big_x)?.g;
    let gq = metric.fundamental_tensor(&q, &w)?.g;
    let lx = gx.cholesky().ok_or_else(|| FinslerError::Convexity("g not positive definite".into()))?.l();
    let lq = gq.cholesky().ok_or_else(|| FinslerError::Convexity("g not positive definite".into()))?.l();
    let lx_inv_t = lx.transpose().try_inverse().ok_or_else(|| FinslerError::Convexity("singular g".into()))?;
    let a: DMatrix<f64> = lq.transpose() * &j * lx_inv_t;
    let sv = a.singular_values();
    Ok((sv.min(), j.determinant()))
}

/// Falsification search over an ascending radius grid: the reported ε is the
/// largest grid radius below the first failing one.
pub fn estimate_convexity_radii(metric: &Metric, x: &[f64], grid: &[f64], opts: &ConvexityOptions) -> Result<ConvexityReport> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(FinslerError::Input("grid must be ascending and positive".into()));
    }
    if !(opts.eta_factor >= 1.0) {
        return Err(FinslerError::Input("eta factor must be at least 1".into()));
    }
    if !metric.contains(x) {
        return Err(FinslerError::Domain { point: x.to_vec() });
    }
    let n = metric.n();
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    let mut epsilon = 0.0;
    let mut tested = 0;
    for (gi, &radius) in grid.iter().enumerate() {
        let eta = opts.eta_factor * radius;
        let mut rng = sampling::rng(opts.seed, stream_id("convexity") ^ gi as u64);
        let fail = |kind: FailureKind, detail: String, failures: &mut Vec<Failure>| {
            failures.push(Failure { kind, radius, detail });
        };
        let before = failures.len();
        let mut min_sv = f64::INFINITY;
        let point_in_ball = |rng: &mut sampling::SeededRng| -> Result<std::result::Result<Vec<f64>, FinslerError>> {
            let u = sampling::unit_vector(n, rng);
            let r = radius * rand::Rng::gen::<f64>(rng).powf(1.0 / n as f64);
            let v = metric.indicatrix_point(x, &u, r.max(1e-12))?;
            Ok(match flow(metric, x, &v, &opts.shoot.integrate) {
                Ok((p, _)) => Ok(p),
                Err(e) if e.is_numerical() || matches!(e, FinslerError::Convexity(_)) => Err(e),
                Err(e) => return Err(e),
            })
        };
        // rank health along rays out to the full radius
        for k in 0..opts.rank_samples {
            let u = sampling::unit_vector(n, &mut rng);
            let r = radius * (k + 1) as f64 / opts.rank_samples as f64;
            let v = metric.indicatrix_point(x, &u, r)?;
            match dexp_health(metric, x, &v, &opts.shoot.integrate) {
                Ok((sv, det)) => {
                    min_sv = min_sv.min(sv);
                    if !(sv >= opts.rank_tol) || !(det > 0.0) {
                        fail(FailureKind::RankDeficient, format!("F(x,X) = {r:.6}: sigma_min = {sv:e}, det = {det:e}"), &mut failures);
                    }
                }
                Err(e) if e.is_numerical() || matches!(e, FinslerError::Convexity(_)) => {
                    fail(FailureKind::IntegrationFailure, format!("F(x,X) = {r:.6}: {e}"), &mut failures);
                }
                Err(e) => return Err(e),
            }
        }
        let mut pairs = 0;
        if failures.len() == before {
            for s in 0..opts.samples_per_radius {
                let (y, z) = match (point_in_ball(&mut rng)?, point_in_ball(&mut rng)?) {
                    (Ok(y), Ok(z)) => (y, z),
                    (Err(e), _) | (_, Err(e)) => {
                        fail(FailureKind::IntegrationFailure, format!("pair {s}: {e}"), &mut failures);
                        break;
                    }
                };
                pairs += 1;
                let mut shoot = opts.shoot.clone();
                shoot.seed = opts.seed ^ ((gi as u64) << 32 | s as u64);
                let all = match connect_all(metric, &y, &z, &shoot) {
                    Ok(Ok(all)) => all,
                    Ok(Err(best)) => {
                        fail(FailureKind::NonConvergence, format!("pair {s}: best residual {best:e}"), &mut failures);
                        break;
                    }
                    Err(e) if e.is_numerical() => {
                        fail(FailureKind::IntegrationFailure, format!("pair {s}: {e}"), &mut failures);
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let best = &all[0];
                if !(best.length < eta) {
                    fail(FailureKind::LengthExceedsEta, format!("pair {s}: length {} >= eta {eta}", best.length), &mut failures);
                    break;
                }
                if all.iter().skip(1).any(|r| r.length < eta) {
                    fail(FailureKind::MultipleSolutions, format!("pair {s}: {} geodesics shorter than eta", all.iter().filter(|r| r.length < eta).count()), &mut failures);
                    break;
                }
                if let Some(sol) = &best.geodesic {
                    let (reach, bound) = chart_containment(metric, &y, sol, eta)?;
                    if reach > bound {
                        fail(FailureKind::EscapeFromBall, format!("pair {s}: chart reach {reach} > bound {bound}"), &mut failures);
                        break;
                    }
                }
            }
        }
        tested += pairs;
        let passed = failures.len() == before;
        trials.push(RadiusTrial { radius, eta, pairs, rank_flags: opts.rank_samples, min_singular_value: min_sv, passed });
        if !passed {
            break;
        }
        epsilon = radius;
    }
    let mut modes: Vec<FailureKind> = Vec::new();
    for f in &failures {
        if !modes.contains(&f.kind) {
            modes.push(f.kind);
        }
    }
    let mut notes = vec![format!("eta = {} * epsilon by convention", opts.eta_factor)];
    if epsilon == 0.0 {
        notes.push("no grid radius passed; the smallest radius already fails".into());
    }
    Ok(ConvexityReport {
        x: x.to_vec(),
        epsilon,
        eta: opts.eta_factor * epsilon,
        epsilon_tilde: epsilon / 3.0,
        eta_factor: opts.eta_factor,
        samples_tested: tested,
        trials,
        failures,
        failure_modes: modes,
        notes,
    })
}

/// Largest chart distance from `y` along the geodesic, and the chart radius
/// `η / m` that any point within F-distance `η` of `y` along this curve must
/// respect, with `m` the smallest unit-vector F value sampled on the curve.
fn chart_containment(metric: &Metric, y: &[f64], sol: &GeodesicSolution, eta: f64) -> Result<(f64, f64)> {
    let n = metric.n();
    let stride = (sol.len() / 32).max(1);
    let mut m = f64::INFINITY;
    let mut reach: f64 = 0.0;
    for k in (0..sol.len()).step_by(stride).chain(std::iter::once(sol.len() - 1)) {
        let p = &sol.x[k];
        reach = reach.max(norm(&sub(p, y)));
        for d in 0..16 {
            let a = d as f64 * std::f64::consts::PI / 8.0;
            let mut u = vec![0.0; n];
            u[0] = a.cos();
            u[1] = a.sin();
            m = m.min(metric.eval(p, &u)?);
        }
    }
    Ok((reach, eta / m * (1.0 + 1e-9)))
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeFinding {
    pub length: f64,
    pub velocity: Vec<f64>,
    /// Largest directed distance from `y` over the sampled interior points.
    pub max_distance_from_y: f64,
    pub eta: f64,
    pub escapes: bool,
}

/// For every non-minimizing geodesic from `y` to `z` found by multistart,
/// checks whether it leaves the F-ball of radius `η` around `y`.
pub fn check_uniqueness_escape(metric: &Metric, y: &[f64], z: &[f64], eta: f64, opts: &ShootOptions) -> Result<Vec<EscapeFinding>> {
    let mut all_opts = opts.clone();
    all_opts.policy = MultistartPolicy::Always;
    let all = match connect_all(metric, y, z, &all_opts)? {
        Ok(all) => all,
        Err(_) => return Ok(Vec::new()),
    };
    let mut probe = opts.clone();
    probe.extra_guesses.clear();
    probe.policy = MultistartPolicy::OnFailure;
    let mut findings = Vec::new();
    for r in all.iter().skip(1) {
        let Some(sol) = &r.geodesic else { continue };
        let mut far: f64 = 0.0;
        for k in 1..8 {
            let p = &sol.x[k * (sol.len() - 1) / 8];
            if let Ok(d) = distance(metric, y, p, &probe) {
                far = far.max(d);
            }
        }
        findings.push(EscapeFinding {
            length: r.length,
            velocity: r.velocity.clone(),
            max_distance_from_y: far,
            eta,
            escapes: far > eta,
        });
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn euclidean_shot_is_one_step() {
        let e = zoo::by_name("euclidean").unwrap();
        let r = connect(&e, &[0.0, 0.0], &[3.0, 4.0], &ShootOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.length - 5.0).abs() < 1e-12);
        assert!(r.iterations <= 1);
        assert!((r.velocity[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn same_point_is_trivial() {
        let p = zoo::by_name("poincare").unwrap();
        let r = connect(&p, &[0.1, 0.2], &[0.1, 0.2], &ShootOptions::default()).unwrap();
        assert_eq!(r.length, 0.0);
        assert!(r.geodesic.is_none());
    }

    #[test]
    fn randers_directed_lengths() {
        let r = zoo::by_name("randers_flat").unwrap();
        let o = ShootOptions::default();
        assert!((distance(&r, &[0.0, 0.0], &[1.0, 0.0], &o).unwrap() - 1.5).abs() < 1e-9);
        assert!((distance(&r, &[1.0, 0.0], &[0.0, 0.0], &o).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn poincare_distance_is_log3() {
        let p = zoo::by_name("poincare").unwrap();
        let r = connect(&p, &[0.0, 0.0], &[0.5, 0.0], &ShootOptions::default()).unwrap();
        assert!((r.length - 3f64.ln()).abs() < 1e-6);
        let sol = r.geodesic.as_ref().unwrap();
        assert!((sol.length() - r.length).abs() < 1e-8);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn euclidean_convexity_hits_grid_max() {
        let e = zoo::by_name("euclidean").unwrap();
        let grid = [0.5, 1.0, 2.0];
        let rep = estimate_convexity_radii(&e, &[0.0, 0.0], &grid, &ConvexityOptions::default()).unwrap();
        assert_eq!(rep.epsilon, 2.0);
        assert_eq!(rep.eta, 6.0);
        assert_eq!(rep.epsilon_tilde, 2.0 / 3.0);
        assert!(rep.failures.is_empty());
    }

    #[test]
    fn euclidean_has_no_second_geodesic() {
        let e = zoo::by_name("euclidean").unwrap();
        let f = check_uniqueness_escape(&e, &[0.0, 0.0], &[0.3, 0.0], 0.5, &ShootOptions::default()).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn sphere_long_way_round_escapes() {
        let m = zoo::by_name("sphere").unwrap();
        let th: f64 = 0.2;
        let (y, z) = ([1.0, 0.0], [th.cos(), th.sin()]);
        let opts = ShootOptions {
            extra_guesses: vec![vec![0.0, -(2.0 * std::f64::consts::PI - th)]],
            multistart: 0,
            ..ShootOptions::default()
        };
        let f = check_uniqueness_escape(&m, &y, &z, 0.3, &opts).unwrap();
        assert_eq!(f.len(), 1, "{f:?}");
        assert!((f[0].length - (2.0 * std::f64::consts::PI - th)).abs() < 1e-6);
        assert!(f[0].escapes && f[0].max_distance_from_y > 2.5);
    }

    #[test]
    fn sphere_convexity_radius_stays_below_pi() {
        let m = zoo::by_name("sphere").unwrap();
        let grid: Vec<f64> = (1..=8).map(|k| 0.5 * k as f64).collect();
        let opts = ConvexityOptions { samples_per_radius: 6, ..ConvexityOptions::default() };
        let rep = estimate_convexity_radii(&m, &[0.0, 0.0], &grid, &opts).unwrap();
        assert!(rep.epsilon > 0.0 && rep.epsilon < std::f64::consts::PI, "{rep:?}");
        assert!(!rep.failure_modes.is_empty());
    }
}
