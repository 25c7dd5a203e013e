//! Geodesic integration, the exponential map and its differential, and
//! Finslerian curve lengths.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::connection::spray_unchecked;
use crate::error::{FinslerError, Result};
use crate::metric::{norm, y_min_tol, Metric};
use crate::quadrature::{lagrange_derivative, simpson};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// RK4 step in the affine parameter.
    pub step: f64,
    /// Relative F-drift tolerance; drift beyond 100x aborts the integration.
    pub drift_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { step: 1e-3, drift_tol: 1e-6 }
    }
}

impl IntegrateOptions {
    pub fn with_step(step: f64) -> Self {
        IntegrateOptions { step, ..Default::default() }
    }
}

/// Sampled integral curve of the spray.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSolution {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub f_values: Vec<f64>,
    pub initial_x: Vec<f64>,
    pub initial_y: Vec<f64>,
    pub steps: usize,
    pub step: f64,
    /// `max_t |F(c, ċ) − F(x, X)| / F(x, X)`.
    pub max_drift: f64,
}

impl GeodesicSolution {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn endpoint(&self) -> &[f64] {
        self.x.last().expect("solution has samples")
    }

    pub fn end_velocity(&self) -> &[f64] {
        self.v.last().expect("solution has samples")
    }

    /// Length by Simpson quadrature of the recorded F values.
    pub fn length(&self) -> f64 {
        simpson(&self.t, &self.f_values)
    }

    /// Cumulative arc length at every sample, for unit-speed reparameterization.
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.t.len());
        let mut acc = 0.0;
        s.push(0.0);
        for k in 1..self.t.len() {
            acc += 0.5 * (self.t[k] - self.t[k - 1]) * (self.f_values[k] + self.f_values[k - 1]);
            s.push(acc);
        }
        s
    }
}

/// Spray coefficients `G(x, ẋ)` of an arbitrary spray; the flow is `ẍ = −2G`.
pub type SprayFn<'a> = dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + 'a;

struct Run {
    solution: Option<GeodesicSolution>,
    end_x: Vec<f64>,
    end_v: Vec<f64>,
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(b, c)| b + a * c).collect()
}

/// Core RK4 driver. `t_end` may be negative (backward integration).
/// `spray = None` selects the metric's own spray (with the exact straight
/// line shortcut for Minkowski metrics).
fn run(metric: &Metric, x0: &[f64], y0: &[f64], t_end: f64, opts: &IntegrateOptions, spray: Option<&SprayFn>, record: bool) -> Result<Run> {
    metric.check_flag(x0, y0)?;
    if !(opts.step > 0.0) || !opts.step.is_finite() {
        return Err(FinslerError::Input("step must be positive".into()));
    }
    if !t_end.is_finite() || t_end == 0.0 {
        return Err(FinslerError::Input("t_end must be finite and nonzero".into()));
    }
    let steps = ((t_end.abs() / opts.step).ceil() as usize).max(1);
    let h = t_end / steps as f64;
    let f0 = metric.eval_unchecked(x0, y0)?;
    let limit = 100.0 * opts.drift_tol;
    let mut sol = record.then(|| GeodesicSolution {
        t: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
        f_values: Vec::with_capacity(steps + 1),
        initial_x: x0.to_vec(),
        initial_y: y0.to_vec(),
        steps,
        step: h.abs(),
        max_drift: 0.0,
    });
    let push = |sol: &mut Option<GeodesicSolution>, t: f64, x: &[f64], v: &[f64], f: f64| {
        if let Some(s) = sol.as_mut() {
            s.t.push(t);
            s.x.push(x.to_vec());
            s.v.push(v.to_vec());
            s.f_values.push(f);
        }
    };
    push(&mut sol, 0.0, x0, y0, f0);

    if spray.is_none() && metric.is_minkowski() {
        // G = 0: straight lines, F constant
        for k in 1..=steps {
            let t = if k == steps { t_end } else { k as f64 * h };
            let x = axpy(t, y0, x0);
            if !metric.contains(&x) {
                return Err(FinslerError::DomainExit { t, point: x });
            }
            push(&mut sol, t, &x, y0, f0);
        }
        return Ok(Run { solution: sol, end_x: axpy(t_end, y0, x0), end_v: y0.to_vec() });
    }

    let mut x = x0.to_vec();
    let mut v = y0.to_vec();
    let mut max_drift: f64 = 0.0;
    let accel = |x: &[f64], v: &[f64], t: f64, last: &[f64]| -> Result<Vec<f64>> {
        if !metric.contains(x) || !v.iter().all(|c| c.is_finite()) {
            return Err(FinslerError::DomainExit { t, point: last.to_vec() });
        }
        let g = match spray {
            Some(f) => f(x, v)?,
            None => spray_unchecked(metric, x, v)?,
        };
        if !g.iter().all(|c| c.is_finite()) {
            return Err(FinslerError::DomainExit { t, point: last.to_vec() });
        }
        Ok(g.into_iter().map(|c| -2.0 * c).collect())
    };
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * h;
        let a1 = accel(&x, &v, t0, &x)?;
        let x2 = axpy(0.5 * h, &v, &x);
        let v2 = axpy(0.5 * h, &a1, &v);
        let a2 = accel(&x2, &v2, t0, &x)?;
        let x3 = axpy(0.5 * h, &v2, &x);
        let v3 = axpy(0.5 * h, &a2, &v);
        let a3 = accel(&x3, &v3, t0, &x)?;
        let x4 = axpy(h, &v3, &x);
        let v4 = axpy(h, &a3, &v);
        let a4 = accel(&x4, &v4, t0, &x)?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            v[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
        let t = if k == steps { t_end } else { k as f64 * h };
        if !metric.contains(&x) {
            return Err(FinslerError::DomainExit { t, point: x });
        }
        let f = metric.eval_unchecked(&x, &v)?;
        let drift = (f - f0).abs() / f0;
        if !(drift <= limit) {
            return Err(FinslerError::IntegrationQuality { drift, limit });
        }
        max_drift = max_drift.max(drift);
        push(&mut sol, t, &x, &v, f);
    }
    if let Some(s) = sol.as_mut() {
        s.max_drift = max_drift;
    }
    Ok(Run { solution: sol, end_x: x, end_v: v })
}

/// Integrates `ẍ = −2G(x, ẋ)` from `(x, y)` over `[0, t_end]` by classical RK4.
pub fn integrate_geodesic(metric: &Metric, x: &[f64], y: &[f64], t_end: f64, opts: &IntegrateOptions) -> Result<GeodesicSolution> {
    if !(t_end > 0.0) {
        return Err(FinslerError::Input("t_end must be positive".into()));
    }
    Ok(run(metric, x, y, t_end, opts, None, true)?.solution.expect("recorded"))
}

/// As [`integrate_geodesic`] with a caller-supplied spray, e.g. one carrying
/// a connection perturbation.
pub fn integrate_with_spray(
    metric: &Metric,
    x: &[f64],
    y: &[f64],
    t_end: f64,
    opts: &IntegrateOptions,
    spray: &SprayFn,
) -> Result<GeodesicSolution> {
    if !(t_end > 0.0) {
        return Err(FinslerError::Input("t_end must be positive".into()));
    }
    Ok(run(metric, x, y, t_end, opts, Some(spray), true)?.solution.expect("recorded"))
}

/// Backward integration over `[t_end, 0]`, `t_end < 0`; samples run from 0
/// towards `t_end`.
pub(crate) fn integrate_backward(metric: &Metric, x: &[f64], y: &[f64], t_end: f64, opts: &IntegrateOptions) -> Result<GeodesicSolution> {
    debug_assert!(t_end < 0.0);
    Ok(run(metric, x, y, t_end, opts, None, true)?.solution.expect("recorded"))
}

/// Endpoint and velocity at `t = 1` without recording samples.
pub(crate) fn flow(metric: &Metric, x: &[f64], big_x: &[f64], opts: &IntegrateOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    if metric.is_minkowski() {
        metric.check_flag(x, big_x)?;
        let end = axpy(1.0, big_x, x);
        if !metric.contains(&end) {
            return Err(FinslerError::DomainExit { t: 1.0, point: end });
        }
        return Ok((end, big_x.to_vec()));
    }
    let r = run(metric, x, big_x, 1.0, opts, None, false)?;
    Ok((r.end_x, r.end_v))
}

/// `Exp_x(X)`: the geodesic with initial data `(x, X)` at time 1.
pub fn exp_map(metric: &Metric, x: &[f64], big_x: &[f64], opts: &IntegrateOptions) -> Result<Vec<f64>> {
    if big_x.len() == metric.n() && big_x.iter().all(|v| v.is_finite()) && norm(big_x) < y_min_tol(x) {
        metric.eval(x, big_x)?;
        return Ok(x.to_vec());
    }
    Ok(flow(metric, x, big_x, opts)?.0)
}

/// `(DExp_x)_X V` by central differences with `h = 1e-5·(1 + |X|)` along the
/// unit direction of `V`.
pub fn d_exp(metric: &Metric, x: &[f64], big_x: &[f64], v: &[f64], opts: &IntegrateOptions) -> Result<Vec<f64>> {
    if v.len() != metric.n() || !v.iter().all(|c| c.is_finite()) {
        return Err(FinslerError::Input(format!("V must have {} finite components", metric.n())));
    }
    let nx = norm(big_x);
    if nx < y_min_tol(x) {
        metric.eval(x, big_x)?;
        return Ok(v.to_vec());
    }
    let nv = norm(v);
    if nv == 0.0 {
        return Ok(vec![0.0; v.len()]);
    }
    if metric.is_minkowski() {
        return Ok(v.to_vec());
    }
    let h = 1e-5 * (1.0 + nx);
    let xp = axpy(h / nv, v, big_x);
    let xm = axpy(-h / nv, v, big_x);
    let ep = exp_map(metric, x, &xp, opts)?;
    let em = exp_map(metric, x, &xm, opts)?;
    Ok(ep.iter().zip(&em).map(|(a, b)| (a - b) / (2.0 * h) * nv).collect())
}

/// Jacobian of `Exp_x` at `X`, column `i` = `d_exp(x, X, e_i)`.
pub fn d_exp_matrix(metric: &Metric, x: &[f64], big_x: &[f64], opts: &IntegrateOptions) -> Result<DMatrix<f64>> {
    let n = metric.n();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let col = d_exp(metric, x, big_x, &e, opts)?;
        for (r, c) in col.into_iter().enumerate() {
            j[(r, i)] = c;
        }
    }
    Ok(j)
}

/// Parameter values and points of a curve, with optional velocities.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Option<Vec<Vec<f64>>>,
}

pub const MIN_CURVE_SAMPLES: usize = 8;

impl SampledCurve {
    pub fn new(s: Vec<f64>, points: Vec<Vec<f64>>) -> Result<SampledCurve> {
        Self::build(s, points, None)
    }

    pub fn with_velocities(s: Vec<f64>, points: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>) -> Result<SampledCurve> {
        Self::build(s, points, Some(velocities))
    }

    fn build(s: Vec<f64>, points: Vec<Vec<f64>>, velocities: Option<Vec<Vec<f64>>>) -> Result<SampledCurve> {
        if s.len() < MIN_CURVE_SAMPLES || s.len() != points.len() {
            return Err(FinslerError::Input(format!(
                "a curve needs at least {MIN_CURVE_SAMPLES} samples with one point per parameter"
            )));
        }
        if let Some(v) = &velocities {
            if v.len() != s.len() {
                return Err(FinslerError::Input("one velocity per sample required".into()));
            }
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FinslerError::Input("curve parameters must be strictly increasing".into()));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(FinslerError::Input("consecutive curve points must be distinct".into()));
        }
        Ok(SampledCurve { s, points, velocities })
    }

    /// `s ↦ f(s)` on a uniform grid of `samples` points over `[a, b]`.
    pub fn from_fn(a: f64, b: f64, samples: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<SampledCurve> {
        let s: Vec<f64> = (0..samples).map(|k| a + (b - a) * k as f64 / (samples - 1).max(1) as f64).collect();
        let points = s.iter().map(|&t| f(t)).collect();
        SampledCurve::new(s, points)
    }

    pub fn velocities_or_estimate(&self) -> Vec<Vec<f64>> {
        match &self.velocities {
            Some(v) => v.clone(),
            None => lagrange_derivative(&self.s, &self.points),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveLength {
    pub length: f64,
    /// Samples whose velocity vanished and contributed `F(x, 0) = 0`.
    pub zero_velocity_samples: usize,
}

/// Directed Finslerian length `∫ F(c, ċ) ds` by composite Simpson.
pub fn curve_length(metric: &Metric, curve: &SampledCurve) -> Result<CurveLength> {
    let vel = curve.velocities_or_estimate();
    length_of(metric, &curve.s, &curve.points, &vel)
}

fn length_of(metric: &Metric, s: &[f64], pts: &[Vec<f64>], vel: &[Vec<f64>]) -> Result<CurveLength> {
    let mut zero = 0;
    let mut f = Vec::with_capacity(s.len());
    for (p, v) in pts.iter().zip(vel) {
        if v.iter().all(|c| *c == 0.0) {
            zero += 1;
        }
        f.push(metric.eval(p, v)?);
    }
    Ok(CurveLength { length: simpson(s, &f), zero_velocity_samples: zero })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageVelocity {
    /// `ḃ = DExp(b̃')` by the chain rule.
    Chain,
    /// Differentiate the sampled image points.
    Resample,
}

/// Length of `s ↦ Exp_x(b̃(s))` for a curve `b̃` in `T_xM`.
pub fn image_length(
    metric: &Metric,
    x: &[f64],
    tangent: &SampledCurve,
    method: ImageVelocity,
    opts: &IntegrateOptions,
) -> Result<f64> {
    let pts: Vec<Vec<f64>> = tangent.points.iter().map(|b| exp_map(metric, x, b, opts)).collect::<Result<_>>()?;
    let vel = match method {
        ImageVelocity::Chain => {
            let tv = tangent.velocities_or_estimate();
            tangent.points.iter().zip(&tv).map(|(b, w)| d_exp(metric, x, b, w, opts)).collect::<Result<Vec<_>>>()?
        }
        ImageVelocity::Resample => lagrange_derivative(&tangent.s, &pts),
    };
    Ok(length_of(metric, &tangent.s, &pts, &vel)?.length)
}
