//! Geodesic spray, Berwald nonlinear connection, the horizontal coefficients
//! `Γ¹` of the canonical Finslerian connection, and admissible perturbations
//! of the connection family.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::metric::{norm, Metric};

/// Spray coefficients `G^i` and `P^i_j = ∂G^i/∂y^j` at a flag.
#[derive(Debug, Clone, Serialize)]
pub struct NonlinearConnection {
    #[serde(rename = "G")]
    pub g: Vec<f64>,
    /// Row `i`, column `j`.
    #[serde(rename = "P", serialize_with = "ser_matrix")]
    pub p: DMatrix<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

fn spd_factor(h: &[f64], n: usize, x: &[f64], y: &[f64]) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    DMatrix::from_row_slice(n, n, h).cholesky().ok_or_else(|| {
        FinslerError::Convexity(format!("g is not positive definite at x = {x:?}, y = {y:?}"))
    })
}

/// `G = ½ H⁻¹ (M y − ∂F²/∂x)` with `H = ∂²F²/∂y∂y`, `M = ∂²F²/∂y∂x`.
///
/// No flag validation; the integrator calls this in its inner loop.
pub(crate) fn spray_unchecked(metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = metric.n();
    if metric.is_minkowski() {
        return Ok(vec![0.0; n]);
    }
    let (mut h, my, gx) = metric.spray_parts(x, y)?;
    let mut g: Vec<f64> = (0..n).map(|l| 0.5 * (my[l] - gx[l])).collect();
    if !cholesky_solve(&mut h, &mut g, n) {
        return Err(FinslerError::Convexity(format!("g is not positive definite at x = {x:?}, y = {y:?}")));
    }
    Ok(g)
}

/// In-place Cholesky solve of `A z = b` for a small SPD row-major `A`;
/// avoids heap traffic in the integrator's inner loop.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// Spray coefficients only.
pub fn spray_coefficients(metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    metric.check_flag(x, y)?;
    spray_unchecked(metric, x, y)
}

/// Spray and Berwald connection `P = ∂G/∂y`, by one more exact
/// differentiation level.
pub fn spray(metric: &Metric, x: &[f64], y: &[f64]) -> Result<NonlinearConnection> {
    metric.check_flag(x, y)?;
    let n = metric.n();
    if metric.is_minkowski() {
        // still reject non-convex flags
        metric.fundamental_tensor(x, y)?;
        return Ok(NonlinearConnection { g: vec![0.0; n], p: DMatrix::zeros(n, n), x: x.to_vec(), y: y.to_vec() });
    }
    let (h, my, gx) = metric.spray_parts(x, y)?;
    let chol = spd_factor(&h, n, x, y)?;
    let rhs = DVector::from_iterator(n, (0..n).map(|l| 0.5 * (my[l] - gx[l])));
    let g = chol.solve(&rhs);
    let m = metric.mixed_yx(x, y)?;
    let t = metric.t_matrix(x, y)?;
    let c = metric.third_y(x, y)?;
    // H ∂_j G = ½ ∂_j r − (∂_j H) G
    let b = DMatrix::from_fn(n, n, |i, j| {
        let cg: f64 = (0..n).map(|l| c[(i * n + l) * n + j] * g[l]).sum();
        0.5 * (t[j * n + i] + m[i * n + j] - m[j * n + i]) - cg
    });
    let p = chol.solve(&b);
    Ok(NonlinearConnection { g: g.iter().copied().collect(), p, x: x.to_vec(), y: y.to_vec() })
}

/// `P` by central differences of `G` in `y`; cross-check of [`spray`].
pub fn spray_p_central(metric: &Metric, x: &[f64], y: &[f64], h: f64) -> Result<DMatrix<f64>> {
    metric.check_flag(x, y)?;
    let n = metric.n();
    let step = h * (1.0 + norm(y));
    let mut p = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j] += step;
        ym[j] -= step;
        let gp = spray_unchecked(metric, x, &yp)?;
        let gm = spray_unchecked(metric, x, &ym)?;
        for i in 0..n {
            p[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    Ok(p)
}

/// `Γ^{1i}_{jk}` at a flag, stored at `(i*n + j)*n + k`.
#[derive(Debug, Clone, Serialize)]
pub struct ChernCoefficients {
    pub n: usize,
    pub gamma1: Vec<f64>,
    /// `max |Γ^i_jk − Γ^i_kj|` before symmetrization.
    pub asymmetry: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ChernCoefficients {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma1[(i * self.n + j) * self.n + k]
    }

    /// `Γ^i_jk u^j v^k`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        s += self.get(i, j, k) * u[j] * v[k];
                    }
                }
                s
            })
            .collect()
    }

    /// Nested `[i][j][k]` form for serialization.
    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self.get(i, j, k)).collect()).collect()).collect()
    }
}

/// `2Γ^{1i}_{jk} = g^{im}(δ_j g_mk + δ_k g_mj − δ_m g_jk)` with horizontal
/// derivatives `δ_j = ∂_j − P^h_j ∂/∂y^h` of the Berwald connection.
pub fn chern_coefficients(metric: &Metric, x: &[f64], y: &[f64]) -> Result<ChernCoefficients> {
    let nl = spray(metric, x, y)?;
    let t = metric.fundamental_tensor(x, y)?;
    let n = metric.n();
    if metric.is_minkowski() {
        return Ok(ChernCoefficients { n, gamma1: vec![0.0; n * n * n], asymmetry: 0.0, x: x.to_vec(), y: y.to_vec() });
    }
    let dx = metric.base_yy(x, y)?;
    let c = metric.third_y(x, y)?;
    let idx = |a: usize, b: usize, d: usize| (a * n + b) * n + d;
    // δ_j g_mk
    let mut hd = vec![0.0; n * n * n];
    for j in 0..n {
        for m in 0..n {
            for k in 0..n {
                let vert: f64 = (0..n).map(|h| nl.p[(h, j)] * 0.5 * c[idx(h, m, k)]).sum();
                hd[idx(j, m, k)] = 0.5 * dx[idx(j, m, k)] - vert;
            }
        }
    }
    let mut raw = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += t.g_inv[(i, m)] * (hd[idx(j, m, k)] + hd[idx(k, m, j)] - hd[idx(m, j, k)]);
                }
                raw[idx(i, j, k)] = 0.5 * s;
            }
        }
    }
    let mut asymmetry: f64 = 0.0;
    let mut gamma1 = raw.clone();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                asymmetry = asymmetry.max((raw[idx(i, j, k)] - raw[idx(i, k, j)]).abs());
                gamma1[idx(i, j, k)] = 0.5 * (raw[idx(i, j, k)] + raw[idx(i, k, j)]);
            }
        }
    }
    Ok(ChernCoefficients { n, gamma1, asymmetry, x: x.to_vec(), y: y.to_vec() })
}

/// A curve sample with position, velocity and acceleration.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathResidual {
    pub max_residual: f64,
    pub worst_index: usize,
    pub samples: usize,
}

/// `max_t |c̈ + Γ¹(ċ, ċ)|` along a sampled curve.
pub fn check_path_condition(metric: &Metric, samples: &[PathSample]) -> Result<PathResidual> {
    let mut worst = PathResidual { max_residual: 0.0, worst_index: 0, samples: samples.len() };
    for (k, s) in samples.iter().enumerate() {
        let r = path_residual(metric, s)?;
        if r > worst.max_residual {
            worst.max_residual = r;
            worst.worst_index = k;
        }
    }
    Ok(worst)
}

pub(crate) fn path_residual(metric: &Metric, s: &PathSample) -> Result<f64> {
    let gamma = chern_coefficients(metric, &s.x, &s.v)?;
    let gvv = gamma.contract(&s.v, &s.v);
    Ok(norm(&gvv.iter().zip(&s.a).map(|(g, a)| g + a).collect::<Vec<_>>()))
}

/// `Ñ^i_jk = h_jk V^i`, or the inadmissible control `δ_jk V^i`.
#[derive(Debug, Clone)]
pub struct AdmissiblePerturbation {
    pub seed: Vec<f64>,
    admissible: bool,
}

pub fn make_admissible_perturbation(metric: &Metric, seed: &[f64]) -> Result<AdmissiblePerturbation> {
    if seed.len() != metric.n() || !seed.iter().all(|v| v.is_finite()) {
        return Err(FinslerError::Input(format!("seed must have {} finite components", metric.n())));
    }
    Ok(AdmissiblePerturbation { seed: seed.to_vec(), admissible: true })
}

/// The tensor `δ_jk V^i`, which violates `Ñ(y, y) = 0`.
pub fn make_inadmissible_control(metric: &Metric, seed: &[f64]) -> Result<AdmissiblePerturbation> {
    let mut p = make_admissible_perturbation(metric, seed)?;
    p.admissible = false;
    Ok(p)
}

impl AdmissiblePerturbation {
    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    /// `V = V_seed − (g(V_seed, y)/F²) y`, 0-homogeneous in `y`.
    pub fn v(&self, metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let t = metric.fundamental_tensor(x, y)?;
        let f2 = t.inner(y, y);
        let c = t.inner(&self.seed, y) / f2;
        Ok(self.seed.iter().zip(y).map(|(s, b)| s - c * b).collect())
    }

    /// The lower-index tensor: `h_jk` or `δ_jk`, row-major.
    fn lower(&self, metric: &Metric, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        let n = metric.n();
        if !self.admissible {
            return Ok(DMatrix::identity(n, n));
        }
        let t = metric.fundamental_tensor(x, y)?;
        let l = metric.ell(x, y)?;
        Ok(DMatrix::from_fn(n, n, |j, k| t.g[(j, k)] - l[j] * l[k]))
    }

    /// Full `Ñ^i_jk` at `(i*n + j)*n + k`.
    pub fn tensor(&self, metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = metric.n();
        let v = self.v(metric, x, y)?;
        let h = self.lower(metric, x, y)?;
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[(i * n + j) * n + k] = h[(j, k)] * v[i];
                }
            }
        }
        Ok(out)
    }

    /// `Ñ^i_jk y^j y^k`.
    pub fn contract_yy(&self, metric: &Metric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let v = self.v(metric, x, y)?;
        let h = self.lower(metric, x, y)?;
        let n = metric.n();
        let mut hyy = 0.0;
        for j in 0..n {
            for k in 0..n {
                hyy += h[(j, k)] * y[j] * y[k];
            }
        }
        Ok(v.iter().map(|vi| hyy * vi).collect())
    }
}

/// `G^i + ½ Ñ^i_jk y^j y^k`.
pub fn perturbed_spray(metric: &Metric, x: &[f64], y: &[f64], pert: &AdmissiblePerturbation) -> Result<Vec<f64>> {
    let g = spray_coefficients(metric, x, y)?;
    let ny = pert.contract_yy(metric, x, y)?;
    Ok(g.iter().zip(&ny).map(|(a, b)| a + 0.5 * b).collect())
}
