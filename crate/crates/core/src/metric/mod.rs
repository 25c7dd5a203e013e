//! Finsler metrics on a single chart and their fundamental tensor.

mod jet;
mod spec;

pub use jet::{central_difference, Dir};
pub use spec::{DomainSpec, Entry, MetricSpec};

use nalgebra::{DMatrix, DVector};
use smallvec::SmallVec;

use crate::error::{FinslerError, Result};
use crate::expr::{parse_metric, Expr, MetricExpression};
use crate::scalar::Scalar;
use crate::sampling;

pub(crate) type Buf<T> = SmallVec<[T; 4]>;

const HOMOGENEITY_SAMPLES: usize = 32;
const HOMOGENEITY_TOL: f64 = 1e-7;

/// Open region of the chart on which the metric is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    All,
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        if !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self {
            Domain::All => true,
            Domain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                d2 < radius * radius
            }
        }
    }

    fn from_spec(spec: Option<&DomainSpec>, default: Domain, n: usize) -> Result<Domain> {
        let d = match spec {
            None => default,
            Some(DomainSpec::Named(s)) if s == "all" => Domain::All,
            Some(DomainSpec::Named(s)) if s == "unit_ball" => {
                Domain::Ball { center: vec![0.0; n], radius: 1.0 }
            }
            Some(DomainSpec::Named(s)) => {
                return Err(FinslerError::Input(format!("unknown domain {s:?}")))
            }
            Some(DomainSpec::Ball { center, radius }) => {
                if center.len() != n || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(FinslerError::Input("domain ball needs n center coordinates and a positive radius".into()));
                }
                Domain::Ball { center: center.clone(), radius: *radius }
            }
        };
        Ok(d)
    }

    fn to_spec(&self, n: usize) -> DomainSpec {
        match self {
            Domain::All => DomainSpec::Named("all".into()),
            Domain::Ball { center, radius } if *radius == 1.0 && center.iter().all(|c| *c == 0.0) && center.len() == n => {
                DomainSpec::Named("unit_ball".into())
            }
            Domain::Ball { center, radius } => DomainSpec::Ball { center: center.clone(), radius: *radius },
        }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Poincare,
    Sphere,
    Expr(Expr),
}

#[derive(Debug, Clone)]
enum Coef {
    Const(f64),
    Expr(Expr),
}

impl Coef {
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<T> {
        match self {
            Coef::Const(c) => Ok(T::cst(*c)),
            Coef::Expr(e) => e.eval(x, &[]),
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Euclidean,
    Conformal(Factor),
    Randers { alpha: Vec<Coef>, beta: Vec<Coef> },
    Expression(MetricExpression),
}

/// A validated Finsler metric `F(x, y)` on an open chart domain.
#[derive(Debug, Clone)]
pub struct Metric {
    kind: Kind,
    n: usize,
    domain: Domain,
    name: String,
    minkowski: bool,
    spec: MetricSpec,
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j` at a flag.
#[derive(Debug, Clone)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Ratio of extreme eigenvalues.
    pub condition: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FundamentalTensor {
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += u[i] * self.g[(i, j)] * v[j];
            }
        }
        s
    }
}

fn parse_coef(entry: &Entry, n: usize) -> Result<Coef> {
    match entry {
        Entry::Const(c) if c.is_finite() => Ok(Coef::Const(*c)),
        Entry::Const(_) => Err(FinslerError::Input("non-finite coefficient".into())),
        Entry::Expr(s) => {
            let e = parse_metric(s, n)?.ast;
            if e.depends_on_fiber() {
                return Err(FinslerError::InvalidMetric(format!(
                    "coefficient {s:?} may depend on x only"
                )));
            }
            Ok(match e.constant_value() {
                Some(c) => Coef::Const(c),
                None => Coef::Expr(e),
            })
        }
    }
}

pub fn y_min_tol(x: &[f64]) -> f64 {
    1e-8 * (1.0 + norm(x))
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl Metric {
    pub fn from_spec(spec: &MetricSpec) -> Result<Metric> {
        let n = spec.n();
        if n < 2 {
            return Err(FinslerError::Input("dimension must be at least 2".into()));
        }
        let ball = Domain::Ball { center: vec![0.0; n], radius: 1.0 };
        let (kind, default_domain, default_name) = match spec {
            MetricSpec::Euclidean { .. } => (Kind::Euclidean, Domain::All, "euclidean".to_string()),
            MetricSpec::RiemannianConformal { factor, .. } => match factor.as_str() {
                "poincare" => (Kind::Conformal(Factor::Poincare), ball, "poincare".into()),
                "sphere" => (Kind::Conformal(Factor::Sphere), Domain::All, "sphere".into()),
                src => {
                    let e = parse_metric(src, n)?.ast;
                    if e.depends_on_fiber() {
                        return Err(FinslerError::InvalidMetric("conformal factor may depend on x only".into()));
                    }
                    (Kind::Conformal(Factor::Expr(e)), Domain::All, "conformal".into())
                }
            },
            MetricSpec::Randers { alpha, beta, .. } => {
                if alpha.len() != n || alpha.iter().any(|r| r.len() != n) || beta.len() != n {
                    return Err(FinslerError::Input(format!("randers alpha must be {n}x{n} and beta length {n}")));
                }
                let a: Vec<Coef> =
                    alpha.iter().flatten().map(|e| parse_coef(e, n)).collect::<Result<_>>()?;
                let b: Vec<Coef> = beta.iter().map(|e| parse_coef(e, n)).collect::<Result<_>>()?;
                for i in 0..n {
                    for j in 0..i {
                        if alpha[i][j] != alpha[j][i] {
                            return Err(FinslerError::InvalidMetric("randers alpha must be symmetric".into()));
                        }
                    }
                }
                (Kind::Randers { alpha: a, beta: b }, Domain::All, "randers".into())
            }
            MetricSpec::Expression { source, .. } => {
                (Kind::Expression(parse_metric(source, n)?), Domain::All, "expression".into())
            }
        };
        let domain = Domain::from_spec(spec.domain(), default_domain, n)?;
        let minkowski = match &kind {
            Kind::Euclidean => true,
            Kind::Conformal(Factor::Expr(e)) => !e.depends_on_base(),
            Kind::Conformal(_) => false,
            Kind::Randers { alpha, beta } => {
                alpha.iter().chain(beta).all(|c| matches!(c, Coef::Const(_)))
            }
            Kind::Expression(e) => !e.depends_on_base(),
        };
        let metric = Metric {
            kind,
            n,
            domain,
            name: spec.name().map(str::to_string).unwrap_or(default_name),
            minkowski,
            spec: spec.clone(),
        };
        metric.validate()?;
        Ok(metric)
    }

    pub fn from_json(text: &str) -> Result<Metric> {
        Metric::from_spec(&MetricSpec::from_json(text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    /// The serialized spec with its domain made explicit.
    pub fn canonical_spec(&self) -> MetricSpec {
        let mut s = self.spec.clone();
        let d = Some(self.domain.to_spec(self.n));
        match &mut s {
            MetricSpec::Euclidean { domain, .. }
            | MetricSpec::RiemannianConformal { domain, .. }
            | MetricSpec::Randers { domain, .. }
            | MetricSpec::Expression { domain, .. } => *domain = d,
        }
        s
    }

    /// True when `F` does not depend on the base point.
    pub fn is_minkowski(&self) -> bool {
        self.minkowski
    }

    /// `F(x, y)` over any scalar type; no domain checks.
    pub fn f_generic<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        match &self.kind {
            Kind::Euclidean => Ok(euclid(y)),
            Kind::Conformal(factor) => {
                let phi = match factor {
                    Factor::Poincare => (T::cst(1.0) - sum_sq(x)).powi(-1).scale(2.0),
                    Factor::Sphere => (T::cst(1.0) + sum_sq(x)).powi(-1).scale(2.0),
                    Factor::Expr(e) => e.eval(x, &[])?,
                };
                Ok(phi * euclid(y))
            }
            Kind::Randers { alpha, beta } => {
                let n = self.n;
                let mut q = T::cst(0.0);
                let mut b = T::cst(0.0);
                for i in 0..n {
                    let mut row = T::cst(0.0);
                    for j in 0..n {
                        row = row + alpha[i * n + j].eval(x)? * y[j];
                    }
                    q = q + y[i] * row;
                    b = b + beta[i].eval(x)? * y[i];
                }
                if q.value() < 0.0 {
                    return Err(FinslerError::InvalidMetric("randers alpha is not positive definite here".into()));
                }
                Ok(q.sqrt() + b)
            }
            Kind::Expression(e) => e.eval(x, y),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(FinslerError::Input(format!("expected a point with {} coordinates, got {}", self.n, x.len())));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(FinslerError::Input("non-finite coordinate".into()));
        }
        if !self.domain.contains(x) {
            return Err(FinslerError::Domain { point: x.to_vec() });
        }
        Ok(())
    }

    fn check_vector(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n {
            return Err(FinslerError::Input(format!("expected a vector with {} components, got {}", self.n, y.len())));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(FinslerError::Input("non-finite vector component".into()));
        }
        Ok(())
    }

    /// Validates a flag `(x, y)` for derivative operations.
    pub fn check_flag(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check_point(x)?;
        self.check_vector(y)?;
        let tol = y_min_tol(x);
        let ny = norm(y);
        if ny < tol {
            return Err(FinslerError::ZeroSection { norm: ny, tol });
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n && self.domain.contains(x)
    }

    /// `F(x, y)`, with `F(x, 0) = 0`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_vector(y)?;
        if y.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let f = self.f_generic::<f64>(x, y)?;
        if !f.is_finite() {
            return Err(FinslerError::Eval { offset: 0, message: "non-finite metric value".into() });
        }
        Ok(f)
    }

    /// `F` without validation, for inner loops whose inputs are already checked.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if y.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        self.f_generic::<f64>(x, y)
    }

    pub fn fundamental_tensor(&self, x: &[f64], y: &[f64]) -> Result<FundamentalTensor> {
        self.check_flag(x, y)?;
        let n = self.n;
        let (_, _, h) = self.hessian_y(x, y)?;
        let g = DMatrix::from_fn(n, n, |i, j| 0.25 * (h[i * n + j] + h[j * n + i]));
        let eig = g.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.min();
        let lmax = eig.eigenvalues.max();
        if !(lmin > 0.0) || !lmax.is_finite() {
            return Err(FinslerError::Convexity(format!(
                "g has eigenvalue {lmin:e} at x = {x:?}, y = {y:?}"
            )));
        }
        let condition = lmax / lmin;
        let g_inv = g
            .clone()
            .cholesky()
            .ok_or_else(|| FinslerError::Convexity(format!("g is not positive definite at x = {x:?}, y = {y:?}")))?
            .inverse();
        Ok(FundamentalTensor { g, g_inv, condition, x: x.to_vec(), y: y.to_vec() })
    }

    /// `ℓ_i = ∂F/∂y^i`.
    pub fn ell(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_flag(x, y)?;
        (0..self.n).map(|i| self.f_partial(x, y, &[Dir::Fiber(i)])).collect()
    }

    /// The vector `ρ·u/F(x,u)` on the indicatrix of radius `ρ`.
    pub fn indicatrix_point(&self, x: &[f64], u: &[f64], rho: f64) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_vector(u)?;
        if u.iter().all(|v| *v == 0.0) {
            return Err(FinslerError::Input("direction must be nonzero".into()));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(FinslerError::Input("indicatrix radius must be positive".into()));
        }
        let f = self.eval(x, u)?;
        if !(f > 0.0) {
            return Err(FinslerError::InvalidMetric(format!("F(x, u) = {f} is not positive")));
        }
        Ok(u.iter().map(|v| rho * v / f).collect())
    }

    /// Positivity, homogeneity and Randers admissibility at seeded samples.
    fn validate(&self) -> Result<()> {
        let mut rng = sampling::rng(0x5eed_f1a5, 0);
        let mut points = vec![self.anchor()];
        for _ in 0..HOMOGENEITY_SAMPLES {
            points.push(sampling::point_in(&self.domain, self.n, 0.9, &mut rng));
        }
        for (k, x) in points.iter().enumerate() {
            if let Kind::Randers { alpha, beta } = &self.kind {
                self.check_randers_at(alpha, beta, x)?;
                if self.minkowski {
                    // constant coefficients: one point decides everything
                    if k == 0 {
                        continue;
                    }
                    break;
                }
            }
            let y = sampling::gaussian_vector(self.n, &mut rng);
            let f = self.f_generic::<f64>(x, &y).map_err(|e| {
                FinslerError::InvalidMetric(format!("cannot evaluate at x = {x:?}, y = {y:?}: {e}"))
            })?;
            if !(f > 0.0) || !f.is_finite() {
                return Err(FinslerError::InvalidMetric(format!("F = {f} at x = {x:?}, y = {y:?} is not positive")));
            }
            let lambda = [0.5, 2.0, 7.0][k % 3];
            let ly: Vec<f64> = y.iter().map(|v| lambda * v).collect();
            let fl = self.f_generic::<f64>(x, &ly).map_err(|e| {
                FinslerError::InvalidMetric(format!("cannot evaluate at x = {x:?}, y = {ly:?}: {e}"))
            })?;
            if (fl - lambda * f).abs() > HOMOGENEITY_TOL * lambda * f {
                return Err(FinslerError::InvalidMetric(format!(
                    "F is not positively 1-homogeneous in y: F(x, {lambda}y) = {fl}, {lambda}F(x, y) = {}",
                    lambda * f
                )));
            }
        }
        Ok(())
    }

    fn check_randers_at(&self, alpha: &[Coef], beta: &[Coef], x: &[f64]) -> Result<()> {
        let n = self.n;
        let mut am = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                am[(i, j)] = alpha[i * n + j]
                    .eval::<f64>(x)
                    .map_err(|e| FinslerError::InvalidMetric(e.to_string()))?;
            }
        }
        let b = DVector::from_iterator(n, beta.iter().map(|c| c.eval::<f64>(x)).collect::<Result<Vec<_>>>()?);
        let chol = am.cholesky().ok_or_else(|| {
            FinslerError::InvalidMetric(format!("randers alpha is not positive definite at x = {x:?}"))
        })?;
        let norm_b = b.dot(&chol.solve(&b)).sqrt();
        if !(norm_b < 1.0) {
            return Err(FinslerError::InvalidMetric(format!(
                "randers |beta|_alpha = {norm_b} must be < 1 (at x = {x:?})"
            )));
        }
        Ok(())
    }

    /// A representative interior point: the domain center or the origin.
    pub fn anchor(&self) -> Vec<f64> {
        match &self.domain {
            Domain::All => vec![0.0; self.n],
            Domain::Ball { center, .. } => center.clone(),
        }
    }
}

fn sum_sq<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::cst(0.0), |acc, &a| acc + a * a)
}

fn euclid<T: Scalar>(v: &[T]) -> T {
    sum_sq(v).sqrt()
}
