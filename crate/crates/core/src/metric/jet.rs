//! Derivative engine: exact mixed partials of `F²` (and `F`) up to third
//! order by nested dual numbers, plus a central-difference oracle.

use super::{Buf, Metric};
use crate::error::Result;
use crate::scalar::{Dual, HyperDual, Scalar, TriDual};

/// A differentiation direction in `(x, y)` space.
#[derive(Debug, Clone, Copy)]
pub enum Dir<'a> {
    /// `∂/∂x^i`
    Base(usize),
    /// `∂/∂y^i`
    Fiber(usize),
    /// `v^k ∂/∂x^k` with `y` held fixed.
    BaseAlong(&'a [f64]),
}

impl Dir<'_> {
    #[inline]
    fn dx(&self, i: usize) -> f64 {
        match self {
            Dir::Base(k) => (i == *k) as u8 as f64,
            Dir::Fiber(_) => 0.0,
            Dir::BaseAlong(v) => v[i],
        }
    }

    #[inline]
    fn dy(&self, i: usize) -> f64 {
        match self {
            Dir::Fiber(k) => (i == *k) as u8 as f64,
            _ => 0.0,
        }
    }

    fn is_base(&self) -> bool {
        !matches!(self, Dir::Fiber(_))
    }
}

fn lift1(v: f64, d: f64) -> Dual<f64> {
    Dual::new(v, d)
}

fn lift2(v: f64, d1: f64, d2: f64) -> HyperDual {
    Dual::new(Dual::new(v, d1), Dual::new(d2, 0.0))
}

fn lift3(v: f64, d1: f64, d2: f64, d3: f64) -> TriDual {
    Dual::new(
        Dual::new(Dual::new(v, d1), Dual::new(d2, 0.0)),
        Dual::new(Dual::new(d3, 0.0), Dual::cst(0.0)),
    )
}

impl Metric {
    fn value<T: Scalar>(&self, x: &[T], y: &[T], square: bool) -> Result<T> {
        let f = self.f_generic(x, y)?;
        Ok(if square { f * f } else { f })
    }

    pub(crate) fn eval1(&self, x: &[f64], y: &[f64], d: Dir, square: bool) -> Result<Dual<f64>> {
        let n = self.n;
        let xs: Buf<_> = (0..n).map(|i| lift1(x[i], d.dx(i))).collect();
        let ys: Buf<_> = (0..n).map(|i| lift1(y[i], d.dy(i))).collect();
        self.value(&xs, &ys, square)
    }

    pub(crate) fn eval2(&self, x: &[f64], y: &[f64], a: Dir, b: Dir, square: bool) -> Result<HyperDual> {
        let n = self.n;
        let xs: Buf<_> = (0..n).map(|i| lift2(x[i], a.dx(i), b.dx(i))).collect();
        let ys: Buf<_> = (0..n).map(|i| lift2(y[i], a.dy(i), b.dy(i))).collect();
        self.value(&xs, &ys, square)
    }

    pub(crate) fn eval3(&self, x: &[f64], y: &[f64], a: Dir, b: Dir, c: Dir, square: bool) -> Result<TriDual> {
        let n = self.n;
        let xs: Buf<_> = (0..n).map(|i| lift3(x[i], a.dx(i), b.dx(i), c.dx(i))).collect();
        let ys: Buf<_> = (0..n).map(|i| lift3(y[i], a.dy(i), b.dy(i), c.dy(i))).collect();
        self.value(&xs, &ys, square)
    }

    fn partial(&self, x: &[f64], y: &[f64], dirs: &[Dir], square: bool) -> Result<f64> {
        if self.minkowski && dirs.iter().any(Dir::is_base) {
            return Ok(0.0);
        }
        match *dirs {
            [] => self.value(x, y, square),
            [a] => Ok(self.eval1(x, y, a, square)?.eps),
            [a, b] => Ok(self.eval2(x, y, a, b, square)?.eps.eps),
            [a, b, c] => Ok(self.eval3(x, y, a, b, c, square)?.eps.eps.eps),
            _ => Err(crate::FinslerError::Input("derivative order must be at most 3".into())),
        }
    }

    /// Mixed partial of `F²` along `dirs` (order 0 to 3) at a valid flag.
    pub fn f2_partial(&self, x: &[f64], y: &[f64], dirs: &[Dir]) -> Result<f64> {
        self.check_flag(x, y)?;
        self.partial(x, y, dirs, true)
    }

    /// Mixed partial of `F` along `dirs`; the flag is not validated.
    pub(crate) fn f_partial(&self, x: &[f64], y: &[f64], dirs: &[Dir]) -> Result<f64> {
        self.partial(x, y, dirs, false)
    }

    /// `(F², ∂F²/∂y, ∂²F²/∂y∂y)` with the Hessian row-major.
    pub(crate) fn hessian_y(&self, x: &[f64], y: &[f64]) -> Result<(f64, Buf<f64>, Buf<f64>)> {
        let n = self.n;
        let mut grad: Buf<f64> = smallvec::smallvec![0.0; n];
        let mut h: Buf<f64> = smallvec::smallvec![0.0; n * n];
        let mut f2 = 0.0;
        for a in 0..n {
            for b in a..n {
                let r = self.eval2(x, y, Dir::Fiber(a), Dir::Fiber(b), true)?;
                f2 = r.re.re;
                if a == b {
                    grad[a] = r.re.eps;
                }
                h[a * n + b] = r.eps.eps;
                h[b * n + a] = r.eps.eps;
            }
        }
        Ok((f2, grad, h))
    }

    /// Pieces of the spray: `H = ∂²F²/∂y∂y`, `(My)_l = y^k ∂²F²/∂y^l∂x^k`
    /// and `∂F²/∂x`.
    pub(crate) fn spray_parts(&self, x: &[f64], y: &[f64]) -> Result<(Buf<f64>, Buf<f64>, Buf<f64>)> {
        let n = self.n;
        let (_, _, h) = self.hessian_y(x, y)?;
        let mut my: Buf<f64> = smallvec::smallvec![0.0; n];
        let mut gx: Buf<f64> = smallvec::smallvec![0.0; n];
        if !self.minkowski {
            for l in 0..n {
                my[l] = self.eval2(x, y, Dir::Fiber(l), Dir::BaseAlong(y), true)?.eps.eps;
                gx[l] = self.eval1(x, y, Dir::Base(l), true)?.eps;
            }
        }
        Ok((h, my, gx))
    }

    /// `M_lk = ∂²F²/∂y^l∂x^k`, row-major.
    pub(crate) fn mixed_yx(&self, x: &[f64], y: &[f64]) -> Result<Buf<f64>> {
        let n = self.n;
        let mut m: Buf<f64> = smallvec::smallvec![0.0; n * n];
        if !self.minkowski {
            for l in 0..n {
                for k in 0..n {
                    m[l * n + k] = self.eval2(x, y, Dir::Fiber(l), Dir::Base(k), true)?.eps.eps;
                }
            }
        }
        Ok(m)
    }

    /// `T_jl = y^k ∂³F²/∂y^j∂y^l∂x^k`, symmetric.
    pub(crate) fn t_matrix(&self, x: &[f64], y: &[f64]) -> Result<Buf<f64>> {
        let n = self.n;
        let mut t: Buf<f64> = smallvec::smallvec![0.0; n * n];
        if !self.minkowski {
            for j in 0..n {
                for l in j..n {
                    let v = self.eval3(x, y, Dir::Fiber(j), Dir::Fiber(l), Dir::BaseAlong(y), true)?.eps.eps.eps;
                    t[j * n + l] = v;
                    t[l * n + j] = v;
                }
            }
        }
        Ok(t)
    }

    /// `C_abc = ∂³F²/∂y^a∂y^b∂y^c`, fully symmetric, index `(a*n + b)*n + c`.
    pub(crate) fn third_y(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut c = vec![0.0; n * n * n];
        for a in 0..n {
            for b in a..n {
                for d in b..n {
                    let v = self
                        .eval3(x, y, Dir::Fiber(a), Dir::Fiber(b), Dir::Fiber(d), true)?
                        .eps
                        .eps
                        .eps;
                    for (i, j, k) in [(a, b, d), (a, d, b), (b, a, d), (b, d, a), (d, a, b), (d, b, a)] {
                        c[(i * n + j) * n + k] = v;
                    }
                }
            }
        }
        Ok(c)
    }

    /// `∂³F²/∂x^m∂y^j∂y^k`, index `(m*n + j)*n + k`.
    pub(crate) fn base_yy(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut d = vec![0.0; n * n * n];
        if self.minkowski {
            return Ok(d);
        }
        for m in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v = self.eval3(x, y, Dir::Base(m), Dir::Fiber(j), Dir::Fiber(k), true)?.eps.eps.eps;
                    d[(m * n + j) * n + k] = v;
                    d[(m * n + k) * n + j] = v;
                }
            }
        }
        Ok(d)
    }
}

/// Richardson-extrapolated nested central differences of `F²` along `dirs`.
///
/// Independent of the dual-number path; intended as a test oracle. Each
/// direction is differenced with step `h`, then with `h/2`, and the two are
/// combined to cancel the `h²` error term.
pub fn central_difference(metric: &Metric, x: &[f64], y: &[f64], dirs: &[Dir], h: f64) -> Result<f64> {
    let coarse = nested(metric, x, y, dirs, h)?;
    let fine = nested(metric, x, y, dirs, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn nested(metric: &Metric, x: &[f64], y: &[f64], dirs: &[Dir], h: f64) -> Result<f64> {
    match dirs.split_first() {
        None => {
            let f = metric.f_generic::<f64>(x, y)?;
            Ok(f * f)
        }
        Some((d, rest)) => {
            let n = x.len();
            let shift = |s: f64| -> (Vec<f64>, Vec<f64>) {
                (
                    (0..n).map(|i| x[i] + s * d.dx(i)).collect(),
                    (0..n).map(|i| y[i] + s * d.dy(i)).collect(),
                )
            };
            let (xp, yp) = shift(h);
            let (xm, ym) = shift(-h);
            Ok((nested(metric, &xp, &yp, rest, h)? - nested(metric, &xm, &ym, rest, h)?) / (2.0 * h))
        }
    }
}
