//! Scalars for forward-mode differentiation.
//!
//! [`Dual<T>`] carries a value and one infinitesimal part. Nesting it gives
//! truncated Taylor numbers in several directions at once:
//! `Dual<Dual<f64>>` yields every mixed second partial along two seed
//! directions, `Dual<Dual<Dual<f64>>>` the mixed third partial. Metric
//! functions are written once against [`Scalar`] and evaluated exactly at
//! whatever order the caller needs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    /// Innermost real part.
    fn value(&self) -> f64;
    fn scale(self, c: f64) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual { re: f, eps: self.eps * df }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.re * o.eps + self.eps * o.re }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        Dual { re, eps: (self.eps - re * o.eps) / o.re }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    #[inline]
    fn cst(c: f64) -> Self {
        Dual { re: T::cst(c), eps: T::cst(0.0) }
    }
    #[inline]
    fn value(&self) -> f64 {
        self.re.value()
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        Dual { re: self.re.scale(c), eps: self.eps.scale(c) }
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual { re: s, eps: self.eps / s.scale(2.0) }
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    #[inline]
    fn ln(self) -> Self {
        Dual { re: self.re.ln(), eps: self.eps / self.re }
    }
    #[inline]
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    #[inline]
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::cst(1.0) - t * t)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::cst(1.0),
            1 => self,
            _ => {
                let p = self.re.powi(k - 1);
                self.chain(p * self.re, p.scale(k as f64))
            }
        }
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        let q = self.re.powf(p - 1.0);
        self.chain(q * self.re, q.scale(p))
    }
}

pub type HyperDual = Dual<Dual<f64>>;
pub type TriDual = Dual<Dual<Dual<f64>>>;
