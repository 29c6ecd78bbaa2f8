//! Scalars that carry their own first and second derivatives.
//!
//! Field expressions in this crate are written once, generic over [`Scalar`].
//! Evaluating them on plain `f64` gives values; evaluating them on [`Jet`]
//! seeded with coordinate directions gives values, gradients and Hessians
//! that are exact up to round-off.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest coordinate dimension a [`Jet`] can differentiate in.
pub const MAX_DIM: usize = 8;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(value: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(value: f64) -> Self {
        value
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
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
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// Second-order forward-mode jet: value, gradient and Hessian with respect
/// to up to [`MAX_DIM`] coordinates.
///
/// `dim` is the number of active directions; constants have `dim == 0` and
/// combine with any jet.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub h: [[f64; MAX_DIM]; MAX_DIM],
    dim: usize,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet {
            v,
            g: [0.0; MAX_DIM],
            h: [[0.0; MAX_DIM]; MAX_DIM],
            dim: 0,
        }
    }

    /// The coordinate function `x_k` at value `v` in an `n`-dimensional chart.
    pub fn variable(v: f64, k: usize, n: usize) -> Self {
        assert!(n <= MAX_DIM, "jet dimension {n} exceeds {MAX_DIM}");
        assert!(k < n);
        let mut j = Jet::constant(v);
        j.g[k] = 1.0;
        j.dim = n;
        j
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64]) -> Vec<Jet> {
        let n = x.len();
        x.iter()
            .enumerate()
            .map(|(k, &v)| Jet::variable(v, k, n))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.v` (chain rule to second order).
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim;
        let mut out = Jet::constant(f0);
        out.dim = n;
        for i in 0..n {
            out.g[i] = f1 * self.g[i];
        }
        for i in 0..n {
            for j in 0..n {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let n = self.dim.max(o.dim);
        let mut out = self;
        out.dim = n;
        out.v += o.v;
        for i in 0..n {
            out.g[i] += o.g[i];
            for j in 0..n {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        let n = self.dim.max(o.dim);
        let mut out = self;
        out.dim = n;
        out.v -= o.v;
        for i in 0..n {
            out.g[i] -= o.g[i];
            for j in 0..n {
                out.h[i][j] -= o.h[i][j];
            }
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let n = self.dim.max(o.dim);
        let mut out = Jet::constant(self.v * o.v);
        out.dim = n;
        for i in 0..n {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        for i in 0..n {
            for j in 0..n {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.v * o.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(mut self, c: f64) -> Jet {
        let n = self.dim;
        self.v *= c;
        for i in 0..n {
            self.g[i] *= c;
            for j in 0..n {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Scalar for Jet {
    fn cst(value: f64) -> Self {
        Jet::constant(value)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn powi(self, k: i32) -> Self {
        let kf = f64::from(k);
        let f0 = self.v.powi(k);
        let f1 = if k == 0 { 0.0 } else { kf * self.v.powi(k - 1) };
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * self.v.powi(k - 2)
        };
        self.chain(f0, f1, f2)
    }
    fn powf(self, p: f64) -> Self {
        let f0 = self.v.powf(p);
        self.chain(f0, p * self.v.powf(p - 1.0), p * (p - 1.0) * self.v.powf(p - 2.0))
    }
}
