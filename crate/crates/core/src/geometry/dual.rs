//! Forward-mode automatic differentiation.
//!
//! [`HyperDual`] carries a value, gradient and Hessian with respect to `N`
//! seeded variables and is what analytic jets are built from. [`Dual`] is a
//! first-order dual over any [`Real`], so `Dual<HyperDual<2>, 3>` yields
//! exact first derivatives in three variables whose own second derivatives
//! in two chart variables are also exact.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::jet::{Jet2, VecMap};
use crate::{GeomError, Result};

/// Scalar arithmetic shared by `f64` and the dual number types.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
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
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn atan(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self;

    fn powr(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powr(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

/// Second-order forward dual: value, gradient and Hessian in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperDual<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> HyperDual<N> {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// The `i`-th coordinate function evaluated at `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut d = Self::constant(v);
        d.g[i] = 1.0;
        d
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for HyperDual<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in 0..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for HyperDual<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Neg for HyperDual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul for HyperDual<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for i in 0..N {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..N {
                out.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for HyperDual<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Add<f64> for HyperDual<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl<const N: usize> Sub<f64> for HyperDual<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.v -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for HyperDual<N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        self.v *= o;
        for i in 0..N {
            self.g[i] *= o;
            for j in 0..N {
                self.h[i][j] *= o;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for HyperDual<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> Real for HyperDual<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn sinh(self) -> Self {
        let (sh, ch) = (self.v.sinh(), self.v.cosh());
        self.chain(sh, ch, sh)
    }
    fn cosh(self) -> Self {
        let (sh, ch) = (self.v.sinh(), self.v.cosh());
        self.chain(ch, sh, ch)
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }
    fn atan(self) -> Self {
        let q = 1.0 / (1.0 + self.v * self.v);
        self.chain(self.v.atan(), q, -2.0 * self.v * q * q)
    }
    fn powi(self, k: i32) -> Self {
        let kf = k as f64;
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
        self.chain(
            self.v.powf(p),
            p * self.v.powf(p - 1.0),
            p * (p - 1.0) * self.v.powf(p - 2.0),
        )
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

/// First-order forward dual over an arbitrary [`Real`] scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T: Real, const N: usize> {
    pub v: T,
    pub g: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Self {
            v,
            g: [T::cst(0.0); N],
        }
    }

    pub fn variable(v: T, i: usize) -> Self {
        let mut d = Self::constant(v);
        d.g[i] = T::cst(1.0);
        d
    }

    #[inline]
    fn chain(self, f0: T, f1: T) -> Self {
        let mut g = self.g;
        for gi in g.iter_mut() {
            *gi = f1 * *gi;
        }
        Self { v: f0, g }
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v = self.v + o.v;
        for i in 0..N {
            self.g[i] = self.g[i] + o.g[i];
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.v = self.v - o.v;
        for i in 0..N {
            self.g[i] = self.g[i] - o.g[i];
        }
        self
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut g = self.g;
        for i in 0..N {
            g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        Self { v: self.v * o.v, g }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.v = self.v + o;
        self
    }
}

impl<T: Real, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.v = self.v - o;
        self
    }
}

impl<T: Real, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        self.v = self.v * o;
        for gi in self.g.iter_mut() {
            *gi = *gi * o;
        }
        self
    }
}

impl<T: Real, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    fn value(&self) -> f64 {
        self.v.value()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn tan(self) -> Self {
        let t = self.v.tan();
        self.chain(t, t * t + 1.0)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, s.recip() * 0.5)
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, -(t * t) + 1.0)
    }
    fn atan(self) -> Self {
        self.chain(self.v.atan(), (self.v * self.v + 1.0).recip())
    }
    fn powi(self, k: i32) -> Self {
        let d = if k == 0 {
            T::cst(0.0)
        } else {
            self.v.powi(k - 1) * k as f64
        };
        self.chain(self.v.powi(k), d)
    }
    fn powf(self, p: f64) -> Self {
        self.chain(self.v.powf(p), self.v.powf(p - 1.0) * p)
    }
    fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -(r * r))
    }
}

/// Analytic jet provider.
pub type JetMap = Arc<dyn Fn(&[f64]) -> Result<Jet2> + Send + Sync>;

/// A chart map written once, generically over the scalar type.
pub trait AnalyticMap: Send + Sync + 'static {
    fn dim(&self) -> usize;
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T>;
}

/// Jet of a generic map at `x` via [`HyperDual`] seeding.
pub fn jet_from_duals<const N: usize, F>(f: F, x: &[f64]) -> Result<Jet2>
where
    F: Fn(&[HyperDual<N>]) -> Vec<HyperDual<N>>,
{
    if x.len() != N {
        return Err(GeomError::Dimension {
            expected: N,
            found: x.len(),
        });
    }
    let vars: Vec<HyperDual<N>> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| HyperDual::variable(xi, i))
        .collect();
    let out = f(&vars);
    let value: Vec<f64> = out.iter().map(|d| d.v).collect();
    if value.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::NonFinite { point: x.to_vec() });
    }
    let d1 = (0..N)
        .map(|i| out.iter().map(|d| d.g[i]).collect())
        .collect();
    let d2 = (0..N)
        .map(|i| {
            (0..N)
                .map(|j| out.iter().map(|d| d.h[i][j]).collect())
                .collect()
        })
        .collect();
    Jet2::new(value, d1, d2)
}

/// Plain evaluator and analytic jet provider for an [`AnalyticMap`].
pub fn analytic_maps<M: AnalyticMap>(map: Arc<M>) -> Result<(VecMap, JetMap)> {
    let eval_map = map.clone();
    let eval: VecMap = Arc::new(move |x: &[f64]| {
        if x.len() != eval_map.dim() {
            return Err(GeomError::Dimension {
                expected: eval_map.dim(),
                found: x.len(),
            });
        }
        Ok(eval_map.eval::<f64>(x))
    });
    let jets: JetMap = match map.dim() {
        1 => Arc::new(move |x: &[f64]| jet_from_duals::<1, _>(|y| map.eval(y), x)),
        2 => Arc::new(move |x: &[f64]| jet_from_duals::<2, _>(|y| map.eval(y), x)),
        3 => Arc::new(move |x: &[f64]| jet_from_duals::<3, _>(|y| map.eval(y), x)),
        4 => Arc::new(move |x: &[f64]| jet_from_duals::<4, _>(|y| map.eval(y), x)),
        d => {
            return Err(GeomError::Argument(format!(
                "analytic jets are instantiated for dimensions 1..=4, got {d}"
            )))
        }
    };
    Ok((eval, jets))
}
