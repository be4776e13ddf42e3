//! Second-order forward differentiation.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to `N` seeded variables. The component type is itself generic over
//! [`Real`], so jets nest: a `Jet2<Jet2<f64, 2>, 2>` differentiates twice in
//! one set of variables and twice in another, which is how third and fourth
//! order mixed partials (e.g. `∂g/∂x` of a fundamental tensor) are reached
//! without finite differences.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Scalar arithmetic shared by `f64` and (nested) jets.
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
    fn cst(c: f64) -> Self;
    /// The innermost real value.
    fn re(&self) -> f64;
    /// True when every stored component is finite.
    fn all_finite(&self) -> bool;

    fn recip(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn atan(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn square(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Truncated second-order Taylor expansion in `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<T, const N: usize> {
    pub value: T,
    pub grad: [T; N],
    pub hess: [[T; N]; N],
}

impl<T: Real, const N: usize> Jet2<T, N> {
    pub fn constant(value: T) -> Self {
        Self {
            value,
            grad: [T::zero(); N],
            hess: [[T::zero(); N]; N],
        }
    }

    /// The `slot`-th independent variable, at `value`.
    pub fn variable(value: T, slot: usize) -> Self {
        let mut jet = Self::constant(value);
        jet.grad[slot] = T::one();
        jet
    }

    /// Apply a scalar function given its value and first two derivatives at
    /// `self.value`.
    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.grad[i] = f1 * self.grad[i];
        }
        for i in 0..N {
            for j in i..N {
                let h = f1 * self.hess[i][j] + f2 * self.grad[i] * self.grad[j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }

    fn map(self, f: impl Fn(T) -> T) -> Self {
        let mut out = self;
        out.value = f(self.value);
        for i in 0..N {
            out.grad[i] = f(self.grad[i]);
            for j in 0..N {
                out.hess[i][j] = f(self.hess[i][j]);
            }
        }
        out
    }

    fn zip(self, other: Self, f: impl Fn(T, T) -> T) -> Self {
        let mut out = self;
        out.value = f(self.value, other.value);
        for i in 0..N {
            out.grad[i] = f(self.grad[i], other.grad[i]);
            for j in 0..N {
                out.hess[i][j] = f(self.hess[i][j], other.hess[i][j]);
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Add for Jet2<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: Real, const N: usize> Sub for Jet2<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<T: Real, const N: usize> Mul for Jet2<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..N {
            out.grad[i] = self.value * rhs.grad[i] + self.grad[i] * rhs.value;
        }
        for i in 0..N {
            for j in i..N {
                let h = self.value * rhs.hess[i][j]
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.hess[i][j] * rhs.value;
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Div for Jet2<T, N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real, const N: usize> Neg for Jet2<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|a| -a)
    }
}

impl<T: Real, const N: usize> Add<f64> for Jet2<T, N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.value = self.value + rhs;
        self
    }
}

impl<T: Real, const N: usize> Sub<f64> for Jet2<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.value = self.value - rhs;
        self
    }
}

impl<T: Real, const N: usize> Mul<f64> for Jet2<T, N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.map(|a| a * rhs)
    }
}

impl<T: Real, const N: usize> Div<f64> for Jet2<T, N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.map(|a| a / rhs)
    }
}

impl<T: Real, const N: usize> Real for Jet2<T, N> {
    fn cst(c: f64) -> Self {
        Self::constant(T::cst(c))
    }
    fn re(&self) -> f64 {
        self.value.re()
    }
    fn all_finite(&self) -> bool {
        self.value.all_finite()
            && self.grad.iter().all(Real::all_finite)
            && self.hess.iter().flatten().all(Real::all_finite)
    }
    fn recip(self) -> Self {
        let r = self.value.recip();
        let r2 = r * r;
        self.chain(r, -r2, r2 * r * 2.0)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        let d1 = s.recip() * 0.5;
        let d2 = -(s * self.value).recip() * 0.25;
        self.chain(s, d1, d2)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = self.value.recip();
        self.chain(self.value.ln(), r, -(r * r))
    }
    fn atan(self) -> Self {
        let d1 = (self.value * self.value + 1.0).recip();
        let d2 = self.value * d1 * d1 * -2.0;
        self.chain(self.value.atan(), d1, d2)
    }
    fn sin(self) -> Self {
        let s = self.value.sin();
        self.chain(s, self.value.cos(), -s)
    }
    fn cos(self) -> Self {
        let c = self.value.cos();
        self.chain(c, -self.value.sin(), -c)
    }
    fn powf(self, p: f64) -> Self {
        let d2 = self.value.powf(p - 2.0) * (p * (p - 1.0));
        let d1 = self.value.powf(p - 1.0) * p;
        self.chain(self.value.powf(p), d1, d2)
    }
    fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        let d2 = if n == 0 || n == 1 {
            T::zero()
        } else {
            self.value.powi(n - 2) * (nf * (nf - 1.0))
        };
        let d1 = if n == 0 {
            T::zero()
        } else {
            self.value.powi(n - 1) * nf
        };
        self.chain(self.value.powi(n), d1, d2)
    }
}

/// A closed-form scalar field of `N` real arguments, evaluable at any
/// [`Real`] type.
pub trait Field<const N: usize>: Send + Sync {
    fn eval<T: Real>(&self, p: [T; N]) -> T;

    /// Plain evaluation; non-finite results are reported, never returned.
    fn at(&self, p: [f64; N]) -> Result<f64> {
        let v = self.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain { point: p.to_vec() })
        }
    }
}

impl<F: Field<N>, const N: usize> Field<N> for &F {
    fn eval<T: Real>(&self, p: [T; N]) -> T {
        (**self).eval(p)
    }
}

/// Seed the entries of `point` listed in `active` as jet variables; all
/// other entries are held constant.
pub fn seed<T: Real, const N: usize, const K: usize>(
    point: [T; N],
    active: [usize; K],
) -> [Jet2<T, K>; N] {
    let mut out = point.map(Jet2::constant);
    for (slot, &idx) in active.iter().enumerate() {
        out[idx] = Jet2::variable(point[idx], slot);
    }
    out
}

/// Value, gradient and Hessian of `field` at `point` with respect to the
/// variables listed in `active`.
pub fn lift<F: Field<N>, const N: usize, const K: usize>(
    field: &F,
    point: [f64; N],
    active: [usize; K],
) -> Result<Jet2<f64, K>> {
    assert!(active.iter().all(|&i| i < N), "active index out of range");
    let jet = field.eval(seed(point, active));
    if jet.all_finite() {
        Ok(jet)
    } else {
        Err(Error::Domain {
            point: point.to_vec(),
        })
    }
}

/// Lift with every variable active.
pub fn lift_all<F: Field<N>, const N: usize>(field: &F, point: [f64; N]) -> Result<Jet2<f64, N>> {
    lift(field, point, std::array::from_fn(|i| i))
}

/// Check a plain value for finiteness, tagging failures with `point`.
pub(crate) fn finite(v: f64, point: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            point: point.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct XsqY;
    impl Field<2> for XsqY {
        fn eval<T: Real>(&self, [x, y]: [T; 2]) -> T {
            x * x * y
        }
    }

    struct Norm;
    impl Field<2> for Norm {
        fn eval<T: Real>(&self, [u, v]: [T; 2]) -> T {
            (u * u + v * v).sqrt()
        }
    }

    struct Decay;
    impl Field<1> for Decay {
        fn eval<T: Real>(&self, [x]: [T; 1]) -> T {
            (x * -2.0).exp()
        }
    }

    #[test]
    fn monomial_x2y() {
        let j = lift(&XsqY, [2.0, 3.0], [0, 1]).unwrap();
        assert_eq!(j.value, 12.0);
        assert_eq!(j.grad, [12.0, 4.0]);
        assert_eq!(j.hess, [[6.0, 4.0], [4.0, 0.0]]);
    }

    #[test]
    fn euclidean_norm_on_axis() {
        let j = lift(&Norm, [1.0, 0.0], [0, 1]).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.grad, [1.0, 0.0]);
        assert_eq!(j.hess, [[0.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn exponential_decay() {
        let j = lift(&Decay, [0.0], [0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess[0][0]), (1.0, -2.0, 4.0));
    }

    #[test]
    fn inactive_variables_are_constant() {
        let j = lift(&XsqY, [2.0, 3.0], [1]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess[0][0]), (12.0, 4.0, 0.0));
    }

    #[test]
    fn negative_sqrt_is_an_error() {
        struct Bad;
        impl Field<1> for Bad {
            fn eval<T: Real>(&self, [x]: [T; 1]) -> T {
                x.sqrt()
            }
        }
        assert!(matches!(lift(&Bad, [-1.0], [0]), Err(Error::Domain { .. })));
        assert!(Bad.at([-1.0]).is_err());
    }

    #[test]
    fn nested_jets_reach_third_order() {
        // Derivatives of x⁴ at 2: 48 (second), 48 (third), 24 (fourth).
        struct Quartic;
        impl Field<1> for Quartic {
            fn eval<T: Real>(&self, [x]: [T; 1]) -> T {
                x.powi(4)
            }
        }
        let outer: Jet2<f64, 1> = Jet2::variable(2.0, 0);
        let inner: Jet2<Jet2<f64, 1>, 1> = Jet2::variable(outer, 0);
        let r = Quartic.eval([inner]);
        assert_eq!(r.hess[0][0].value, 48.0);
        assert_eq!(r.hess[0][0].grad[0], 48.0);
        assert_eq!(r.hess[0][0].hess[0][0], 24.0);
    }

    #[test]
    fn plain_and_jet_values_agree() {
        let p = [0.37, -1.2];
        let plain = Norm.eval(p);
        let jet = lift(&Norm, p, [0, 1]).unwrap();
        assert_eq!(plain, jet.value);
    }
}
