//! Dense univariate polynomials and unreduced rational functions.
//!
//! Coefficients are generic: `BigRational` gives exact arithmetic, `f64` is the
//! floating-point fallback used for evaluation.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient ring for [`Polynomial`].
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Polynomial with coefficients in ascending powers. Trailing zeros are
/// always trimmed, so the zero polynomial has an empty coefficient list.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Coefficient> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_i64(c).expect("integer coefficient")).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_usize(k).expect("small integer"))
                .collect(),
        )
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::constant(T::one()), |acc, _| &acc * self)
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Coefficient + ToPrimitive> Polynomial<T> {
    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map(|c| c.to_f64().unwrap_or(f64::NAN))
    }
}

impl Polynomial<f64> {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

impl<T: Coefficient> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, k: usize| p.coeffs.get(k).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|k| get(self, k) + get(rhs, k)).collect())
    }
}

impl<T: Coefficient> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |p: &Polynomial<T>, k: usize| p.coeffs.get(k).cloned().unwrap_or_else(T::zero);
        Polynomial::new((0..n).map(|k| get(self, k) - get(rhs, k)).collect())
    }
}

impl<T: Coefficient> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

/// Quotient of two polynomials. No gcd reduction is performed; degrees grow
/// under arithmetic and are reported as-is.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<T> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Coefficient> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::parameter("rational function with zero denominator"));
        }
        Ok(Self { num, den })
    }

    pub fn numerator(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial<T> {
        &self.den
    }

    /// `(numerator degree, denominator degree)`, numerator `None` when zero.
    pub fn degrees(&self) -> (Option<usize>, usize) {
        (self.num.degree(), self.den.degree().unwrap_or(0))
    }

    pub fn derivative(&self) -> Self {
        let num = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self { num, den: &self.den * &self.den }
    }

    /// Exact evaluation; `None` where the denominator vanishes.
    pub fn eval(&self, x: &T) -> Option<T>
    where
        T: std::ops::Div<Output = T>,
    {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }
}

impl<T: Coefficient + ToPrimitive> RationalFunction<T> {
    pub fn to_f64(&self) -> RationalFunction<f64> {
        RationalFunction { num: self.num.to_f64(), den: self.den.to_f64() }
    }
}

impl RationalFunction<f64> {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }
}

impl<T: Coefficient> Add for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn add(self, rhs: Self) -> RationalFunction<T> {
        if self.den == rhs.den {
            return RationalFunction { num: &self.num + &rhs.num, den: self.den.clone() };
        }
        RationalFunction {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
    }
}

impl<T: Coefficient> Mul for &RationalFunction<T> {
    type Output = RationalFunction<T>;
    fn mul(self, rhs: Self) -> RationalFunction<T> {
        RationalFunction { num: &self.num * &rhs.num, den: &self.den * &rhs.den }
    }
}

/// Exact rational from an integer.
pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational `n / d`.
pub fn q_frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Polynomial<BigRational>;

    #[test]
    fn trims_and_reports_degree() {
        let p = P::from_i64(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(P::from_i64(&[0, 0]).degree(), None);
    }

    #[test]
    fn product_and_derivative() {
        // (1 + t)(1 - t) = 1 - t^2, derivative -2t
        let a = P::from_i64(&[1, 1]);
        let b = P::from_i64(&[1, -1]);
        let prod = &a * &b;
        assert_eq!(prod, P::from_i64(&[1, 0, -1]));
        assert_eq!(prod.derivative(), P::from_i64(&[0, -2]));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RationalFunction::new(P::from_i64(&[1]), P::zero()).is_err());
    }

    #[test]
    fn rational_derivative_of_reciprocal() {
        // d/dt 1/t = -1/t^2
        let r = RationalFunction::new(P::from_i64(&[1]), P::from_i64(&[0, 1])).unwrap();
        let d = r.derivative();
        assert_eq!(d.eval(&q(2)), Some(q_frac(-1, 4)));
        assert_eq!(d.eval(&q(0)), None);
    }

    #[test]
    fn sum_with_shared_denominator_keeps_it() {
        let den = P::from_i64(&[0, 0, 1]);
        let a = RationalFunction::new(P::from_i64(&[1]), den.clone()).unwrap();
        let b = RationalFunction::new(P::from_i64(&[0, 1]), den.clone()).unwrap();
        let s = &a + &b;
        assert_eq!(s.denominator(), &den);
        assert_eq!(s.degrees(), (Some(1), 2));
    }
}
