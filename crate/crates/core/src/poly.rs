//! Dense univariate polynomials over a commutative ring.
//!
//! The same type backs the exact integer polynomials (Möbius polynomial,
//! Möbius matrix entries, theta polynomial) and the rational polynomials
//! used for Sturm sequences.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;

/// Commutative ring with identity.
pub trait Ring:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// Coefficients are stored constant term first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c * z^degree`
    pub fn monomial(c: T, degree: usize) -> Self {
        let mut coeffs = vec![T::zero(); degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, z: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Remainder modulo `z^order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs.iter().take(order).cloned().collect())
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        let mut k = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                out.push(c.clone() * k.clone());
            }
            k = k + T::one();
        }
        Self::new(out)
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }

    /// First `n` coefficients of the formal power series `1 / self`.
    ///
    /// Requires the constant term to be one, so the inverse stays in the ring.
    pub fn series_inverse(&self, n: usize) -> Vec<T> {
        assert!(
            self.coeff(0).is_one(),
            "series inverse needs unit constant term"
        );
        let mut out: Vec<T> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                out.push(T::one());
                continue;
            }
            let mut acc = T::zero();
            for j in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                acc = acc - self.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(acc);
        }
        out
    }
}

impl<T: Ring + ToPrimitive> Polynomial<T> {
    /// Horner evaluation at a floating point argument.
    pub fn eval_float<S: Scalar>(&self, z: S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| {
            acc * z + S::of(c.to_f64().unwrap_or(f64::NAN))
        })
    }
}

impl<T: Ring + Integer> Polynomial<T> {
    /// Exact division over an integral domain; `None` when `divisor` does not
    /// divide `self` with integral quotient.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let dd = divisor.degree()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        let nd = self.degree()?;
        if nd < dd {
            return None;
        }
        let mut quot = vec![T::zero(); nd - dd + 1];
        for i in (0..=nd - dd).rev() {
            let top = rem[i + dd].clone();
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&lead);
            if !r.is_zero() {
                return None;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - q.clone() * dc.clone();
            }
            quot[i] = q;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(Self::new(quot))
        } else {
            None
        }
    }
}

impl<T: Ring> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Ring> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Ring> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Ring> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Ring> Add for Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        &self + &rhs
    }
}

impl<T: Ring> Sub for Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        &self - &rhs
    }
}

impl<T: Ring> Mul for Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        &self * &rhs
    }
}

impl<T: Ring> Neg for Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        -&self
    }
}

impl<T: Ring> Zero for Polynomial<T> {
    fn zero() -> Self {
        Polynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Ring> One for Polynomial<T> {
    fn one() -> Self {
        Polynomial::one()
    }
}

impl Polynomial<BigInt> {
    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Coefficients as `i64`, when they all fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }
}

impl<T: Ring + fmt::Display + Signed> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = mag.is_one();
            match i {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "z")?,
                1 => write!(f, "{mag}z")?,
                _ if unit => write!(f, "z^{i}")?,
                _ => write!(f, "{mag}z^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Polynomial<BigInt>;

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = P::from_i64(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(P::from_i64(&[0, 0]).is_zero());
    }

    #[test]
    fn theta_factorization_expands() {
        let f = P::from_i64(&[1, -1]) * P::from_i64(&[1, -2]) * P::from_i64(&[1, -2, -1]);
        assert_eq!(f, P::from_i64(&[1, -5, 7, -1, -2]));
    }

    #[test]
    fn exact_division() {
        let a = P::from_i64(&[1, -2]);
        let b = P::from_i64(&[1, -2, -1]);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(
            P::from_i64(&[1, 0, 1]).div_exact(&P::from_i64(&[1, 1])),
            None
        );
        assert_eq!(P::from_i64(&[2]).div_exact(&P::from_i64(&[4])), None);
        assert_eq!(P::zero().div_exact(&b), Some(P::zero()));
    }

    #[test]
    fn series_inverse_of_mobius() {
        let mu = P::from_i64(&[1, -5, 5]);
        let lambda: Vec<i64> = mu
            .series_inverse(7)
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect();
        assert_eq!(lambda, vec![1, 5, 20, 75, 275, 1000, 3625]);
    }

    #[test]
    fn display() {
        assert_eq!(P::from_i64(&[1, -5, 5]).to_string(), "1 - 5z + 5z^2");
        assert_eq!(P::from_i64(&[0, -1, 2]).to_string(), "-z + 2z^2");
        assert_eq!(P::zero().to_string(), "0");
    }

    #[test]
    fn float_evaluation() {
        let p = P::from_i64(&[1, -2, -1]);
        let q = std::f64::consts::SQRT_2 - 1.0;
        assert!(p.eval_float(q).abs() < 1e-15);
        assert!((p.eval_float(0.5f32) - (-0.25)).abs() < 1e-6);
    }

    #[test]
    fn derivative() {
        assert_eq!(
            P::from_i64(&[1, -5, 7, -1, -2]).derivative(),
            P::from_i64(&[-5, 14, -3, -8])
        );
    }
}
