//! Dense univariate polynomials, generic over the coefficient ring.
//!
//! The same arithmetic backs two coefficient types: exact rationals for
//! power-series expansions where leading coefficients must be exact
//! integers, and `f64` for externally configured rate polynomials. See
//! the crate-root aliases [`crate::RationalPoly`] and
//! [`crate::FloatPoly`].

use num_traits::{Num, Zero};

/// Polynomial stored as ascending coefficients with no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Num + Clone> Polynomial<T> {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// Single term `c x^power`.
    pub fn monomial(c: T, power: usize) -> Self {
        let mut coeffs = vec![T::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, factor: &T) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// Drops all terms of degree greater than `order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .take(order + 1)
                .cloned()
                .collect(),
        )
    }

    /// Power-series quotient `self / divisor` through degree `order`.
    ///
    /// Returns `None` when the divisor's constant term is zero (the
    /// quotient is not a power series then).
    pub fn series_div(&self, divisor: &Self, order: usize) -> Option<Self> {
        let d0 = divisor.coeff(0);
        if d0.is_zero() {
            return None;
        }
        let mut q: Vec<T> = Vec::with_capacity(order + 1);
        for i in 0..=order {
            let mut acc = self.coeff(i);
            for j in 1..=i {
                acc = acc - divisor.coeff(j) * q[i - j].clone();
            }
            q.push(acc / d0.clone());
        }
        Some(Self::from_coeffs(q))
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}
