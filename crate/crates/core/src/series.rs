//! Truncated power series `c_0 + c_1 z + ... + c_N z^N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Add,
    Multiply,
    Compose,
}

impl<C: Scalar> TruncatedSeries<C> {
    pub fn new(coeffs: Vec<C>) -> TruncatedSeries<C> {
        assert!(!coeffs.is_empty(), "a series keeps at least the constant term");
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> TruncatedSeries<C> {
        TruncatedSeries {
            coeffs: vec![C::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> TruncatedSeries<C> {
        let mut s = Self::zero(order);
        s.coeffs[0] = C::one();
        s
    }

    /// The series `z`.
    pub fn identity(order: usize) -> TruncatedSeries<C> {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = C::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    pub fn truncate(&self, order: usize) -> TruncatedSeries<C> {
        TruncatedSeries {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        TruncatedSeries {
            coeffs: (0..=n)
                .map(|i| self.coeffs[i].clone() + other.coeffs[i].clone())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![C::zero(); n + 1];
        for (i, a) in self.coeffs[..=n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// `self(inner(z))`, requiring `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::ComposeNeedsZeroConstant);
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        // Horner: a_0 + b (a_1 + b (a_2 + ...)).
        let mut acc = TruncatedSeries::<C>::zero(n);
        for a in self.coeffs[..=n].iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + a.clone();
        }
        Ok(acc)
    }

    pub fn combine(&self, other: &Self, mode: Combine) -> Result<Self> {
        match mode {
            Combine::Add => Ok(self.add(other)),
            Combine::Multiply => Ok(self.mul(other)),
            Combine::Compose => self.compose(other),
        }
    }

    /// Partial sums `c_0 + ... + c_n` for every `n`.
    pub fn partial_sums(&self) -> Vec<C> {
        let mut acc = C::zero();
        self.coeffs
            .iter()
            .map(|c| {
                acc = acc.clone() + c.clone();
                acc.clone()
            })
            .collect()
    }

    /// Evaluates the truncated polynomial at `z` in floating point.
    pub fn eval_f64(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c.to_f64())
    }

    pub fn to_f64(&self) -> TruncatedSeries<f64> {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c.to_f64()).collect(),
        }
    }

    /// Coefficientwise comparison up to the common order.
    pub fn agrees_with(&self, other: &Self, tol: f64) -> bool {
        let n = self.order().min(other.order());
        (0..=n).all(|i| self.coeffs[i].close_to(&other.coeffs[i], tol))
    }

    /// Largest coefficientwise difference up to the common order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        (0..=n)
            .map(|i| (self.coeffs[i].clone() - other.coeffs[i].clone()).to_f64().abs())
            .fold(0.0, f64::max)
    }
}
