//! The field operations the series recursion needs, independent of how a
//! spatial function is stored.

use std::fmt;

use crate::exact::{HyperPoly, Rational};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Exact,
    Grid,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Exact => "exact",
            BackendKind::Grid => "grid",
        })
    }
}

/// Size of a field value as reported in residual checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldNorm {
    /// Symbolic backend: the value is either identically zero or not.
    Exact { is_zero: bool },
    /// Sampled backend: largest magnitude over the valid interior.
    Sampled { max_abs: f64 },
}

/// Arithmetic on spatial functions `U(x, y)`.
///
/// The exact backend satisfies every law with equality; the grid backend
/// satisfies them up to discretization error on its valid interior.
pub trait FieldAlgebra {
    type Value: Clone + fmt::Debug + Send + Sync;

    fn kind(&self) -> BackendKind;
    fn zero(&self) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn scale(&self, a: &Self::Value, factor: &Rational) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    /// `order`-th partial derivative along `axis`, `order` in `1..=3`.
    fn diff(&self, a: &Self::Value, axis: Axis, order: u32) -> Result<Self::Value>;
    fn eval(&self, a: &Self::Value, x: f64, y: f64) -> Result<f64>;
    fn norm(&self, a: &Self::Value) -> FieldNorm;

    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        let neg = self.scale(b, &-Rational::from_integer(1.into()))?;
        self.add(a, &neg)
    }
}

/// Closed-form backend over [`HyperPoly`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactBackend;

impl FieldAlgebra for ExactBackend {
    type Value = HyperPoly;

    fn kind(&self) -> BackendKind {
        BackendKind::Exact
    }

    fn zero(&self) -> HyperPoly {
        HyperPoly::zero()
    }

    fn add(&self, a: &HyperPoly, b: &HyperPoly) -> Result<HyperPoly> {
        a.checked_add(b)
    }

    fn scale(&self, a: &HyperPoly, factor: &Rational) -> Result<HyperPoly> {
        Ok(a.scale(factor))
    }

    fn mul(&self, a: &HyperPoly, b: &HyperPoly) -> Result<HyperPoly> {
        a.checked_mul(b)
    }

    fn diff(&self, a: &HyperPoly, axis: Axis, order: u32) -> Result<HyperPoly> {
        Ok(a.diff_n(axis, order))
    }

    fn eval(&self, a: &HyperPoly, x: f64, y: f64) -> Result<f64> {
        Ok(a.eval(x, y))
    }

    fn norm(&self, a: &HyperPoly) -> FieldNorm {
        FieldNorm::Exact { is_zero: a.is_zero() }
    }
}
