use std::sync::Arc;

use thiserror::Error;

use super::matrix::RandomMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("dimension mismatch: expected {expected}, got {got}")]
pub struct DimError {
    pub expected: usize,
    pub got: usize,
}

#[derive(Clone, Debug)]
pub enum Factor<T> {
    Plain(Arc<RandomMatrix<T>>),
    Transpose(Arc<RandomMatrix<T>>),
    /// (I + R)/2
    Transparent(Arc<RandomMatrix<T>>),
    /// (I + Rᵀ)/2
    TransparentTranspose(Arc<RandomMatrix<T>>),
    Identity,
}

impl<T: Scalar> Factor<T> {
    fn dim(&self) -> Option<usize> {
        match self {
            Factor::Plain(m) | Factor::Transpose(m) | Factor::Transparent(m) | Factor::TransparentTranspose(m) => {
                Some(m.dim())
            }
            Factor::Identity => None,
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let two = T::one() + T::one();
        match self {
            Factor::Plain(m) => m.mul(x),
            Factor::Transpose(m) => m.mul_t(x),
            Factor::Transparent(m) => {
                let r = m.mul(x);
                x.iter().zip(r).map(|(&a, b)| (a + b) / two).collect()
            }
            Factor::TransparentTranspose(m) => {
                let r = m.mul_t(x);
                x.iter().zip(r).map(|(&a, b)| (a + b) / two).collect()
            }
            Factor::Identity => x.to_vec(),
        }
    }
}

/// A product F₁F₂⋯Fₖ of factors, evaluated right to left.
#[derive(Clone, Debug)]
pub struct MatrixExpr<T> {
    d: usize,
    factors: Vec<Factor<T>>,
}

impl<T: Scalar> MatrixExpr<T> {
    pub fn identity(d: usize) -> Self {
        MatrixExpr { d, factors: Vec::new() }
    }

    /// Factors in mathematical (left to right) order.
    pub fn new(d: usize, factors: Vec<Factor<T>>) -> Result<Self, DimError> {
        for f in &factors {
            if let Some(got) = f.dim() {
                if got != d {
                    return Err(DimError { expected: d, got });
                }
            }
        }
        Ok(MatrixExpr { d, factors })
    }

    /// Prepend a factor on the left, so it is applied last.
    pub fn then(mut self, f: Factor<T>) -> Result<Self, DimError> {
        if let Some(got) = f.dim() {
            if got != self.d {
                return Err(DimError { expected: self.d, got });
            }
        }
        self.factors.insert(0, f);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn factors(&self) -> &[Factor<T>] {
        &self.factors
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, DimError> {
        if x.len() != self.d {
            return Err(DimError { expected: self.d, got: x.len() });
        }
        let mut v = x.to_vec();
        for f in self.factors.iter().rev() {
            v = f.apply(&v);
        }
        Ok(v)
    }
}
