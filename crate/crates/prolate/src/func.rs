//! Matrix-valued functions of one real variable with derivative access.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::exprmat::ExprMatrix;

/// A smooth matrix function that can report `F, F', ..., F^{(order)}` at a point.
pub trait MatrixFunction: Send + Sync {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>>;
}

impl MatrixFunction for ExprMatrix {
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        self.eval_derivatives(x, order)
    }
}

/// Adapter turning a closure into a [`MatrixFunction`].
pub struct FnMatrix<F>(pub F);

impl<F> MatrixFunction for FnMatrix<F>
where
    F: Fn(f64, usize) -> Result<Vec<DMatrix<f64>>> + Send + Sync,
{
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        (self.0)(x, order)
    }
}

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Derivatives of a product `F G` from derivatives of both factors.
pub fn leibniz(f: &[DMatrix<f64>], g: &[DMatrix<f64>], order: usize) -> Vec<DMatrix<f64>> {
    (0..=order)
        .map(|d| {
            let mut acc = DMatrix::zeros(f[0].nrows(), g[0].ncols());
            for i in 0..=d {
                acc += binom(d, i) * (&f[i] * &g[d - i]);
            }
            acc
        })
        .collect()
}
