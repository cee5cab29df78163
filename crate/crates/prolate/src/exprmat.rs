//! Square matrices of [`ScalarExpr`] entries.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;

#[derive(Debug, Clone)]
pub struct ExprMatrix {
    n: usize,
    data: Vec<ScalarExpr>,
}

impl ExprMatrix {
    pub fn zeros(n: usize) -> Self {
        ExprMatrix {
            n,
            data: vec![ScalarExpr::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ScalarExpr::one())
    }

    /// `e · I_n`.
    pub fn scalar(n: usize, e: ScalarExpr) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> ScalarExpr) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        ExprMatrix { n, data }
    }

    pub fn from_constant(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::shape("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
        }
        Ok(Self::from_fn(m.nrows(), |i, j| ScalarExpr::constant(m[(i, j)])))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: ScalarExpr) {
        self.data[i * self.n + j] = e;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn check(&self, o: &ExprMatrix) -> Result<()> {
        if self.n != o.n {
            return Err(Error::shape(self.n, o.n));
        }
        Ok(())
    }

    pub fn add(&self, o: &ExprMatrix) -> Result<ExprMatrix> {
        self.check(o)?;
        Ok(ExprMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn sub(&self, o: &ExprMatrix) -> Result<ExprMatrix> {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> ExprMatrix {
        self.map(|e| e.clone() * s)
    }

    pub fn scale_expr(&self, s: &ScalarExpr) -> ExprMatrix {
        self.map(|e| e.clone() * s.clone())
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> ExprMatrix {
        ExprMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, o: &ExprMatrix) -> Result<ExprMatrix> {
        self.check(o)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut terms = Vec::new();
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    terms.push(a.clone() * b.clone());
                }
                out.set(i, j, ScalarExpr::sum(terms));
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> ExprMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn differentiate(&self) -> ExprMatrix {
        self.map(|e| e.differentiate())
    }

    pub fn eval(&self, x: f64) -> Result<DMatrix<f64>> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let e = self.get(i, j);
                if !e.is_zero() {
                    m[(i, j)] = e.eval(x)?;
                }
            }
        }
        Ok(m)
    }

    /// Values of the matrix function and its first `order` derivatives.
    pub fn eval_derivatives(&self, x: f64, order: usize) -> Result<Vec<DMatrix<f64>>> {
        let n = self.n;
        let mut out = vec![DMatrix::zeros(n, n); order + 1];
        for i in 0..n {
            for j in 0..n {
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let d = e.eval_derivatives(x, order)?;
                for (o, v) in d.into_iter().enumerate() {
                    out[o][(i, j)] = v;
                }
            }
        }
        Ok(out)
    }
}
