//! Right-acting matrix differential operators `Σ ∂ⁿ Bₙ(x)`, meaning
//! `F·D = Σ F⁽ⁿ⁾ Bₙ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exprmat::ExprMatrix;
use crate::func::{binom, MatrixFunction};

#[derive(Debug, Clone)]
pub struct DifferentialOperator {
    n: usize,
    coeffs: Vec<ExprMatrix>,
}

impl DifferentialOperator {
    /// Build from right-normal-form coefficients `B_0, B_1, ...`.
    pub fn new(coeffs: Vec<ExprMatrix>) -> Result<Self> {
        let n = coeffs
            .first()
            .map(|c| c.size())
            .ok_or_else(|| Error::Construction("differential operator needs a coefficient".into()))?;
        for c in &coeffs {
            if c.size() != n {
                return Err(Error::shape(n, c.size()));
            }
        }
        Ok(DifferentialOperator { n, coeffs }.trimmed())
    }

    pub fn zero(n: usize) -> Self {
        DifferentialOperator {
            n,
            coeffs: vec![ExprMatrix::zeros(n)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::multiplication(ExprMatrix::identity(n))
    }

    pub fn multiplication(m: ExprMatrix) -> Self {
        DifferentialOperator {
            n: m.size(),
            coeffs: vec![m],
        }
    }

    /// Multiplication by the scalar function `e` times `I_n`.
    pub fn scalar_multiplication(n: usize, e: ScalarExpr) -> Self {
        Self::multiplication(ExprMatrix::scalar(n, e))
    }

    /// `∂^k · I_n`.
    pub fn derivative(n: usize, k: usize) -> Self {
        let mut coeffs = vec![ExprMatrix::zeros(n); k + 1];
        coeffs[k] = ExprMatrix::identity(n);
        DifferentialOperator { n, coeffs }
    }

    /// Scalar operator `Σ ∂ⁿ cₙ(x)` times `I_n`.
    pub fn scalar(n: usize, coeffs: Vec<ScalarExpr>) -> Self {
        let c = coeffs.into_iter().map(|e| ExprMatrix::scalar(n, e)).collect();
        DifferentialOperator { n, coeffs: c }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().is_zero() {
            self.coeffs.pop();
        }
        self
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Structural order (index of the last coefficient not identically zero by construction).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ExprMatrix] {
        &self.coeffs
    }

    /// Coefficient `B_i`, zero beyond the order.
    pub fn coeff(&self, i: usize) -> ExprMatrix {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| ExprMatrix::zeros(self.n))
    }

    pub fn coeff_values(&self, x: f64) -> Result<Vec<DMatrix<f64>>> {
        self.coeffs.iter().map(|c| c.eval(x)).collect()
    }

    /// Largest `i` with `max |B_i(x)| > tol · scale` over the samples.
    pub fn effective_order(&self, samples: &[f64], tol: f64) -> Result<usize> {
        let mut norms = vec![0.0f64; self.coeffs.len()];
        for &x in samples {
            for (i, c) in self.coeffs.iter().enumerate() {
                norms[i] = norms[i].max(c.eval(x)?.amax());
            }
        }
        let scale = norms.iter().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0);
        }
        Ok(norms.iter().rposition(|&v| v > tol * scale).unwrap_or(0))
    }

    fn check(&self, o: &DifferentialOperator) -> Result<()> {
        if self.n != o.n {
            return Err(Error::shape(self.n, o.n));
        }
        Ok(())
    }

    pub fn add(&self, o: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.check(o)?;
        let m = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..m)
            .map(|i| self.coeff(i).add(&o.coeff(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DifferentialOperator { n: self.n, coeffs }.trimmed())
    }

    pub fn sub(&self, o: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> DifferentialOperator {
        DifferentialOperator {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
        .trimmed()
    }

    /// Opposite-algebra composition: `F·(self ∘ o) = (F·self)·o`.
    pub fn compose(&self, o: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.check(o)?;
        let n = self.n;
        let m2 = o.order();
        // derivative tables of the left coefficients
        let mut dtab: Vec<Vec<ExprMatrix>> = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let mut row = vec![c.clone()];
            for _ in 0..m2 {
                let next = row.last().unwrap().differentiate();
                row.push(next);
            }
            dtab.push(row);
        }
        let top = self.order() + m2;
        let mut out = vec![ExprMatrix::zeros(n); top + 1];
        for (nn, row) in dtab.iter().enumerate() {
            if row[0].is_zero() {
                continue;
            }
            for (m, b2) in o.coeffs.iter().enumerate() {
                if b2.is_zero() {
                    continue;
                }
                for i in 0..=m {
                    let d = &row[m - i];
                    if d.is_zero() {
                        continue;
                    }
                    let term = d.mul(b2)?.scale(binom(m, i));
                    out[nn + i] = out[nn + i].add(&term)?;
                }
            }
        }
        Ok(DifferentialOperator { n, coeffs: out }.trimmed())
    }

    /// Formal adjoint, returned in right normal form.
    pub fn adjoint(&self) -> DifferentialOperator {
        let n = self.n;
        let m = self.order();
        let mut out = vec![ExprMatrix::zeros(n); m + 1];
        for (nn, b) in self.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let sign = if nn % 2 == 0 { 1.0 } else { -1.0 };
            let mut d = b.transpose();
            // (F Bᵀ)^{(nn)} = Σ_i C(nn,i) F^{(i)} (Bᵀ)^{(nn-i)}; walk the derivative order upward
            let mut derivs = vec![d.clone()];
            for _ in 0..nn {
                d = d.differentiate();
                derivs.push(d.clone());
            }
            for i in 0..=nn {
                let term = derivs[nn - i].scale(sign * binom(nn, i));
                out[i] = out[i].add(&term).expect("same size");
            }
        }
        DifferentialOperator { n, coeffs: out }.trimmed()
    }

    pub fn anticommutator(&self, o: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.compose(o)?.add(&o.compose(self)?)
    }

    pub fn commutator(&self, o: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.compose(o)?.sub(&o.compose(self)?)
    }

    /// `F·D` at `x` from the derivatives `F, F', ..., F^{(m)}` at `x`.
    pub fn apply_at(&self, fd: &[DMatrix<f64>], x: f64) -> Result<DMatrix<f64>> {
        Ok(self.apply_derivatives(fd, x, 0)?.remove(0))
    }

    /// Derivatives of `F·D` up to `order` at `x`; needs `F` derivatives up to `m + order`.
    pub fn apply_derivatives(
        &self,
        fd: &[DMatrix<f64>],
        x: f64,
        order: usize,
    ) -> Result<Vec<DMatrix<f64>>> {
        let m = self.order();
        if fd.len() < m + order + 1 {
            return Err(Error::Contract(format!(
                "operator of order {m} needs {} derivatives, got {}",
                m + order,
                fd.len().saturating_sub(1)
            )));
        }
        if fd[0].ncols() != self.n {
            return Err(Error::shape(self.n, fd[0].ncols()));
        }
        let rows = fd[0].nrows();
        let mut out = vec![DMatrix::zeros(rows, self.n); order + 1];
        for (nn, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let bd = c.eval_derivatives(x, order)?;
            for (e, slot) in out.iter_mut().enumerate() {
                for i in 0..=e {
                    *slot += binom(e, i) * (&fd[nn + i] * &bd[e - i]);
                }
            }
        }
        Ok(out)
    }

    /// Apply to a matrix function at `x`.
    pub fn apply(&self, f: &dyn MatrixFunction, x: f64) -> Result<DMatrix<f64>> {
        let fd = f.derivatives(x, self.order())?;
        self.apply_at(&fd, x)
    }

    /// Max-norm of the coefficient difference over the samples, relative to the
    /// larger operator's coefficient scale.
    pub fn relative_difference(&self, o: &DifferentialOperator, samples: &[f64]) -> Result<f64> {
        let m = self.coeffs.len().max(o.coeffs.len());
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for &x in samples {
            for i in 0..m {
                let a = self.coeff(i).eval(x)?;
                let b = o.coeff(i).eval(x)?;
                diff = diff.max((&a - &b).amax());
                scale = scale.max(a.amax()).max(b.amax());
            }
        }
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }
}
