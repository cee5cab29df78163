//! Symmetric canonical forms of formally symmetric shift and differential operators.
//!
//! Shift side: `L = A₀ + Σᵢ (Aᵢ(k−i)𝒮⁻ⁱ + Aᵢ(k)𝒮ⁱ) + Σᵢ (Bᵢ(k−i)𝒮⁻ⁱ − Bᵢ(k)𝒮ⁱ)`.
//! Differential side: `D = Σᵢ ∂ⁱAᵢ∂ⁱ + Σᵢ {∂^{2i−1}, Bᵢ}`.
//! `Aᵢ` symmetric, `Bᵢ` skew in both.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exprmat::ExprMatrix;
use crate::operators::diff::DifferentialOperator;
use crate::operators::shift::{Seq, ShiftOperator};

pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SymmetricShiftForm {
    /// `A_0 ..= A_ℓ`
    pub a: Vec<Seq>,
    /// `B_1 ..= B_ℓ` stored at indices `1..=ℓ`; index 0 is zero.
    pub b: Vec<Seq>,
}

#[derive(Debug, Clone)]
pub struct SymmetricDiffForm {
    /// `A_0 ..= A_p`
    pub a: Vec<ExprMatrix>,
    /// `B_1 ..= B_p` at indices `1..=p`; index 0 is zero.
    pub b: Vec<ExprMatrix>,
}

/// Relative defect of formal symmetry `‖L − L*‖ / ‖L‖` at the sample indices.
pub fn shift_symmetry_defect(l: &ShiftOperator, ks: &[i64]) -> Result<f64> {
    l.relative_difference(&l.adjoint(), ks)
}

/// Relative defect of formal symmetry `‖D − D*‖ / ‖D‖` at the sample points.
pub fn diff_symmetry_defect(d: &DifferentialOperator, xs: &[f64]) -> Result<f64> {
    d.relative_difference(&d.adjoint(), xs)
}

/// Canonical form of a formally symmetric shift operator; symmetry is checked at `ks`.
pub fn symmetric_form_shift(l: &ShiftOperator, ks: &[i64]) -> Result<SymmetricShiftForm> {
    let defect = shift_symmetry_defect(l, ks)?;
    if defect > SYMMETRY_TOL {
        return Err(Error::Contract(format!(
            "shift operator is not formally symmetric (relative defect {defect:.3e})"
        )));
    }
    Ok(symmetric_form_shift_unchecked(l))
}

/// Canonical-form data read off the nonnegative diagonals without checking symmetry.
pub fn symmetric_form_shift_unchecked(l: &ShiftOperator) -> SymmetricShiftForm {
    let n = l.size();
    let r = l.radius();
    let zero = Seq::constant(DMatrix::zeros(n, n));
    let diag = |j: i64| {
        l.diags()
            .find(|(i, _)| *i == j)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| zero.clone())
    };
    let mut a = vec![diag(0)];
    let mut b = vec![zero.clone()];
    for i in 1..=r as i64 {
        let c = diag(i);
        let ct = c.transpose();
        a.push(c.add(&ct).scale(0.5));
        b.push(c.scale(-1.0).add(&ct).scale(0.5));
    }
    SymmetricShiftForm { a, b }
}

impl SymmetricShiftForm {
    pub fn reconstruct(&self) -> ShiftOperator {
        let n = self.a[0].size();
        let mut d = vec![(0, self.a[0].clone())];
        for i in 1..self.a.len() {
            let ii = i as i64;
            d.push((ii, self.a[i].add(&self.b[i].scale(-1.0))));
            d.push((-ii, self.a[i].add(&self.b[i]).shifted(-ii)));
        }
        ShiftOperator::from_diags(n, d)
    }

    /// Conditions for the concomitant to vanish at `z`: `Aᵢ(z−j) = Bᵢ(z−j) = 0`, `0 ≤ j < i`.
    pub fn vanishing_conditions(&self, z: i64) -> Result<Vec<(String, DMatrix<f64>)>> {
        let mut out = Vec::new();
        for i in 1..self.a.len() {
            for j in 0..i as i64 {
                out.push((format!("A_{i}({})", z - j), self.a[i].eval(z - j)?));
                out.push((format!("B_{i}({})", z - j), self.b[i].eval(z - j)?));
            }
        }
        Ok(out)
    }
}

fn sandwich(i: usize, a: &ExprMatrix) -> Result<DifferentialOperator> {
    let n = a.size();
    let d = DifferentialOperator::derivative(n, i);
    d.compose(&DifferentialOperator::multiplication(a.clone()))?
        .compose(&d)
}

fn odd_anticommutator(i: usize, b: &ExprMatrix) -> Result<DifferentialOperator> {
    let n = b.size();
    DifferentialOperator::derivative(n, 2 * i - 1)
        .anticommutator(&DifferentialOperator::multiplication(b.clone()))
}

/// Canonical form of a formally symmetric differential operator; symmetry is checked at `xs`.
pub fn symmetric_form_diff(d: &DifferentialOperator, xs: &[f64]) -> Result<SymmetricDiffForm> {
    let defect = diff_symmetry_defect(d, xs)?;
    if defect > SYMMETRY_TOL {
        return Err(Error::Contract(format!(
            "differential operator is not formally symmetric (relative defect {defect:.3e})"
        )));
    }
    symmetric_form_diff_unchecked(d, d.order())
}

/// Peel the canonical form off from order `order` downward, treating every level
/// as present. Linear in `d`, which the solver relies on.
pub fn symmetric_form_diff_unchecked(
    d: &DifferentialOperator,
    order: usize,
) -> Result<SymmetricDiffForm> {
    let n = d.size();
    let p = order / 2 + order % 2;
    let mut a = vec![ExprMatrix::zeros(n); order / 2 + 1];
    let mut b = vec![ExprMatrix::zeros(n); p + 1];
    let mut rest = d.clone();
    for o in (1..=order).rev() {
        let c = rest.coeff(o);
        if c.is_zero() {
            continue;
        }
        if o % 2 == 0 {
            let i = o / 2;
            rest = rest.sub(&sandwich(i, &c)?)?;
            a[i] = c;
        } else {
            let i = (o + 1) / 2;
            let half = c.scale(0.5);
            rest = rest.sub(&odd_anticommutator(i, &half)?)?;
            b[i] = half;
        }
    }
    a[0] = rest.coeff(0);
    Ok(SymmetricDiffForm { a, b })
}

impl SymmetricDiffForm {
    pub fn reconstruct(&self) -> Result<DifferentialOperator> {
        let n = self.a[0].size();
        let mut d = DifferentialOperator::multiplication(self.a[0].clone());
        for i in 1..self.a.len() {
            if !self.a[i].is_zero() {
                d = d.add(&sandwich(i, &self.a[i])?)?;
            }
        }
        for i in 1..self.b.len() {
            if !self.b[i].is_zero() {
                d = d.add(&odd_anticommutator(i, &self.b[i])?)?;
            }
        }
        debug_assert_eq!(d.size(), n);
        Ok(d)
    }

    /// Conditions for the concomitant to vanish at `x1`: `Aᵢ⁽ʲ⁾(x1) = Bᵢ⁽ʲ⁾(x1) = 0`, `0 ≤ j < i`.
    pub fn vanishing_conditions(&self, x1: f64) -> Result<Vec<(String, DMatrix<f64>)>> {
        let mut out = Vec::new();
        for i in 1..self.a.len() {
            let ders = self.a[i].eval_derivatives(x1, i - 1)?;
            for (j, m) in ders.into_iter().enumerate() {
                out.push((format!("A_{i}^({j})({x1})"), m));
            }
        }
        for i in 1..self.b.len() {
            let ders = self.b[i].eval_derivatives(x1, i - 1)?;
            for (j, m) in ders.into_iter().enumerate() {
                out.push((format!("B_{i}^({j})({x1})"), m));
            }
        }
        Ok(out)
    }
}
