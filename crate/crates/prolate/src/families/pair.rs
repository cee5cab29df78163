use nalgebra::DMatrix;

use crate::error::Result;
use crate::exprmat::ExprMatrix;
use crate::operators::{DifferentialOperator, Seq, ShiftOperator};

/// A shift operator and a differential operator with `P·Ψ = Ψ·R`.
///
/// Products are taken in the same word order on both sides, so the pair algebra
/// mirrors the generalized Fourier map.
#[derive(Debug, Clone)]
pub struct FourierPair {
    pub shift: ShiftOperator,
    pub diff: DifferentialOperator,
}

impl FourierPair {
    pub fn new(shift: ShiftOperator, diff: DifferentialOperator) -> Self {
        FourierPair { shift, diff }
    }

    pub fn identity(n: usize) -> Self {
        FourierPair::new(ShiftOperator::identity(n), DifferentialOperator::identity(n))
    }

    /// A constant matrix, which commutes with `Ψ` when `Ψ` is scalar times `I_N`.
    pub fn constant(m: &DMatrix<f64>) -> Result<Self> {
        Ok(FourierPair::new(
            ShiftOperator::diagonal(Seq::constant(m.clone())),
            DifferentialOperator::multiplication(ExprMatrix::from_constant(m)?),
        ))
    }

    pub fn size(&self) -> usize {
        self.shift.size()
    }

    pub fn compose(&self, o: &FourierPair) -> Result<FourierPair> {
        Ok(FourierPair::new(
            self.shift.compose(&o.shift)?,
            self.diff.compose(&o.diff)?,
        ))
    }

    pub fn add(&self, o: &FourierPair) -> Result<FourierPair> {
        Ok(FourierPair::new(
            self.shift.add(&o.shift)?,
            self.diff.add(&o.diff)?,
        ))
    }

    pub fn sub(&self, o: &FourierPair) -> Result<FourierPair> {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> FourierPair {
        FourierPair::new(self.shift.scale(s), self.diff.scale(s))
    }

    /// Both formal adjoints; a Fourier pair again whenever the map preserves adjoints.
    pub fn adjoint(&self) -> FourierPair {
        FourierPair::new(self.shift.adjoint(), self.diff.adjoint())
    }

    pub fn anticommutator(&self, o: &FourierPair) -> Result<FourierPair> {
        self.compose(o)?.add(&o.compose(self)?)
    }

    pub fn commutator(&self, o: &FourierPair) -> Result<FourierPair> {
        self.compose(o)?.sub(&o.compose(self)?)
    }

    /// `(X + X*) / 2`.
    pub fn symmetrized(&self) -> Result<FourierPair> {
        Ok(self.add(&self.adjoint())?.scale(0.5))
    }

    /// `Σ cᵢ Xᵢ`; `terms` must be nonempty.
    pub fn linear_combination(terms: &[(f64, &FourierPair)]) -> Result<FourierPair> {
        let mut acc = terms[0].1.scale(terms[0].0);
        for (c, p) in &terms[1..] {
            if *c != 0.0 {
                acc = acc.add(&p.scale(*c))?;
            }
        }
        Ok(acc)
    }

    pub fn tabulate(&self, lo: i64, hi: i64) -> Result<FourierPair> {
        Ok(FourierPair::new(self.shift.tabulate(lo, hi)?, self.diff.clone()))
    }
}
