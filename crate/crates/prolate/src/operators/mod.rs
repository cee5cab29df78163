//! Shift and differential operator algebras.

pub mod canonical;
pub mod diff;
pub mod shift;

pub use canonical::{
    symmetric_form_diff, symmetric_form_shift, SymmetricDiffForm, SymmetricShiftForm,
};
pub use diff::DifferentialOperator;
pub use shift::{Seq, ShiftOperator};
