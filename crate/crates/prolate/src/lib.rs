//! Matrix-valued discrete-continuous bispectral functions, their time-band
//! limiting operators, and the commuting differential and shift operators.

pub mod concomitant;
pub mod darboux;
pub mod error;
pub mod expr;
pub mod exprmat;
pub mod func;
pub mod jet;
pub mod kernels;
pub mod families;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod testfn;

pub use error::{Error, Result};
pub use expr::ScalarExpr;
pub use exprmat::ExprMatrix;
pub use operators::{DifferentialOperator, Seq, ShiftOperator};
