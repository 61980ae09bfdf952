//! First-order conic solver (operator splitting with a cached sparse Cholesky factor).
//!
//! Programs are stated as `maximize c^T x` subject to `b - A x` lying in a product of
//! zero, nonnegative, second-order, rotated second-order and PSD cones, plus optional
//! variable bounds. The dual is `minimize b^T y` subject to `A^T y = c`, `y` in the dual cone.

mod builder;
mod certify;
pub mod cones;
mod error;
mod kkt;
mod program;
mod scaling;
mod solver;

pub use builder::{LinExpr, ProgramBuilder};
pub use certify::{certify, primal_violation, Certificate};
pub use error::ConicError;
pub use program::{ConeKind, ConeSpec, ConicProgram, CsrMatrix};
pub use solver::{solve, solve_warm, ConicSolution, Residuals, Settings, SolveStatus, WarmStart};
