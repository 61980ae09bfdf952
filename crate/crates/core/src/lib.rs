//! Sparse PCA with multiple orthogonal components: conic upper bounds and feasible solutions.

pub mod altmin;
pub mod cli;
pub mod covmodel;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod rank1;
pub mod relax;
pub mod rounding;

pub use error::{Result, SpcaError};
