//! Bounds on a linear functional of a partially identified parameter defined
//! by linear moment equalities and inequalities, with bootstrap confidence
//! sets that stay valid whether the identified set is an interval or a point.

pub mod diagnostics;
pub mod dgp;
pub mod error;
pub mod inference;
pub mod lp;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};

pub type LinearProgram64 = lp::LinearProgram<f64>;
pub type LinearProgram32 = lp::LinearProgram<f32>;
pub type LpSolution64 = lp::LpSolution<f64>;
pub type LpSolution32 = lp::LpSolution<f32>;
pub type SolverOptions64 = lp::SolverOptions<f64>;
pub type SolverOptions32 = lp::SolverOptions<f32>;
