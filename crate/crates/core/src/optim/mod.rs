//! Euclidean building blocks: linear solvers and preconditioners, memory
//! windows and compact quasi-Newton applies, line searches, NCG betas.

pub mod lbfgs;
pub mod lbroyden;
pub mod linear;
pub mod linear_precond;
pub mod linesearch;
pub mod memory;
pub mod ncg;
mod objective;
mod operator;

pub use memory::{PairKind, QnMemory};
pub use objective::Objective;
pub use operator::{CsrMatrix, LinearOperator, QuadraticProblem};
