//! Nonlinearly preconditioned quasi-Newton (NPQN) and nonlinear conjugate
//! gradient (NPNCG) accelerators for alternating least squares style
//! fixed-point iterations.
//!
//! The crate is `no_std` (with `alloc`) by default. Enable the `std` feature
//! to implement `std::error::Error` on the error types through `core::error`.
//!
//! Layout conventions:
//! * Matrices are column-major.
//! * Dense tensors store the first index fastest.
//! * Modes are 0-based.
//! * Factor tuples are flattened mode by mode, each factor column-major.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod decomp;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod optim;
pub mod precond;
pub mod problems;
pub mod tensor;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use tensor::{DenseTensor, Matrix};
