//! Solvers for the nonlinear boundary value problem of electrohydrodynamic
//! flow in a circular cylindrical conduit: a physics-informed neural
//! network trained on the strong-form residual, and a P1 Galerkin finite
//! element discretisation solved by damped Newton iteration.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod error;
pub mod fem;
pub mod harness;
pub mod model;
pub mod par;
pub mod pinn;
pub mod shooting;

pub use error::{Error, Result};
