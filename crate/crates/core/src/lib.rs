//! Exact-rational engine for BV QFT algebras: formal families of solutions to the quantum
//! master equation, their structure tensors, correlators, free energy and flat metrics.

pub mod error;
pub mod algebra;
pub mod graded;
pub mod instances;
pub mod integral;
pub mod io;
pub mod ledger;
pub mod linalg;
pub mod observables;
pub mod series;
pub mod solver;
pub mod tensor;
pub mod transfer;

pub use error::{Error, Result};
pub use graded::Scalar;
