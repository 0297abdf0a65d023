//! Variational observables for regression on quantum states.

#![forbid(unsafe_code)]

pub mod analytic;
pub mod ansatz;
pub mod data;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrology;
pub mod observable;
pub mod optim;
pub mod rng;
pub mod quadrature;
pub mod regression;
pub mod state;

pub use error::{Error, Result};
