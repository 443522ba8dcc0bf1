//! Numerical potential theory for hole probabilities of zeros of random
//! holomorphic sections on the Riemann sphere and on flat tori.

pub mod config;
pub mod equilibrium;
pub mod ensemble;
pub mod error;
pub mod fekete;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod quad;
pub mod ratelab;
pub mod stats;
pub mod surface;
pub mod theta;

pub use error::{Error, Result};
