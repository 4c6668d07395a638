//! Numerical laboratory for the two-component Degasperis-Procesi system:
//! Littlewood-Paley analysis, carrier-modulated initial data, a
//! pseudospectral RK4 solver and the norm-inflation experiment built on them.

pub mod error;
pub mod experiments;
pub mod fft;
pub mod construction;
pub mod lp;
pub mod solver;

pub use error::{Error, Result};
