//! Grids, fields, Littlewood-Paley blocks and Besov norms.

pub mod calibration;
pub mod dump;
pub mod field;
pub mod filter;
pub mod grid;
pub mod norms;
pub mod smooth;

pub use field::{sum_of_products, Field, NodeValues, Padded};
pub use filter::{BesovParams, LPFilterBank};
pub use grid::GridSpec;
pub use smooth::{RadialCutoff, SmoothStep};
