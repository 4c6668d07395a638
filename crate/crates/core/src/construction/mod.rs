//! The bump profile, the carrier-modulated initial density and the squared
//! data's dyadic lower bounds.

pub mod bump;
pub mod initial;
pub mod lemma;
pub mod params;

pub use bump::{theta0_exact, BumpProfile};
pub use initial::{construct_initial_data, InitialData, SupportDiagnostics};
pub use lemma::{lemma32_lower_bound, phi_squared_decomposition, Lemma32Report, WindowBj};
pub use params::{ConstructionParams, Geometry, Layout, Terms};
