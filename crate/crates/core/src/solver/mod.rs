//! Pseudospectral RK4 integration of the nonlocal form of the system, with
//! Lagrangian particle tracking and a momentum-form consistency check.

pub mod flow;
pub mod integrate;
pub mod mform;
pub mod rhs;
pub mod state;

pub use flow::{advance_flow_map, FlowMap};
pub use integrate::{evolve, stability_limit, step_rk4, Sample, Stepper, Trajectory};
pub use mform::m_form_residual;
pub use rhs::{rhs, rhs_terms, RhsTerms};
pub use state::{SolverConfig, State};
