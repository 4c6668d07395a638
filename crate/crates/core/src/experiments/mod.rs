//! The norm-inflation experiment, its Step 1 and Step 2 diagnostics, reports
//! and the acceptance checks.

pub mod inflation;
pub mod report;
pub mod step1;
pub mod step2;
pub mod verify;

pub use inflation::{
    inflation_experiment, inflation_monotone, run_many, run_single, RunOutcome, RunSpec,
    SweepConfig, SweepRow,
};
pub use report::{norms_csv, NormRecord, NormReport};
pub use step1::{compute_e0_lower_bound, E0Bound, Hierarchy, Step1Recorder, StepDiagnostics, TransportCheck};
pub use step2::step2_g_identity_check;
pub use verify::{verify_all, AcceptanceRuns, CheckResult};
