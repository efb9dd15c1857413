//! Scenario-driven verification of Hopf tangent hypersurfaces.
//!
//! A scenario names a catalog surface, a sample grid and a list of checks,
//! each with an expected outcome. [`run`] evaluates the grid and [`emit`]
//! writes the report as JSON or CSV.

pub mod emit;
pub mod error;
pub mod runner;
pub mod scenario;

pub use emit::{emit, to_csv, to_json, Format};
pub use error::{Result, VerifyError};
pub use runner::{run, CheckReport, Outcome, RunReport, SampleRecord, Status};
pub use scenario::{CheckName, CheckSpec, Expectation, Scenario, Tolerances};

/// Exit code for unreadable or invalid scenarios and I/O failures.
pub const EXIT_USAGE: i32 = 2;
