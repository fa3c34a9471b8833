//! Scenario-driven parameter sweeps over the duopoly models, with CSV and
//! SVG output and per-scenario equilibrium checks.

mod error;
pub mod output;
pub mod scenario;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use output::{emit_outputs, format_number, write_csv, COLUMNS};
pub use scenario::{Scenario, Setting, SCHEMA};
pub use sweep::{run_sweep, SweepTable};
