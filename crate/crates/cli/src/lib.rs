//! Batch driver around `gkp-bell`: parameter sweeps, critical-squeezing
//! search, local-polytope distances, the Pauli CHSH enumeration and the
//! oracle cross-check, with CSV/JSON output.

pub mod config;
pub mod error;
pub mod oracle_check;
pub mod report;
pub mod sweep;

pub use config::{Grid, SettingSpec, StateSpec, SweepConfig, SweepFunctional, Tolerances};
pub use error::{CliError, CliResult};
pub use report::{emit_report, Format, Report};
pub use sweep::{critical_squeezing, run_sweep, CriticalSqueezingResult, CriticalStatus, Evaluator, SweepRow};
