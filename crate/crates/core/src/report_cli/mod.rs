//! Configuration, the catalog battery, and the `check` / `solve` / `suite`
//! commands.

pub mod battery;
pub mod commands;
pub mod config;

pub use battery::{run_battery, BatteryOptions, BatteryOutcome, CheckRecord, CriterionResult, Expect};
pub use commands::{cmd_check, cmd_solve, cmd_suite, run, Command, SuiteReport, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
pub use config::{CliOverrides, RunConfig, SEED_ENV};
