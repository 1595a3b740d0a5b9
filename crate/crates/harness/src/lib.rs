//! Convergence-study driver for the `ua-wkb` solvers: configuration parsing,
//! shared reference solutions, parallel sweeps and CSV output.

pub mod config;
pub mod error;
pub mod records;
pub mod reference;
pub mod selftest;
pub mod sweep;

pub use config::{load_config, parse_config, InitialData, ReferenceMode, SweepConfig};
pub use error::{CacheError, ConfigError, HarnessError, Result};
pub use records::{read_records, write_records, ErrorRecord, Status, CSV_HEADER};
pub use reference::{ReferenceField, ReferenceKey, ReferenceStore};
pub use selftest::{run_selftest, CheckOutcome};
pub use sweep::{run_convergence_sweep, run_convergence_sweep_with};
