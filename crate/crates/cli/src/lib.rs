//! Benchmark harness for the sorting toolkit: input generation, timed and
//! verified experiment runs, and table/CSV emission. The `bspsort` binary
//! is a thin wrapper over these modules.

pub mod gen;
pub mod runner;
pub mod table;

pub use gen::{generate_input, Distribution};
pub use runner::{detect_machine, run_experiment, ExperimentConfig, RunRecord, RunnerError};
pub use table::{emit_table, parse_csv, parse_n, TableFormat};
