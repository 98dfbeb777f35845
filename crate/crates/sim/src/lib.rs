//! Configuration, parameter sweeps and table output for the `bilattice`
//! command-line tool.

pub mod config;
pub mod sweep;
pub mod table;

pub use config::{ConfigError, Engine, RunConfig};
pub use sweep::{run_sweep, CellFailure, SweepError, SweepOutput, SweepSpec};
pub use table::{read_table, write_table, Format, Table, TableError};
