//! Command-line front end: configuration, dispatch and report emission.

pub mod config;
pub mod emit;
pub mod report;
pub mod run;

pub use config::{parse_config, ExtensionConfig, RunConfig, Source, Tolerances};
pub use emit::{emit, fmt_g17, table_csv, to_json, write_report, Format};
pub use report::{Cell, CliError, Report, Table, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK};
pub use run::{run, Command};
