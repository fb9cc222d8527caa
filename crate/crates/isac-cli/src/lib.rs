//! Command-line front end of the secure ISAC simulator: scenario files,
//! run orchestration, CSV traces, summaries and plot-ready data files.

pub mod app;
pub mod config_file;
pub mod error;
pub mod manifest;
pub mod output;

pub use app::{execute, run_cli, Emit, Flags, OUT_DIR_ENV};
pub use config_file::{canonical_text, config_hash, parse_config, parse_config_str};
pub use error::CliError;
pub use manifest::RunManifest;
