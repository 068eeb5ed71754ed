//! Library side of the `diabatic` command: configuration, sweep tables and
//! subcommand bodies.

pub mod commands;
pub mod config;
pub mod table;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "DIABATIC_OUT_DIR";
