//! File formats, reports and the `cbpmn` command line for [`cbpmn_core`].
//!
//! A model lives in a bundle directory of versioned TOML documents:
//!
//! | file             | content                                        |
//! |------------------|------------------------------------------------|
//! | `model.toml`     | activity chain, contextual events, ideal state |
//! | `graph.toml`     | context graph and dependency rules             |
//! | `fragments.toml` | fragment repository indexed by sub-goal        |
//! | `rules.toml`     | adaptation rules                               |
//! | `scenario.toml`  | timestamped context snapshots                  |
//!
//! See [`format`] for the schemas and [`commands`] for the subcommands.

pub mod bundle;
pub mod commands;
pub mod format;
pub mod report;

pub use bundle::{Bundle, BundlePaths};
pub use commands::CliError;
