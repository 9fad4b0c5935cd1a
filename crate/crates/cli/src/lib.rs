//! Command-line layer of dswlab: profile files, comparison reports and self-tests.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod profile;
pub mod report;

use thiserror::Error;

pub use config::{parse_simulate_config, SimulateFile};
pub use profile::{parse_profile_csv, write_profile_csv, Profile, ProfileMeta};
pub use report::{compare, CompareOptions, ComparisonReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("self-test failed: {0}")]
    Selftest(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Selftest(_) => 1,
        }
    }
}
