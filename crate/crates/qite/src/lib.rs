//! File formats, run configuration and the batch driver behind the `qite`
//! command line.

pub mod config;
pub mod error;
pub mod fcidump;
pub mod format;
pub mod pauli_text;
pub mod run;
