//! Library side of the `kanon` command-line tool.

pub mod config;
pub mod run;
