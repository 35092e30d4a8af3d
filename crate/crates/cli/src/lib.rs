//! Experiments, file formats and the command line for the random-relocation
//! moving-detector quantum walk. The simulation itself lives in
//! [`rrmdqw_core`].

pub mod commands;
pub mod config;
pub mod experiment;
pub mod output;
pub mod parallel;
pub mod verify;

pub use rrmdqw_core as core;
