//! Std companion of `graphheat-core`: the JSON graph format, generators,
//! independent validation oracles, and the pieces of the `graphheat` CLI.

pub mod cli;
pub mod config;
pub mod gen;
pub mod io;
pub mod validation;

pub use graphheat_core as core;
