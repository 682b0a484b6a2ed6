//! Case files, run artifacts and the command-line front end for `tripart-core`.

pub mod cli;
pub mod exec;
pub mod io;
pub mod plot;
pub mod report;

pub use tripart_core as core;
