//! Text formats and the command-line front end for `blindcount-core`.

pub mod cli;
pub mod format;
