//! Command-line harness for `fairbits-core`: instance files, experiment
//! sweeps with CSV export, and entry points for the lower-bound tools.

pub mod cli;
pub mod format;
pub mod names;
pub mod report;
pub mod sweep;
