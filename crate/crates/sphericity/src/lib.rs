//! Monte Carlo harness, report formats, and CLI for the high-dimensional
//! sphericity rank tests in `sphericity-core`.

pub mod cli;
pub mod montecarlo;
pub mod report;
