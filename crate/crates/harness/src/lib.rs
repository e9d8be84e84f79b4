//! Experiment harness: configuration, the seeded board grid, CSV summaries,
//! text tables and SVG charts.

pub mod config;
pub mod grid;
pub mod inspect;
pub mod output;
pub mod plots;
pub mod report;
pub mod tables;
