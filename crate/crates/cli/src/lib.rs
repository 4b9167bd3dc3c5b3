//! Experiment harness and file formats behind the `geopers` binary.
//!
//! The core crate computes everything in memory; this one owns the side
//! effects: config parsing, CSV round trips, the trial grid with its
//! checkpoint/resume protocol, aggregate summaries, and a small SVG plotter.

pub mod config;
pub mod errors;
pub mod experiment;
pub mod formats;
pub mod svg;
