//! Batch front end for the collective-emission engines: strict TOML run
//! configs, CSV/SVG artifacts, run manifests with artifact checksums, and
//! the analyze/compare post-processing commands.
//!
//! The binary in `main.rs` is a thin clap layer over these modules; they
//! are exposed as a library so integration tests can parse configs and
//! read artifacts with the same code the binary uses.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod svg;
