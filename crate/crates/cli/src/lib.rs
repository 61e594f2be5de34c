//! File formats, report writers, fixtures and the command layer around
//! `blobaudit-core`.
//!
//! Commands are plain library functions so integration tests drive them
//! directly; `main.rs` only parses flags and maps errors to exit codes.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod report;
pub mod synth;

pub use error::AppError;
