//! Command-line companion of `curvtype-core`: JSON and CSV formats, corpus
//! configuration files, and a thread-pool corpus runner.

pub mod app;
pub mod config;
pub mod convert;
pub mod json;
