//! Benchmark harness, scenario generation and file formats for
//! `flexhull-core`.

pub mod bench;
pub mod config;
pub mod data;
pub mod scenario;
