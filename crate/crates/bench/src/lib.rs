//! Benchmark harness for `compresspp`: target presets, MCMC chain ingestion
//! and the experiment suite behind the `compresspp` command-line tool.

pub mod chain;
pub mod suite;
pub mod targets;
