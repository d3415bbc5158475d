//! Benchmark harness library: experiment configuration, preset suites, and
//! the solve/grid/certify/gen drivers behind the `exgrad` binary.

pub mod config;
pub mod presets;
pub mod runner;
