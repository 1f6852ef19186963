//! Benchmark-only crate; see .
