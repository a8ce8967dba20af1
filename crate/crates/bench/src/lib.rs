//! Benchmark-only crate: all content lives in `benches/`.
//!
//! Run with `cargo bench -p macroqubit-bench`.
