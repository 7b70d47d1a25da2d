//! Benchmark-only crate; see `benches/belief.rs` for the measured workloads.
