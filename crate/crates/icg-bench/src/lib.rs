//! Benchmark-only crate; see `benches/delineation.rs`.
