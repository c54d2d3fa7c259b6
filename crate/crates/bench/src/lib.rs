//! Benchmark crate; see `benches/bench_main.rs`.
