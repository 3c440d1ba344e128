//! Benchmarks for `flatrank-core` live under `benches/`; run them with `cargo bench -p flatrank-bench`.
