//! Benchmarks for kaf-core live in `benches/`.
