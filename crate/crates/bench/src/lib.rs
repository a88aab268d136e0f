//! Criterion benchmarks for hvrt-core; see `benches/`.
