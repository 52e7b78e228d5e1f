//! Criterion benchmarks for the question pipeline live in `benches/`.
