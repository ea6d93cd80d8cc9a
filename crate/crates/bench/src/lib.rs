//! Criterion benchmarks for placement, overlay construction and exact solving live in `benches/`.
