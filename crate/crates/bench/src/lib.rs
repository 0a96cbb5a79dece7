//! Criterion benchmarks for the euphkit kernels; see `benches/`.
