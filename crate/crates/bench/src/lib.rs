//! Criterion benchmarks for the core solvers live under `benches/`.
