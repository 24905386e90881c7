//! Criterion benchmarks for the sectorctl algorithms live in `benches/`.
