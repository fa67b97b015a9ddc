//! Criterion benchmarks for `rdrestore-core` live in `benches/`.
