//! Criterion benchmarks for `wb-core`; see `benches/witt.rs`.
