//! Criterion benchmarks for `tgrab-core`; see `benches/`.
