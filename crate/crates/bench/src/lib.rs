//! Criterion benchmarks for `rifclark`; see `benches/`.
