//! Criterion benchmarks for `dtn-core`; see `benches/`.
