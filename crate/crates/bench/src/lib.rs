//! Criterion benchmarks for `hdbsm-core`; see `benches/protocol.rs`.
