//! Criterion benchmarks for the decoder and the fiber simulator live in `benches/`.
