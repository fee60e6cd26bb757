//! Benchmark-only crate; the kernels live in `benches/kernels.rs`.
