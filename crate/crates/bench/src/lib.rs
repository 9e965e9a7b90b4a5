//! Benchmark-only crate; see benches/simulation.rs.
