//! Criterion benchmarks for the planner. Run with `cargo bench -p msmcts-bench`.
