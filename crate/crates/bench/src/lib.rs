//! Shared inputs for the criterion benchmarks.

use papdiff_core::verify::generate_corpus;
use papdiff_core::Expr;

/// A fixed set of random programs over four inputs.
pub fn bench_corpus() -> Vec<Expr> {
    generate_corpus(42, 32, 6, 4)
}

/// A fixed evaluation point for [`bench_corpus`] programs.
pub fn bench_point() -> Vec<f64> {
    vec![0.3, -0.7, 0.1, 0.9]
}
