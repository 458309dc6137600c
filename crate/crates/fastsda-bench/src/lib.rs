//! Shared helpers for the fit-path benchmarks.

use fastsda_core::eval::{gaussian_mixture, SyntheticData};

/// Synthetic mixture sized for a benchmark case.
pub fn bench_data(dims: usize, samples: usize, classes: usize, subclasses: usize) -> SyntheticData {
    gaussian_mixture(dims, samples, classes, subclasses, 3.0, 42)
}
