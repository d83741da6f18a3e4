//! Fixtures shared by the benchmarks.

use mofilter_core::probe::random_tangential_instance;
use mofilter_core::subproblem::LinearizedSet;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic batch of random tangential LP instances.
pub fn lp_instances(count: usize, seed: u64) -> Vec<(DMatrix<f64>, LinearizedSet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_tangential_instance(&mut rng)).collect()
}

pub fn point(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
