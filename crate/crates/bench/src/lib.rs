//! Shared fixtures for the benchmarks.

use cvsd_core::simulation::{gaussian_dataset, Population};
use cvsd_core::TwoClassDataset;

/// Two Gaussian classes of `n` observations in `p` dimensions, Bayes AUC 0.8.
pub fn fixture(n: usize, p: usize, seed: u64) -> TwoClassDataset {
    let pop = Population {
        n1: n,
        n2: n,
        p,
        c: None,
        bayes_auc: Some(0.8),
    };
    gaussian_dataset(&pop, seed, 0).expect("valid population")
}
