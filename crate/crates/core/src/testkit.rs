//! Fixtures shared by the unit tests.

use rand_distr::{Distribution, StandardNormal};

use crate::classifier::{Scorer, TrainingRule};
use crate::data::{Samples, TwoClassDataset};
use crate::error::Result;
use crate::rng::stream;

/// Class 1 ~ N(0, I), class 2 ~ N(shift·1, I).
pub fn gaussian(n1: usize, n2: usize, dim: usize, shift: f64, seed: u64) -> TwoClassDataset {
    let mut rng = stream(seed, &[0xfeed]);
    let mut draw = |n: usize, mu: f64| {
        let v: Vec<f64> = (0..n * dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + z
            })
            .collect();
        Samples::new(dim, v).unwrap()
    };
    let c1 = draw(n1, 0.0);
    let c2 = draw(n2, shift);
    TwoClassDataset::new(c1, c2).unwrap()
}

/// Scores by the first coordinate, ignoring the training data.
pub struct FirstCoordinate;

pub struct Coordinate;

impl Scorer for Coordinate {
    fn eval(&self, x: &[f64]) -> f64 {
        x[0]
    }
}

impl TrainingRule for FirstCoordinate {
    type Model = Coordinate;
    fn fit(&self, _: &Samples, _: &Samples) -> Result<Coordinate> {
        Ok(Coordinate)
    }
}

/// Always says class 1.
pub struct AlwaysClassOne;

pub struct Constant;

impl Scorer for Constant {
    fn eval(&self, _: &[f64]) -> f64 {
        1.0
    }
}

impl TrainingRule for AlwaysClassOne {
    type Model = Constant;
    fn fit(&self, _: &Samples, _: &Samples) -> Result<Constant> {
        Ok(Constant)
    }
}
