//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod oracle;

use ecmsim::ecm::{Orientation, StateDistribution, StateSpace, TransitionMatrix};
use rand::Rng;

pub fn space(n: usize) -> StateSpace {
    StateSpace::new((0..n).map(|i| format!("s{i}"))).unwrap()
}

/// Column-stochastic matrix with every entry at least `floor` before
/// normalization.
pub fn random_matrix(rng: &mut impl Rng, space: &StateSpace, floor: f64, name: &str) -> TransitionMatrix {
    let n = space.len();
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| floor + rng.random::<f64>()).collect())
        .collect();
    for c in &mut cols {
        let s: f64 = c.iter().sum();
        c.iter_mut().for_each(|x| *x /= s);
    }
    TransitionMatrix::from_probabilities(space.clone(), &cols, Orientation::RowsAreFrom, name).unwrap()
}

pub fn random_distribution(rng: &mut impl Rng, space: &StateSpace) -> StateDistribution {
    let v = (0..space.len()).map(|_| rng.random_range(0.0..500.0)).collect();
    StateDistribution::new(space.clone(), v).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
