//! A field sampled on the grid with running weighted mean and variance.

use super::grid::Grid;
use crate::stats::WeightedMeanVar;

#[derive(Debug, Clone)]
pub struct Profile {
    grid: Grid,
    stats: Vec<WeightedMeanVar>,
}

impl Profile {
    pub fn new(grid: Grid) -> Self {
        Profile {
            stats: vec![WeightedMeanVar::new(); grid.len()],
            grid,
        }
    }

    /// Profile holding a single sample.
    pub fn from_values(grid: Grid, values: &[f64]) -> Self {
        let mut p = Profile::new(grid);
        p.push(values, 1.0);
        p
    }

    /// Fold one sampled field into the running statistics.
    pub fn push(&mut self, values: &[f64], weight: f64) {
        assert_eq!(values.len(), self.stats.len(), "sample size mismatch");
        assert!(weight > 0.0, "weights must be positive");
        for (acc, &v) in self.stats.iter_mut().zip(values) {
            acc.push(v, weight);
        }
    }

    /// Merge another accumulator; callers fix the merge order.
    pub fn merge(&mut self, other: &Profile) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.stats.iter_mut().zip(&other.stats) {
            a.merge(b);
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mean(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.mean()).collect()
    }

    pub fn variance(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.variance()).collect()
    }

    pub fn count(&self) -> u64 {
        self.stats.first().map_or(0, |s| s.count())
    }

    pub fn weight(&self) -> f64 {
        self.stats.first().map_or(0.0, |s| s.weight())
    }
}
