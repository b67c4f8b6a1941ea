//! Streaming accumulators: weighted mean/variance and compensated sums.

/// Weighted streaming mean and variance (West's update).
///
/// The variance reported is the sample variance with a reliability
/// correction `n/(n-1)` based on the number of pushed samples, so the result
/// is invariant under a common rescaling of all weights.
#[derive(Debug, Clone, Default)]
pub struct WeightedMeanVar {
    mean: f64,
    m2: f64,
    weight: f64,
    count: u64,
}

impl WeightedMeanVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64, weight: f64) {
        debug_assert!(weight > 0.0);
        self.weight += weight;
        let delta = value - self.mean;
        self.mean += delta * (weight / self.weight);
        self.m2 += weight * delta * (value - self.mean);
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2 / self.weight) * (n / (n - 1.0))
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Combine two accumulators (Chan's pairwise update). Merge order is
    /// chosen by the caller and must be kept fixed for reproducible output.
    pub fn merge(&mut self, other: &WeightedMeanVar) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let total = self.weight + other.weight;
        let delta = other.mean - self.mean;
        self.mean += delta * (other.weight / total);
        self.m2 += other.m2 + delta * delta * (self.weight * other.weight / total);
        self.weight = total;
        self.count += other.count;
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Ordinary least squares line fit `y = slope * x + intercept`.
///
/// Returns `None` when the abscissae are degenerate (all equal).
pub fn least_squares_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}
