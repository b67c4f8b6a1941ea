//! Radial distribution function over one or more configurations, optionally
//! restricted to reference particles inside an x1 slab.

use crate::error::{Error, Result};
use crate::system::{CellList, Configuration};

#[derive(Debug, Clone)]
pub struct RdfCurve {
    /// Bin centres.
    pub r: Vec<f64>,
    /// g(r) per bin, averaged over configurations.
    pub g: Vec<f64>,
}

impl RdfCurve {
    /// Height of the first maximum and its radius.
    pub fn first_peak(&self) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        for (i, &g) in self.g.iter().enumerate() {
            if g > best.1 {
                best = (self.r[i], g);
            }
        }
        // The global maximum of g(r) is the first peak for the dense
        // systems handled here.
        (best.0, best.1)
    }

    /// Depth of the first minimum after the first peak, searched up to
    /// `r_stop`, as `(radius, value)`.
    pub fn first_minimum_after_peak(&self, r_stop: f64) -> (f64, f64) {
        let (peak_r, _) = self.first_peak();
        let mut best = (peak_r, f64::INFINITY);
        for (i, &g) in self.g.iter().enumerate() {
            if self.r[i] > peak_r && self.r[i] <= r_stop && g < best.1 {
                best = (self.r[i], g);
            }
        }
        best
    }

    /// Local maxima with values above `prominence` strictly inside
    /// `[r_lo, r_hi]`; used to detect split second peaks of a crystal.
    pub fn local_maxima_between(&self, r_lo: f64, r_hi: f64, prominence: f64) -> usize {
        let mut count = 0;
        for i in 1..self.g.len().saturating_sub(1) {
            if self.r[i] < r_lo || self.r[i] > r_hi {
                continue;
            }
            if self.g[i] > prominence
                && self.g[i] > self.g[i - 1] + 1e-12
                && self.g[i] > self.g[i + 1] + 1e-12
            {
                count += 1;
            }
        }
        count
    }
}

/// Compute g(r) with `bins` uniform shells up to `r_max`. With a slab
/// `(x_lo, x_hi)` only particles whose wrapped x1 lies inside it act as
/// reference centres; partners are unrestricted.
pub fn rdf(
    configs: &[Configuration],
    slab: Option<(f64, f64)>,
    bins: usize,
    r_max: f64,
) -> Result<RdfCurve> {
    if configs.is_empty() {
        return Err(Error::Config("need at least one configuration".into()));
    }
    if bins == 0 {
        return Err(Error::Config("need at least one bin".into()));
    }
    let lengths = configs[0].sim_box.lengths();
    let min_half = lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    if !(r_max > 0.0) || r_max > min_half {
        return Err(Error::Config(format!(
            "r_max must lie in (0, {min_half}], got {r_max}"
        )));
    }
    if let Some((lo, hi)) = slab {
        if !(hi > lo) {
            return Err(Error::Config(format!("empty slab [{lo}, {hi})")));
        }
    }

    let dr = r_max / bins as f64;
    let mut g_mean = vec![0.0; bins];
    for config in configs {
        let in_slab = |x: f64| match slab {
            None => true,
            Some((lo, hi)) => x >= lo && x < hi,
        };
        let n_ref = config
            .positions
            .iter()
            .filter(|p| in_slab(p[0]))
            .count();
        if n_ref == 0 {
            return Err(Error::Config("slab contains no reference particles".into()));
        }
        let mut counts = vec![0.0f64; bins];
        let cells = CellList::build(config, r_max)?;
        cells.for_each_pair(config, |i, j, r, _| {
            let bin = ((r / dr) as usize).min(bins - 1);
            if in_slab(config.positions[i][0]) {
                counts[bin] += 1.0;
            }
            if in_slab(config.positions[j][0]) {
                counts[bin] += 1.0;
            }
        });
        let rho = config.density();
        for b in 0..bins {
            let r_lo = b as f64 * dr;
            let r_hi = r_lo + dr;
            let shell = 4.0 / 3.0 * std::f64::consts::PI * (r_hi.powi(3) - r_lo.powi(3));
            g_mean[b] += counts[b] / (n_ref as f64 * rho * shell);
        }
    }
    let n_cfg = configs.len() as f64;
    for g in g_mean.iter_mut() {
        *g /= n_cfg;
    }
    Ok(RdfCurve {
        r: (0..bins).map(|b| (b as f64 + 0.5) * dr).collect(),
        g: g_mean,
    })
}
