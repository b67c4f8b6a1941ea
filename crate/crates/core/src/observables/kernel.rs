//! Grid diffusion kernel of the phase field, accumulated as a symmetric
//! circular band matrix.
//!
//! Per configuration the kernel is `B(x, y) = 2 kB T sum_j (p_j + q_j)`
//! where, writing `P_j(x) = (m_j / eps^2) [x - X_j]_1 eta(x - X_j)` and
//! `v_j(x) = F_j eta(x - X_j) + sum_{i != j} f_ij eta(x - X_i)`,
//!
//! ```text
//! p_j(x,y) = P_j(x) P_j(y) - 1/2 ( P_j(x) [v_j(y)]_1 + P_j(y) [v_j(x)]_1 )
//! q_j(x,y) = 1/4 v_j(x) . v_j(y)
//! ```
//!
//! Grid pairs further apart than twice the potential-plus-mollifier range
//! receive no contribution, which makes the matrix banded under the natural
//! point ordering.

use super::grid::Grid;
use super::mollifier::Mollifier;
use crate::error::{Error, Result};
use crate::potential::PairPotential;
use crate::stats::CompensatedSum;
use crate::system::{CellList, Configuration, ForceField};
use nalgebra::DMatrix;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Symmetric K-by-K matrix in circular band storage with a weighted running
/// mean per entry. Slot `(i, d)` holds the pair `(i, (i + d) mod K)` for
/// `0 <= d <= half_bandwidth`; compensated summation keeps the heavy
/// cancellation across samples in check.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    k: usize,
    dx: f64,
    half_bandwidth: usize,
    sum: Vec<CompensatedSum>,
    weight: f64,
    count: u64,
}

impl BandMatrix {
    /// Accumulator for kernels whose entries vanish beyond `max_range` in
    /// the minimum-image grid distance.
    pub fn new(grid: &Grid, max_range: f64) -> Self {
        let k = grid.len();
        let needed = (max_range / grid.spacing()).ceil() as usize;
        let half_bandwidth = needed.min(k / 2);
        BandMatrix {
            k,
            dx: grid.spacing(),
            half_bandwidth,
            sum: vec![CompensatedSum::new(); k * (half_bandwidth + 1)],
            weight: 0.0,
            count: 0,
        }
    }

    /// Band accumulator sized for a diffusion kernel: entries vanish beyond
    /// `2 (r_cut + R_c)`.
    pub fn for_kernel(grid: &Grid, pot: &dyn PairPotential, moll: &Mollifier) -> Self {
        Self::new(grid, 2.0 * (pot.r_cut() + moll.cutoff()))
    }

    pub fn grid_len(&self) -> usize {
        self.k
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Canonical storage slot for the unordered grid pair `{g1, g2}`, or
    /// `None` when the pair lies outside the band.
    #[inline]
    fn slot(&self, g1: usize, g2: usize) -> Option<usize> {
        let k = self.k;
        let forward = (g2 + k - g1) % k;
        let backward = (g1 + k - g2) % k;
        let (base, d) = if forward < backward {
            (g1, forward)
        } else if backward < forward {
            (g2, backward)
        } else {
            (g1.min(g2), forward)
        };
        if d > self.half_bandwidth {
            return None;
        }
        Some(base * (self.half_bandwidth + 1) + d)
    }

    #[inline]
    fn add(&mut self, g1: usize, g2: usize, value: f64) {
        if let Some(slot) = self.slot(g1, g2) {
            self.sum[slot].add(value);
        } else {
            debug_assert!(
                value == 0.0,
                "out-of-band kernel contribution {value} at ({g1}, {g2})"
            );
        }
    }

    /// Mean of the accumulated entries for the pair `(i, j)`.
    pub fn mean_entry(&self, i: usize, j: usize) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        match self.slot(i, j) {
            Some(slot) => self.sum[slot].value() / self.weight,
            None => 0.0,
        }
    }

    /// Densify the mean matrix.
    pub fn mean_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.k, self.k);
        for i in 0..self.k {
            for d in 0..=self.half_bandwidth {
                let j = (i + d) % self.k;
                if self.slot(i, j) == Some(i * (self.half_bandwidth + 1) + d) {
                    let v = if self.weight == 0.0 {
                        0.0
                    } else {
                        self.sum[i * (self.half_bandwidth + 1) + d].value() / self.weight
                    };
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
        }
        out
    }

    /// Merge another accumulator; callers fix the merge order.
    pub fn merge(&mut self, other: &BandMatrix) {
        assert_eq!(self.k, other.k);
        assert_eq!(self.half_bandwidth, other.half_bandwidth);
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            a.add(b.value());
        }
        self.weight += other.weight;
        self.count += other.count;
    }

    /// Add one configuration's kernel with the given sample weight.
    pub fn accumulate(
        &mut self,
        config: &Configuration,
        field: &ForceField,
        pot: &dyn PairPotential,
        cells: &CellList,
        grid: &Grid,
        moll: &Mollifier,
        k_b_t: f64,
    ) {
        debug_assert_eq!(grid.len(), self.k);
        self.accumulate_weighted(config, field, pot, cells, grid, moll, k_b_t, 1.0);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_weighted(
        &mut self,
        config: &Configuration,
        field: &ForceField,
        pot: &dyn PairPotential,
        cells: &CellList,
        grid: &Grid,
        moll: &Mollifier,
        k_b_t: f64,
        weight: f64,
    ) {
        let rc = moll.cutoff();
        let reach = rc + pot.r_cut();
        let inv_e2 = 1.0 / (moll.epsilon() * moll.epsilon());
        let prefactor = 2.0 * k_b_t * weight;
        let dx = grid.spacing();
        let k = self.k;

        // Window of grid indices influenced by one particle: raw index range
        // around its x1 position, capped at one full period.
        let mut p_loc: Vec<f64> = Vec::new();
        let mut v_loc: Vec<[f64; 3]> = Vec::new();
        for j in 0..config.len() {
            let x1 = config.positions[j][0];
            let lo = ((x1 - reach) / dx).ceil() as i64;
            let hi = ((x1 + reach) / dx).floor() as i64;
            let width = ((hi - lo + 1).max(0) as usize).min(k);
            if width == 0 {
                continue;
            }
            p_loc.clear();
            p_loc.resize(width, 0.0);
            v_loc.clear();
            v_loc.resize(width, [0.0; 3]);

            let mj = field.site_energy[j];
            let fj = field.forces[j];
            for t in 0..width {
                let sep = grid.min_image((lo + t as i64) as f64 * dx - x1);
                let eta = moll.value(sep);
                if eta != 0.0 {
                    p_loc[t] = mj * inv_e2 * sep * eta;
                    for d in 0..3 {
                        v_loc[t][d] = fj[d] * eta;
                    }
                }
            }
            cells.for_each_neighbor(config, j, |_i, r, disp| {
                let d1 = pot.eval(r).1;
                // disp is the minimum image of X_i - X_j; f_ij = d1 * disp / r.
                let scale = d1 / r;
                let xi1 = x1 + disp[0];
                for t in 0..width {
                    let sep = grid.min_image((lo + t as i64) as f64 * dx - xi1);
                    let eta = moll.value(sep);
                    if eta != 0.0 {
                        for d in 0..3 {
                            v_loc[t][d] += scale * disp[d] * eta;
                        }
                    }
                }
            });

            for t1 in 0..width {
                let g1 = (lo + t1 as i64).rem_euclid(k as i64) as usize;
                let (p1, v1) = (p_loc[t1], v_loc[t1]);
                for t2 in t1..width {
                    let (p2, v2) = (p_loc[t2], v_loc[t2]);
                    let value = p1 * p2 - 0.5 * (p1 * v2[0] + p2 * v1[0])
                        + 0.25 * (v1[0] * v2[0] + v1[1] * v2[1] + v1[2] * v2[2]);
                    if value != 0.0 {
                        let g2 = (lo + t2 as i64).rem_euclid(k as i64) as usize;
                        self.add(g1, g2, prefactor * value);
                    }
                }
            }
        }
        self.weight += weight;
        self.count += 1;
    }

    /// Write the mean matrix in the band text format: a header line
    /// `K bandwidth dx`, then one row of `bandwidth + 1` values per grid
    /// point (offsets 0..=bandwidth, circular).
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{} {} {:.16e}", self.k, self.half_bandwidth, self.dx)?;
        for i in 0..self.k {
            let row: Vec<String> = (0..=self.half_bandwidth)
                .map(|d| {
                    let v = if self.weight == 0.0 {
                        0.0
                    } else {
                        self.sum[i * (self.half_bandwidth + 1) + d].value() / self.weight
                    };
                    format!("{v:.16e}")
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read a band text file back as a unit-weight matrix holding the means.
    pub fn read_text(path: &Path) -> Result<Self> {
        let shown = path.display().to_string();
        let corrupt = |reason: String| Error::Integrity {
            path: shown.clone(),
            reason,
        };
        let file = std::fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| corrupt("empty file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(corrupt(format!("bad header {header:?}")));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|_| corrupt("bad grid size".into()))?;
        let half_bandwidth: usize = fields[1]
            .parse()
            .map_err(|_| corrupt("bad bandwidth".into()))?;
        let dx: f64 = fields[2]
            .parse()
            .map_err(|_| corrupt("bad spacing".into()))?;
        if k == 0 || half_bandwidth > k / 2 {
            return Err(corrupt(format!(
                "inconsistent dimensions K={k} bandwidth={half_bandwidth}"
            )));
        }
        let mut sum = vec![CompensatedSum::new(); k * (half_bandwidth + 1)];
        for i in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| corrupt(format!("truncated at row {i}")))??;
            let values: Vec<&str> = line.split_whitespace().collect();
            if values.len() != half_bandwidth + 1 {
                return Err(corrupt(format!(
                    "row {i} has {} fields, expected {}",
                    values.len(),
                    half_bandwidth + 1
                )));
            }
            for (d, v) in values.iter().enumerate() {
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| corrupt(format!("bad float {v:?} in row {i}")))?;
                sum[i * (half_bandwidth + 1) + d].add(parsed);
            }
        }
        Ok(BandMatrix {
            k,
            dx,
            half_bandwidth,
            sum,
            weight: 1.0,
            count: 1,
        })
    }
}
