//! Mollified profiles of per-particle quantities and the three drift terms
//! of the phase-field equation of motion.
//!
//! For a configuration X the phase field is `m(x) = sum_j m_j eta(x - X_j)`
//! with `m_j` the per-particle potential energy. Applying the chain rule to
//! `m` under the overdamped dynamics splits the drift into a term with two
//! mollifier derivatives, one with one derivative and one with none:
//!
//! * `kB T * d2m/dx1^2`
//! * `d/dx1 a1`, `a1 = sum_j (kB T - m_j) [F_j]_1 eta(x - X_j)`
//! * `a0 = sum_j (kB T G_j - |F_j|^2 / 2) eta(x - X_j)
//!        - 1/2 sum_j sum_{i != j} (f_ij . F_j) eta(x - X_i)`
//!
//! with `G_j` the negated force divergence accumulated by the force loop
//! and `f_ij` the pair force contributions.

use super::grid::Grid;
use super::mollifier::Mollifier;
use super::profile::Profile;
use crate::error::Result;
use crate::potential::PairPotential;
use crate::system::{dot, norm2, CellList, Configuration, ForceField};

/// Phase-field sample: per-particle energies smoothed onto the grid.
pub fn phase_field_values(
    config: &Configuration,
    field: &ForceField,
    grid: &Grid,
    moll: &Mollifier,
) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let rc = moll.cutoff();
    for (j, p) in config.positions.iter().enumerate() {
        let mj = field.site_energy[j];
        grid.for_points_within(p[0], rc, |i, sep| {
            out[i] += mj * moll.value(sep);
        });
    }
    out
}

/// Particle-density sample: unit weights smoothed onto the grid.
pub fn density_values(config: &Configuration, grid: &Grid, moll: &Mollifier) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let rc = moll.cutoff();
    for p in &config.positions {
        grid.for_points_within(p[0], rc, |i, sep| {
            out[i] += moll.value(sep);
        });
    }
    out
}

pub fn phase_field_profile(
    config: &Configuration,
    field: &ForceField,
    grid: &Grid,
    moll: &Mollifier,
) -> Profile {
    Profile::from_values(*grid, &phase_field_values(config, field, grid, moll))
}

pub fn density_profile(config: &Configuration, grid: &Grid, moll: &Mollifier) -> Profile {
    Profile::from_values(*grid, &density_values(config, grid, moll))
}

/// The three drift terms evaluated for one configuration. `d2m` is the bare
/// second derivative of the phase field; the composed drift multiplies it
/// by `kB T`.
#[derive(Debug, Clone)]
pub struct DriftSample {
    pub d2m: Vec<f64>,
    pub a1: Vec<f64>,
    pub da1: Vec<f64>,
    pub a0: Vec<f64>,
    pub k_b_t: f64,
}

impl DriftSample {
    /// Composed total drift `kB T d2m + da1/dx1 + a0`.
    pub fn total(&self) -> Vec<f64> {
        self.d2m
            .iter()
            .zip(&self.da1)
            .zip(&self.a0)
            .map(|((&d2m, &da1), &a0)| self.k_b_t * d2m + da1 + a0)
            .collect()
    }
}

/// Evaluate the drift terms of one configuration. `field` must belong to
/// `config`; `cells` must have been built with at least the potential range.
pub fn drift_values(
    config: &Configuration,
    field: &ForceField,
    pot: &dyn PairPotential,
    cells: &CellList,
    grid: &Grid,
    moll: &Mollifier,
    k_b_t: f64,
) -> DriftSample {
    let n = config.len();
    let k = grid.len();
    let rc = moll.cutoff();
    let mut d2m = vec![0.0; k];
    let mut a1 = vec![0.0; k];
    let mut da1 = vec![0.0; k];
    let mut a0 = vec![0.0; k];

    // Pair-force cross terms s_i = sum_{j != i} f_ij . F_j.
    let mut s = vec![0.0; n];
    cells.for_each_pair(config, |i, j, r, disp| {
        let d1 = pot.eval(r).1;
        let scale = d1 / r;
        // disp is the minimum image of X_j - X_i, so f_ij = -scale * disp.
        s[i] -= scale * dot(&disp, &field.forces[j]);
        s[j] += scale * dot(&disp, &field.forces[i]);
    });

    for j in 0..n {
        let x1 = config.positions[j][0];
        let mj = field.site_energy[j];
        let fj1 = field.forces[j][0];
        let a1_coef = (k_b_t - mj) * fj1;
        let a0_coef = k_b_t * field.force_divergence[j]
            - 0.5 * norm2(&field.forces[j])
            - 0.5 * s[j];
        grid.for_points_within(x1, rc, |i, sep| {
            let (eta, e1, e2) = moll.eval(sep);
            d2m[i] += mj * e2;
            a1[i] += a1_coef * eta;
            da1[i] += a1_coef * e1;
            a0[i] += a0_coef * eta;
        });
    }

    DriftSample {
        d2m,
        a1,
        da1,
        a0,
        k_b_t,
    }
}

/// Accumulated drift-term profiles over a sample set.
#[derive(Debug, Clone)]
pub struct DriftTerms {
    pub d2m: Profile,
    pub a1: Profile,
    pub da1: Profile,
    pub a0: Profile,
    pub k_b_t: f64,
}

impl DriftTerms {
    pub fn new(grid: Grid, k_b_t: f64) -> Self {
        DriftTerms {
            d2m: Profile::new(grid),
            a1: Profile::new(grid),
            da1: Profile::new(grid),
            a0: Profile::new(grid),
            k_b_t,
        }
    }

    pub fn push(&mut self, sample: &DriftSample, weight: f64) {
        self.d2m.push(&sample.d2m, weight);
        self.a1.push(&sample.a1, weight);
        self.da1.push(&sample.da1, weight);
        self.a0.push(&sample.a0, weight);
    }

    pub fn merge(&mut self, other: &DriftTerms) {
        self.d2m.merge(&other.d2m);
        self.a1.merge(&other.a1);
        self.da1.merge(&other.da1);
        self.a0.merge(&other.a0);
    }

    pub fn count(&self) -> u64 {
        self.d2m.count()
    }

    /// Mean composed drift; the term-wise sum holds exactly because the
    /// total is assembled from the accumulated means.
    pub fn total_mean(&self) -> Vec<f64> {
        let d2m = self.d2m.mean();
        let da1 = self.da1.mean();
        let a0 = self.a0.mean();
        d2m.iter()
            .zip(&da1)
            .zip(&a0)
            .map(|((&d2m, &da1), &a0)| self.k_b_t * d2m + da1 + a0)
            .collect()
    }

    /// Mean diffusion part `kB T * d2m`.
    pub fn diffusion_mean(&self) -> Vec<f64> {
        self.d2m.mean().iter().map(|&v| self.k_b_t * v).collect()
    }
}

/// Single-configuration convenience wrapper.
pub fn drift_profiles(
    config: &Configuration,
    field: &ForceField,
    pot: &dyn PairPotential,
    grid: &Grid,
    moll: &Mollifier,
    k_b_t: f64,
) -> Result<DriftTerms> {
    let cells = CellList::build(config, pot.r_cut())?;
    let sample = drift_values(config, field, pot, &cells, grid, moll, k_b_t);
    let mut terms = DriftTerms::new(*grid, k_b_t);
    terms.push(&sample, 1.0);
    Ok(terms)
}
