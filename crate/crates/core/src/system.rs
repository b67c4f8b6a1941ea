//! Periodic rectangular simulation cell, minimum-image geometry, cell-list
//! neighbour search, and evaluation of forces, per-particle energies and
//! force divergences.

use crate::error::{Error, Result};
use crate::potential::PairPotential;
use rayon::prelude::*;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm2(a: &Vec3) -> f64 {
    dot(a, a)
}

/// Rectangular periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimBox {
    lengths: Vec3,
}

impl SimBox {
    pub fn new(lengths: Vec3) -> Result<Self> {
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!(
                "box lengths must be positive and finite, got {lengths:?}"
            )));
        }
        Ok(SimBox { lengths })
    }

    pub fn lengths(&self) -> Vec3 {
        self.lengths
    }

    pub fn volume(&self) -> f64 {
        self.lengths[0] * self.lengths[1] * self.lengths[2]
    }

    pub fn cross_section(&self) -> f64 {
        self.lengths[1] * self.lengths[2]
    }

    /// Map one separation component into `[-L/2, L/2)`.
    #[inline]
    pub fn min_image_axis(&self, d: f64, axis: usize) -> f64 {
        let l = self.lengths[axis];
        d - l * (d / l + 0.5).floor()
    }

    /// Map a separation vector into the half-open box `[-L/2, L/2)^3`.
    #[inline]
    pub fn min_image(&self, d: Vec3) -> Vec3 {
        [
            self.min_image_axis(d[0], 0),
            self.min_image_axis(d[1], 1),
            self.min_image_axis(d[2], 2),
        ]
    }

    /// Wrap a position into `[0, L)` per axis.
    #[inline]
    pub fn wrap_position(&self, p: Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for d in 0..3 {
            let l = self.lengths[d];
            let mut x = p[d] - l * (p[d] / l).floor();
            if x >= l {
                x -= l;
            }
            if x < 0.0 {
                x = 0.0;
            }
            out[d] = x;
        }
        out
    }

    /// Fail unless every box length can hold the minimum-image convention
    /// for the given interaction radius.
    pub fn check_interaction_radius(&self, r: f64) -> Result<()> {
        for d in 0..3 {
            if self.lengths[d] < 2.0 * r {
                return Err(Error::Config(format!(
                    "box length L{}={} is below twice the interaction radius {r}",
                    d + 1,
                    self.lengths[d]
                )));
            }
        }
        Ok(())
    }
}

/// One snapshot of all particle positions in a periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub sim_box: SimBox,
    pub positions: Vec<Vec3>,
    pub time: f64,
}

impl Configuration {
    pub fn new(sim_box: SimBox, positions: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("configuration needs at least one particle".into()));
        }
        let positions = positions
            .into_iter()
            .map(|p| sim_box.wrap_position(p))
            .collect();
        Ok(Configuration {
            sim_box,
            positions,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn density(&self) -> f64 {
        self.len() as f64 / self.sim_box.volume()
    }
}

/// Forces, per-particle potential-energy contributions and per-particle
/// force divergences for one configuration. Pair-level quantities are
/// recomputed from positions on demand rather than stored.
#[derive(Debug, Clone)]
pub struct ForceField {
    pub forces: Vec<Vec3>,
    pub site_energy: Vec<f64>,
    pub force_divergence: Vec<f64>,
}

impl ForceField {
    fn zeros(n: usize) -> Self {
        ForceField {
            forces: vec![[0.0; 3]; n],
            site_energy: vec![0.0; n],
            force_divergence: vec![0.0; n],
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.site_energy.iter().sum()
    }

    fn add(&mut self, other: &ForceField) {
        for j in 0..self.forces.len() {
            for d in 0..3 {
                self.forces[j][d] += other.forces[j][d];
            }
            self.site_energy[j] += other.site_energy[j];
            self.force_divergence[j] += other.force_divergence[j];
        }
    }
}

/// Sub-cell decomposition of the box for neighbour search.
///
/// Falls back to an all-pairs scan when any direction has fewer than three
/// cells; in that regime the 27-neighbourhood enumeration would miss or
/// duplicate pairs.
#[derive(Debug)]
pub struct CellList {
    dims: [usize; 3],
    cells: Vec<Vec<u32>>,
    all_pairs: bool,
    r_interact: f64,
}

/// Forward half of the 27-cell neighbourhood, fixed enumeration order.
const FORWARD_OFFSETS: [[isize; 3]; 13] = [
    [0, 0, 1],
    [0, 1, -1],
    [0, 1, 0],
    [0, 1, 1],
    [1, -1, -1],
    [1, -1, 0],
    [1, -1, 1],
    [1, 0, -1],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, -1],
    [1, 1, 0],
    [1, 1, 1],
];

impl CellList {
    pub fn build(config: &Configuration, r_interact: f64) -> Result<Self> {
        if !(r_interact > 0.0) {
            return Err(Error::Config(format!(
                "interaction radius must be positive, got {r_interact}"
            )));
        }
        config.sim_box.check_interaction_radius(r_interact)?;
        let lengths = config.sim_box.lengths();
        let mut dims = [0usize; 3];
        for d in 0..3 {
            dims[d] = (lengths[d] / r_interact).floor() as usize;
        }
        let all_pairs = dims.iter().any(|&n| n < 3);
        if all_pairs {
            return Ok(CellList {
                dims: [1, 1, 1],
                cells: Vec::new(),
                all_pairs,
                r_interact,
            });
        }
        let mut cells = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        for (idx, p) in config.positions.iter().enumerate() {
            let c = Self::cell_of(p, &lengths, &dims);
            cells[c].push(idx as u32);
        }
        Ok(CellList {
            dims,
            cells,
            all_pairs,
            r_interact,
        })
    }

    pub fn is_all_pairs(&self) -> bool {
        self.all_pairs
    }

    pub fn r_interact(&self) -> f64 {
        self.r_interact
    }

    /// Number of cell slabs along the first axis; unit for work partitioning.
    pub fn n_slabs(&self) -> usize {
        if self.all_pairs {
            1
        } else {
            self.dims[0]
        }
    }

    #[inline]
    fn cell_of(p: &Vec3, lengths: &Vec3, dims: &[usize; 3]) -> usize {
        let mut idx = [0usize; 3];
        for d in 0..3 {
            let mut c = (p[d] / lengths[d] * dims[d] as f64) as isize;
            // Positions touching L wrap to cell 0.
            if c >= dims[d] as isize {
                c = 0;
            }
            if c < 0 {
                c = 0;
            }
            idx[d] = c as usize;
        }
        (idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]
    }

    #[inline]
    fn linear(&self, cx: usize, cy: usize, cz: usize) -> usize {
        (cx * self.dims[1] + cy) * self.dims[2] + cz
    }

    /// Visit every unordered pair with minimum-image distance below
    /// `r_interact`, calling `f(i, j, r, disp)` with `disp` the minimum
    /// image of `positions[j] - positions[i]`. Enumeration order is fixed.
    pub fn for_each_pair<F>(&self, config: &Configuration, mut f: F)
    where
        F: FnMut(usize, usize, f64, Vec3),
    {
        for slab in 0..self.n_slabs() {
            self.for_each_pair_in_slab(config, slab, &mut f);
        }
    }

    /// Pair visitation restricted to source cells in one x-slab. Together
    /// the slabs cover every pair exactly once.
    pub fn for_each_pair_in_slab<F>(&self, config: &Configuration, slab: usize, f: &mut F)
    where
        F: FnMut(usize, usize, f64, Vec3),
    {
        let r2 = self.r_interact * self.r_interact;
        let pos = &config.positions;
        let bx = &config.sim_box;
        if self.all_pairs {
            debug_assert_eq!(slab, 0);
            for i in 0..pos.len() {
                for j in (i + 1)..pos.len() {
                    let disp = bx.min_image([
                        pos[j][0] - pos[i][0],
                        pos[j][1] - pos[i][1],
                        pos[j][2] - pos[i][2],
                    ]);
                    let d2 = norm2(&disp);
                    if d2 < r2 {
                        f(i, j, d2.sqrt(), disp);
                    }
                }
            }
            return;
        }
        let cx = slab;
        for cy in 0..self.dims[1] {
            for cz in 0..self.dims[2] {
                let home = self.linear(cx, cy, cz);
                let a = &self.cells[home];
                // Pairs within the home cell, ascending index order.
                for (pi, &i) in a.iter().enumerate() {
                    for &j in &a[pi + 1..] {
                        let (i, j) = (i as usize, j as usize);
                        let disp = bx.min_image([
                            pos[j][0] - pos[i][0],
                            pos[j][1] - pos[i][1],
                            pos[j][2] - pos[i][2],
                        ]);
                        let d2 = norm2(&disp);
                        if d2 < r2 {
                            f(i, j, d2.sqrt(), disp);
                        }
                    }
                }
                // Pairs against the forward half-neighbourhood.
                for off in &FORWARD_OFFSETS {
                    let nx = (cx as isize + off[0]).rem_euclid(self.dims[0] as isize) as usize;
                    let ny = (cy as isize + off[1]).rem_euclid(self.dims[1] as isize) as usize;
                    let nz = (cz as isize + off[2]).rem_euclid(self.dims[2] as isize) as usize;
                    let b = &self.cells[self.linear(nx, ny, nz)];
                    for &i in a {
                        for &j in b {
                            let (i, j) = (i as usize, j as usize);
                            let disp = bx.min_image([
                                pos[j][0] - pos[i][0],
                                pos[j][1] - pos[i][1],
                                pos[j][2] - pos[i][2],
                            ]);
                            let d2 = norm2(&disp);
                            if d2 < r2 {
                                f(i, j, d2.sqrt(), disp);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Visit all neighbours of particle `j` within `r_interact`, calling
    /// `f(i, r, disp)` with `disp` the minimum image of
    /// `positions[i] - positions[j]`.
    pub fn for_each_neighbor<F>(&self, config: &Configuration, j: usize, mut f: F)
    where
        F: FnMut(usize, f64, Vec3),
    {
        let r2 = self.r_interact * self.r_interact;
        let pos = &config.positions;
        let bx = &config.sim_box;
        let mut visit = |i: usize| {
            if i == j {
                return;
            }
            let disp = bx.min_image([
                pos[i][0] - pos[j][0],
                pos[i][1] - pos[j][1],
                pos[i][2] - pos[j][2],
            ]);
            let d2 = norm2(&disp);
            if d2 < r2 {
                f(i, d2.sqrt(), disp);
            }
        };
        if self.all_pairs {
            for i in 0..pos.len() {
                visit(i);
            }
            return;
        }
        let lengths = bx.lengths();
        let home = {
            let p = &pos[j];
            let mut idx = [0usize; 3];
            for d in 0..3 {
                let mut c = (p[d] / lengths[d] * self.dims[d] as f64) as isize;
                if c >= self.dims[d] as isize {
                    c = 0;
                }
                if c < 0 {
                    c = 0;
                }
                idx[d] = c as usize;
            }
            idx
        };
        for ox in -1isize..=1 {
            for oy in -1isize..=1 {
                for oz in -1isize..=1 {
                    let nx = (home[0] as isize + ox).rem_euclid(self.dims[0] as isize) as usize;
                    let ny = (home[1] as isize + oy).rem_euclid(self.dims[1] as isize) as usize;
                    let nz = (home[2] as isize + oz).rem_euclid(self.dims[2] as isize) as usize;
                    for &i in &self.cells[self.linear(nx, ny, nz)] {
                        visit(i as usize);
                    }
                }
            }
        }
    }
}

/// One pair's contribution to forces, energies and divergences.
#[inline]
fn pair_terms(
    pot: &dyn PairPotential,
    i: usize,
    j: usize,
    r: f64,
    disp: &Vec3,
    out: &mut ForceField,
) -> Result<()> {
    if r < pot.r_min() {
        return Err(Error::ModelBreakdown {
            i,
            j,
            distance: r,
            r_min: pot.r_min(),
        });
    }
    let (v, d1, d2) = pot.eval_all(r);
    // disp points from i to j, so the pair force on i is d1 * disp / r.
    let s = d1 / r;
    for d in 0..3 {
        out.forces[i][d] += s * disp[d];
        out.forces[j][d] -= s * disp[d];
    }
    let half = 0.5 * v;
    out.site_energy[i] += half;
    out.site_energy[j] += half;
    let g = d2 + 2.0 * s;
    out.force_divergence[i] += g;
    out.force_divergence[j] += g;
    Ok(())
}

/// Forces via the cell list, partitioned over x-slabs. The slab partition
/// and the ordered merge are fixed by geometry, so the result is identical
/// for any worker count.
pub fn compute_forces_with(
    config: &Configuration,
    pot: &dyn PairPotential,
    cells: &CellList,
) -> Result<ForceField> {
    let n = config.len();
    let partials: Vec<Result<ForceField>> = (0..cells.n_slabs())
        .into_par_iter()
        .map(|slab| {
            let mut acc = ForceField::zeros(n);
            let mut status = Ok(());
            cells.for_each_pair_in_slab(config, slab, &mut |i, j, r, disp| {
                if status.is_ok() {
                    status = pair_terms(pot, i, j, r, &disp, &mut acc);
                }
            });
            status.map(|()| acc)
        })
        .collect();
    let mut total = ForceField::zeros(n);
    for partial in partials {
        total.add(&partial?);
    }
    Ok(total)
}

/// Build the cell list and evaluate forces in one call.
pub fn compute_forces(config: &Configuration, pot: &dyn PairPotential) -> Result<ForceField> {
    let cells = CellList::build(config, pot.r_cut())?;
    compute_forces_with(config, pot, &cells)
}

/// O(N^2) reference evaluation with the same contract as `compute_forces`.
/// Kept as an independent oracle for the cell-list path.
pub fn brute_force_reference(
    config: &Configuration,
    pot: &dyn PairPotential,
) -> Result<ForceField> {
    config.sim_box.check_interaction_radius(pot.r_cut())?;
    let n = config.len();
    let mut out = ForceField::zeros(n);
    let r_cut2 = pot.r_cut() * pot.r_cut();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = &config.positions;
            let disp = config.sim_box.min_image([
                p[j][0] - p[i][0],
                p[j][1] - p[i][1],
                p[j][2] - p[i][2],
            ]);
            let d2 = norm2(&disp);
            if d2 < r_cut2 {
                pair_terms(pot, i, j, d2.sqrt(), &disp, &mut out)?;
            }
        }
    }
    Ok(out)
}
