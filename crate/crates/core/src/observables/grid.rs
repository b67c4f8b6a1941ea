//! Uniform periodic evaluation grid along the first coordinate.

use crate::error::{Error, Result};

/// `k` points at `i * dx`, `i = 0..k`, with `k * dx` equal to the periodic
/// extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    k: usize,
    dx: f64,
    length: f64,
}

impl Grid {
    /// Grid with spacing as close as possible to `dx_target`.
    pub fn from_spacing(length: f64, dx_target: f64) -> Result<Self> {
        if !(length > 0.0) || !(dx_target > 0.0) {
            return Err(Error::Config(format!(
                "grid needs positive length and spacing, got {length}, {dx_target}"
            )));
        }
        let k = ((length / dx_target).round() as usize).max(2);
        Ok(Grid {
            k,
            dx: length / k as f64,
            length,
        })
    }

    pub fn with_count(length: f64, k: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Config(format!("grid length must be positive, got {length}")));
        }
        if k < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {k}")));
        }
        Ok(Grid {
            k,
            dx: length / k as f64,
            length,
        })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    pub fn extent(&self) -> f64 {
        self.length
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).map(|i| self.point(i))
    }

    /// Minimum-image separation along the periodic axis, in `[-L/2, L/2)`.
    #[inline]
    pub fn min_image(&self, d: f64) -> f64 {
        d - self.length * (d / self.length + 0.5).floor()
    }

    /// Visit every grid point whose minimum-image separation from `center`
    /// is below `radius`, as `f(index, separation)` with
    /// `separation = point - center` wrapped. Exactly one visit per point.
    #[inline]
    pub fn for_points_within<F: FnMut(usize, f64)>(&self, center: f64, radius: f64, mut f: F) {
        if 2.0 * radius >= self.length {
            for i in 0..self.k {
                f(i, self.min_image(self.point(i) - center));
            }
            return;
        }
        let lo = ((center - radius) / self.dx).ceil() as i64;
        let hi = ((center + radius) / self.dx).floor() as i64;
        for raw in lo..=hi {
            let idx = raw.rem_euclid(self.k as i64) as usize;
            let sep = raw as f64 * self.dx - center;
            if sep.abs() < radius {
                f(idx, sep);
            }
        }
    }

    /// Linear interpolation of periodic nodal values at position `x`.
    pub fn interp_periodic(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.k);
        let s = (x / self.dx).rem_euclid(self.k as f64);
        let i = (s as usize).min(self.k - 1);
        let t = s - i as f64;
        let j = (i + 1) % self.k;
        values[i] + t * (values[j] - values[i])
    }
}
