//! Exp-6 pair potential: analytic evaluation, the cutoff shift that makes it
//! continuously differentiable at `r_cut`, and a uniformly tabulated form
//! evaluated by linear interpolation.

use crate::error::{Error, Result};

/// Repulsion amplitude of the default argon-like parameter set.
pub const DEFAULT_A: f64 = 3.84661e5;
/// Repulsion steepness of the default parameter set.
pub const DEFAULT_B: f64 = 11.4974;
/// Dispersion coefficient of the default parameter set.
pub const DEFAULT_C: f64 = 3.9445;
/// Default interaction cutoff radius in reduced units.
pub const DEFAULT_R_CUT: f64 = 3.0;
/// Default lower validity bound of the tabulated potential.
pub const DEFAULT_R_MIN: f64 = 0.5;
/// Default node count of the tabulated potential.
pub const DEFAULT_N_NODES: usize = 100_000;

/// Parameters of the Exp-6 pair potential `A exp(-B r) - C / r^6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp6Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r_cut: f64,
}

impl Default for Exp6Params {
    fn default() -> Self {
        Exp6Params {
            a: DEFAULT_A,
            b: DEFAULT_B,
            c: DEFAULT_C,
            r_cut: DEFAULT_R_CUT,
        }
    }
}

impl Exp6Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.c > 0.0 && self.r_cut > 0.0) {
            return Err(Error::Config(format!(
                "Exp-6 parameters must be positive: A={}, B={}, C={}, r_cut={}",
                self.a, self.b, self.c, self.r_cut
            )));
        }
        Ok(())
    }

    /// Unshifted potential with its first and second radial derivatives.
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "Exp-6 potential requires r > 0, got {r}"
            )));
        }
        let e = self.a * (-self.b * r).exp();
        let r6 = r.powi(6);
        let value = e - self.c / r6;
        let d1 = -self.b * e + 6.0 * self.c / (r6 * r);
        let d2 = self.b * self.b * e - 42.0 * self.c / (r6 * r * r);
        Ok((value, d1, d2))
    }
}

/// A pair potential usable by the force loop: shifted value and first
/// derivative, plus the second derivative needed by observables.
///
/// `eval` returns `(0, 0)` at and beyond `r_cut`; distances below `r_min`
/// are a model breakdown and must be rejected by the caller (the trait
/// methods themselves only promise garbage-free behaviour down to `r_min`).
pub trait PairPotential: Sync {
    /// Shifted potential value and first derivative at `r`.
    fn eval(&self, r: f64) -> (f64, f64);
    /// Second derivative at `r` (the cutoff shift does not affect it).
    fn second(&self, r: f64) -> f64;
    /// Value, first and second derivative in one call.
    fn eval_all(&self, r: f64) -> (f64, f64, f64) {
        let (v, d1) = self.eval(r);
        (v, d1, self.second(r))
    }
    fn r_cut(&self) -> f64;
    fn r_min(&self) -> f64;
}

/// The analytic shifted Exp-6 potential
/// `phi(r) - phi(r_cut) - (r - r_cut) phi'(r_cut)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedExp6 {
    params: Exp6Params,
    r_min: f64,
    value_at_cut: f64,
    slope_at_cut: f64,
}

impl ShiftedExp6 {
    pub fn new(params: Exp6Params, r_min: f64) -> Result<Self> {
        params.validate()?;
        if !(r_min > 0.0 && r_min < params.r_cut) {
            return Err(Error::Config(format!(
                "require 0 < r_min < r_cut, got r_min={} r_cut={}",
                r_min, params.r_cut
            )));
        }
        let (value_at_cut, slope_at_cut, _) = params.eval(params.r_cut)?;
        Ok(ShiftedExp6 {
            params,
            r_min,
            value_at_cut,
            slope_at_cut,
        })
    }

    pub fn params(&self) -> &Exp6Params {
        &self.params
    }
}

impl PairPotential for ShiftedExp6 {
    fn eval(&self, r: f64) -> (f64, f64) {
        if r >= self.params.r_cut {
            return (0.0, 0.0);
        }
        let (v, d1, _) = self.params.eval(r).expect("r >= r_min > 0");
        (
            v - self.value_at_cut - (r - self.params.r_cut) * self.slope_at_cut,
            d1 - self.slope_at_cut,
        )
    }

    fn second(&self, r: f64) -> f64 {
        if r >= self.params.r_cut {
            return 0.0;
        }
        self.params.eval(r).expect("r >= r_min > 0").2
    }

    fn r_cut(&self) -> f64 {
        self.params.r_cut
    }

    fn r_min(&self) -> f64 {
        self.r_min
    }
}

/// Uniform table of the shifted potential over `[r_min, r_cut]`.
///
/// Nodes hold the shifted value, the shifted first derivative and the
/// (unshifted) second derivative; evaluation interpolates linearly between
/// the two bracketing nodes. The final node is exactly zero in both the
/// value and the first derivative.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    r_min: f64,
    r_cut: f64,
    spacing: f64,
    inv_spacing: f64,
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl PotentialTable {
    pub fn build(params: &Exp6Params, r_min: f64, n_nodes: usize) -> Result<Self> {
        params.validate()?;
        if n_nodes < 2 {
            return Err(Error::Config(format!(
                "potential table needs at least 2 nodes, got {n_nodes}"
            )));
        }
        if !(r_min > 0.0 && r_min < params.r_cut) {
            return Err(Error::Config(format!(
                "require 0 < r_min < r_cut, got r_min={} r_cut={}",
                r_min, params.r_cut
            )));
        }
        let shifted = ShiftedExp6::new(*params, r_min)?;
        let spacing = (params.r_cut - r_min) / (n_nodes - 1) as f64;
        let mut value = Vec::with_capacity(n_nodes);
        let mut d1 = Vec::with_capacity(n_nodes);
        let mut d2 = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let r = if i + 1 == n_nodes {
                params.r_cut
            } else {
                r_min + spacing * i as f64
            };
            let (v, g) = shifted.eval(r);
            value.push(v);
            d1.push(g);
            d2.push(shifted.second(r));
        }
        // The shift construction yields exact zeros at the cutoff node.
        debug_assert_eq!(value[n_nodes - 1], 0.0);
        debug_assert_eq!(d1[n_nodes - 1], 0.0);
        Ok(PotentialTable {
            r_min,
            r_cut: params.r_cut,
            spacing,
            inv_spacing: 1.0 / spacing,
            value,
            d1,
            d2,
        })
    }

    /// Table with the default argon-like parameters and resolution.
    pub fn default_table() -> Self {
        Self::build(&Exp6Params::default(), DEFAULT_R_MIN, DEFAULT_N_NODES)
            .expect("default parameters are valid")
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn n_nodes(&self) -> usize {
        self.value.len()
    }

    /// Checked evaluation: distances below `r_min` are a model breakdown.
    pub fn try_eval(&self, r: f64) -> Result<(f64, f64)> {
        if r < self.r_min {
            return Err(Error::ModelBreakdown {
                i: 0,
                j: 0,
                distance: r,
                r_min: self.r_min,
            });
        }
        Ok(PairPotential::eval(self, r))
    }

    #[inline]
    fn bracket(&self, r: f64) -> (usize, f64) {
        let s = (r - self.r_min) * self.inv_spacing;
        let idx = (s as usize).min(self.value.len() - 2);
        (idx, s - idx as f64)
    }
}

impl PairPotential for PotentialTable {
    #[inline]
    fn eval(&self, r: f64) -> (f64, f64) {
        if r >= self.r_cut {
            return (0.0, 0.0);
        }
        debug_assert!(r >= self.r_min, "r={r} below table range {}", self.r_min);
        let (i, t) = self.bracket(r);
        (
            self.value[i] + t * (self.value[i + 1] - self.value[i]),
            self.d1[i] + t * (self.d1[i + 1] - self.d1[i]),
        )
    }

    #[inline]
    fn second(&self, r: f64) -> f64 {
        if r >= self.r_cut {
            return 0.0;
        }
        debug_assert!(r >= self.r_min);
        let (i, t) = self.bracket(r);
        self.d2[i] + t * (self.d2[i + 1] - self.d2[i])
    }

    #[inline]
    fn eval_all(&self, r: f64) -> (f64, f64, f64) {
        if r >= self.r_cut {
            return (0.0, 0.0, 0.0);
        }
        debug_assert!(r >= self.r_min);
        let (i, t) = self.bracket(r);
        (
            self.value[i] + t * (self.value[i + 1] - self.value[i]),
            self.d1[i] + t * (self.d1[i + 1] - self.d1[i]),
            self.d2[i] + t * (self.d2[i + 1] - self.d2[i]),
        )
    }

    fn r_cut(&self) -> f64 {
        self.r_cut
    }

    fn r_min(&self) -> f64 {
        self.r_min
    }
}
