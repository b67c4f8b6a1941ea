//! Truncated Gaussian mollifier acting on the first coordinate only.

use crate::error::{Error, Result};
use statrs::function::erf::erf;

/// `eta(x1) = c exp(-x1^2 / (2 eps^2))` for `|x1| < R_c`, zero outside,
/// with `R_c = rc_factor * eps`.
///
/// The normalisation `c` is a units convention: every profile is linear in
/// `c` and the diffusion kernel quadratic, so the choice only fixes the
/// scale of the outputs. The default makes the bulk phase field the
/// smoothed energy density: `c = 1 / (A_cross eps sqrt(2 pi) erf(rc/sqrt 2))`
/// with `A_cross` the box cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    epsilon: f64,
    rc_factor: f64,
    c: f64,
}

impl Mollifier {
    /// Density normalisation over the given cross-section area.
    pub fn density_normalized(epsilon: f64, rc_factor: f64, a_cross: f64) -> Result<Self> {
        if !(a_cross > 0.0) {
            return Err(Error::Config(format!(
                "cross-section area must be positive, got {a_cross}"
            )));
        }
        Self::check(epsilon, rc_factor)?;
        let mass = epsilon * (2.0 * std::f64::consts::PI).sqrt() * erf(rc_factor / 2f64.sqrt());
        Ok(Mollifier {
            epsilon,
            rc_factor,
            c: 1.0 / (a_cross * mass),
        })
    }

    /// User-supplied normalisation constant.
    pub fn with_constant(epsilon: f64, rc_factor: f64, c: f64) -> Result<Self> {
        Self::check(epsilon, rc_factor)?;
        if !(c > 0.0) {
            return Err(Error::Config(format!(
                "normalisation constant must be positive, got {c}"
            )));
        }
        Ok(Mollifier {
            epsilon,
            rc_factor,
            c,
        })
    }

    fn check(epsilon: f64, rc_factor: f64) -> Result<()> {
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!(
                "smoothing parameter must be positive, got {epsilon}"
            )));
        }
        if !(rc_factor > 0.0) {
            return Err(Error::Config(format!(
                "cutoff factor must be positive, got {rc_factor}"
            )));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rc_factor(&self) -> f64 {
        self.rc_factor
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Cutoff radius `R_c = rc_factor * eps`.
    pub fn cutoff(&self) -> f64 {
        self.rc_factor * self.epsilon
    }

    /// Value, first and second derivative; all three vanish for
    /// `|x1| >= R_c`.
    #[inline]
    pub fn eval(&self, x1: f64) -> (f64, f64, f64) {
        if x1.abs() >= self.cutoff() {
            return (0.0, 0.0, 0.0);
        }
        let inv_e2 = 1.0 / (self.epsilon * self.epsilon);
        let eta = self.c * (-0.5 * x1 * x1 * inv_e2).exp();
        let d1 = -x1 * inv_e2 * eta;
        let d2 = (x1 * x1 * inv_e2 - 1.0) * inv_e2 * eta;
        (eta, d1, d2)
    }

    /// Value only.
    #[inline]
    pub fn value(&self, x1: f64) -> f64 {
        if x1.abs() >= self.cutoff() {
            return 0.0;
        }
        let inv_e2 = 1.0 / (self.epsilon * self.epsilon);
        self.c * (-0.5 * x1 * x1 * inv_e2).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cutoff_attenuation_matches_closed_form() {
        let m = Mollifier::density_normalized(1.0, 6.0, 100.0).unwrap();
        let rc = m.cutoff();
        // exp(-rc_factor^2 / 2) = exp(-18), evaluated just inside the cutoff.
        let inside = f64::next_down(rc);
        let ratio = m.value(inside) / m.value(0.0);
        assert_relative_eq!(ratio, (-18.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(ratio, 1.5229979744712628e-8, max_relative = 1e-12);
        assert_eq!(m.eval(rc), (0.0, 0.0, 0.0));
        assert_eq!(m.eval(-rc - 0.5), (0.0, 0.0, 0.0));
    }

    #[test]
    fn derivatives_at_origin() {
        let m = Mollifier::with_constant(0.7, 6.0, 2.5).unwrap();
        let (eta0, d1, d2) = m.eval(0.0);
        assert_eq!(d1, 0.0);
        assert_relative_eq!(d2, -eta0 / (0.7 * 0.7), max_relative = 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Mollifier::density_normalized(0.9, 6.0, 50.0).unwrap();
        let rc = m.cutoff();
        // Error scale for both derivatives is set by the peak values.
        let d1_scale = m.eval(0.9).1.abs();
        let d2_scale = m.eval(0.0).2.abs();
        let h1 = 1e-6;
        let h2 = 1e-4; // second differences need a larger step against roundoff
        for i in 0..100 {
            let x = -0.95 * rc + 1.9 * rc * (i as f64 + 0.5) / 100.0;
            let (eta, d1, d2) = m.eval(x);
            let fd1 = (m.eval(x + h1).0 - m.eval(x - h1).0) / (2.0 * h1);
            let fd2 = (m.eval(x + h2).0 - 2.0 * eta + m.eval(x - h2).0) / (h2 * h2);
            assert!((d1 - fd1).abs() <= 1e-8 * d1_scale, "d1 at {x}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() <= 1e-6 * d2_scale, "d2 at {x}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn density_normalisation_has_unit_mass_per_area() {
        // integral of eta over x1 equals 1 / a_cross by construction.
        let a_cross = 37.5;
        let m = Mollifier::density_normalized(1.3, 6.0, a_cross).unwrap();
        let rc = m.cutoff();
        let n = 200_000;
        let h = 2.0 * rc / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let x = -rc + (i as f64 + 0.5) * h;
            sum += m.value(x) * h;
        }
        assert_relative_eq!(sum, 1.0 / a_cross, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Mollifier::density_normalized(0.0, 6.0, 1.0).is_err());
        assert!(Mollifier::density_normalized(1.0, -1.0, 1.0).is_err());
        assert!(Mollifier::density_normalized(1.0, 6.0, 0.0).is_err());
        assert!(Mollifier::with_constant(1.0, 6.0, 0.0).is_err());
    }
}
