//! External potentials and their behavior at the origin.
//!
//! A potential is a pure function of position together with a declared
//! singularity class. The class matters only near `r = 0`: an attractive
//! singularity at least as strong as `-hbar^2 / (8 m r^2)` makes the spectrum
//! unbounded below (states collapse onto the origin), so such potentials are
//! rejected by every solver and residual routine in this crate.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// How a potential behaves as `r -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityClass {
    /// Finite on every bounded region.
    Regular,
    /// Unbounded at the origin, but attracting strictly slower than
    /// `-hbar^2 / (8 m r^2)` (or repulsive).
    Mild,
    /// Attracts at least as fast as `-hbar^2 / (8 m r^2)`; rejected as input.
    Forbidden,
}

#[derive(Clone)]
enum PotentialFn {
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Cartesian(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

/// A pure potential-energy function `U` with a declared [`SingularityClass`].
#[derive(Clone)]
pub struct Potential {
    func: PotentialFn,
    class: SingularityClass,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.func {
            PotentialFn::Radial(_) => "radial",
            PotentialFn::Cartesian(_) => "cartesian",
        };
        write!(f, "Potential {{ kind: {kind}, class: {:?} }}", self.class)
    }
}

impl Potential {
    /// The zero potential.
    pub fn free() -> Self {
        Self {
            func: PotentialFn::Radial(Arc::new(|_| 0.0)),
            class: SingularityClass::Regular,
        }
    }

    /// Isotropic harmonic trap `U(r) = m omega^2 r^2 / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        let c = 0.5 * mass * omega * omega;
        Self {
            func: PotentialFn::Radial(Arc::new(move |r| c * r * r)),
            class: SingularityClass::Regular,
        }
    }

    /// Radial polynomial `U(r) = sum_k coeffs[k] * r^k`.
    pub fn radial_polynomial(coeffs: &[f64]) -> Self {
        let coeffs = coeffs.to_vec();
        Self {
            func: PotentialFn::Radial(Arc::new(move |r| {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
            })),
            class: SingularityClass::Regular,
        }
    }

    /// Central potential with a caller-declared singularity class.
    pub fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static, class: SingularityClass) -> Self {
        Self {
            func: PotentialFn::Radial(Arc::new(f)),
            class,
        }
    }

    /// General planar potential with a caller-declared singularity class.
    pub fn cartesian(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        class: SingularityClass,
    ) -> Self {
        Self {
            func: PotentialFn::Cartesian(Arc::new(f)),
            class,
        }
    }

    /// Central potential whose class is probed numerically: `U(r) r^2` is
    /// sampled on a decreasing sequence of radii and compared against the
    /// collapse threshold `-hbar^2 / (8 m)`.
    pub fn radial_probed(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        constants: &PhysicalConstants,
    ) -> Self {
        let threshold = -constants.hbar() * constants.hbar() / (8.0 * constants.mass());
        let mut class = SingularityClass::Regular;
        let mut max_abs: f64 = 0.0;
        for k in 1..=6 {
            let r = 10f64.powi(-k);
            let u = f(r);
            max_abs = max_abs.max(u.abs());
            if u * r * r <= threshold * (1.0 - 1e-9) {
                class = SingularityClass::Forbidden;
                break;
            }
        }
        if class == SingularityClass::Regular && max_abs > 1e4 {
            class = SingularityClass::Mild;
        }
        Self {
            func: PotentialFn::Radial(Arc::new(f)),
            class,
        }
    }

    pub fn class(&self) -> SingularityClass {
        self.class
    }

    /// Errors out for forbidden-class potentials; solvers call this first.
    pub fn require_admissible(&self) -> Result<()> {
        if self.class == SingularityClass::Forbidden {
            Err(Error::ForbiddenPotential)
        } else {
            Ok(())
        }
    }

    pub fn is_central(&self) -> bool {
        matches!(self.func, PotentialFn::Radial(_))
    }

    /// Evaluates at a plane point. Central potentials use `r = |(x, y)|`.
    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        match &self.func {
            PotentialFn::Radial(f) => f(x.hypot(y)),
            PotentialFn::Cartesian(f) => f(x, y),
        }
    }

    /// Evaluates at a radius; errors if the potential is not central.
    pub fn eval_radial(&self, r: f64) -> Result<f64> {
        match &self.func {
            PotentialFn::Radial(f) => Ok(f(r)),
            PotentialFn::Cartesian(_) => Err(Error::NotCentral),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_values() {
        let u = Potential::harmonic(1.0, 1.0);
        assert!((u.eval_radial(2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((u.eval_xy(3.0, 4.0) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn polynomial_horner() {
        let u = Potential::radial_polynomial(&[1.0, 0.0, -2.0, 0.5]);
        let r = 1.3;
        let want = 1.0 - 2.0 * r * r + 0.5 * r * r * r;
        assert!((u.eval_radial(r).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn probe_flags_collapse_strength() {
        let c = PhysicalConstants::default();
        // -0.2 / r^2 crosses the -1/8 threshold
        let forbidden = Potential::radial_probed(|r| -0.2 / (r * r), &c);
        assert_eq!(forbidden.class(), SingularityClass::Forbidden);
        assert!(forbidden.require_admissible().is_err());
        // -0.1 / r^2 is singular but below the threshold
        let mild = Potential::radial_probed(|r| -0.1 / (r * r), &c);
        assert_eq!(mild.class(), SingularityClass::Mild);
        // attractive Coulomb-like tail is milder than r^-2
        let coulomb = Potential::radial_probed(|r| -1.0 / r, &c);
        assert_ne!(coulomb.class(), SingularityClass::Forbidden);
        let regular = Potential::radial_probed(|r| r * r, &c);
        assert_eq!(regular.class(), SingularityClass::Regular);
    }

    #[test]
    fn forbidden_is_rejected() {
        let u = Potential::radial(|r| -1.0 / (r * r), SingularityClass::Forbidden);
        assert!(matches!(u.require_admissible(), Err(Error::ForbiddenPotential)));
    }

    #[test]
    fn cartesian_has_no_radial_form() {
        let u = Potential::cartesian(|x, y| x + y, SingularityClass::Regular);
        assert!(u.eval_radial(1.0).is_err());
        assert!((u.eval_xy(1.0, 2.0) - 3.0).abs() < 1e-15);
    }
}
