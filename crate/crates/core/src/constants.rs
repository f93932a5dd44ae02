use crate::error::{Error, Result};

/// Physical constants entering the kinetic term and the phase/action scale.
///
/// Defaults to natural units `hbar = mass = 1`, which every formula in this
/// crate carries symbolically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "hbar must be finite and positive, got {hbar}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "mass must be finite and positive, got {mass}"
            )));
        }
        Ok(Self { hbar, mass })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// The kinetic prefactor `hbar^2 / (2 m)`.
    pub fn kinetic_factor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Wavenumber of a free state of energy `e`: `k = sqrt(2 m E) / hbar`.
    pub fn wavenumber(&self, e: f64) -> f64 {
        (2.0 * self.mass * e).sqrt() / self.hbar
    }
}
