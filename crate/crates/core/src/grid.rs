//! Uniform 2D sampling grids.
//!
//! Two layouts are supported: a Cartesian rectangle with both endpoints
//! included, and a polar annulus with the angular endpoint `2*pi` excluded
//! (the azimuthal direction is periodic). Polar grids never include the
//! origin: the radial coordinate starts at `r_min > 0` because the fields of
//! interest (velocity, quantum potential) are allowed to be singular there.

use crate::error::{Error, Result};
use std::f64::consts::TAU;

const MIN_SAMPLES: usize = 16;

/// Uniformly sampled rectangle `[x_min, x_max] x [y_min, y_max]`, endpoints
/// included. Node `(ix, iy)` maps to linear index `iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
}

impl CartesianGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        for (name, v) in [("x_min", x_min), ("x_max", x_max), ("y_min", y_min), ("y_max", y_max)] {
            if !v.is_finite() {
                return Err(Error::InvalidGrid(format!("{name} must be finite, got {v}")));
            }
        }
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidGrid(format!(
                "empty extent: [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        if nx < MIN_SAMPLES || ny < MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_SAMPLES} samples per axis, got {nx} x {ny}"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square grid centered on the origin with half-width `half`.
    pub fn centered_square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }
}

/// Uniformly sampled annulus `[r_min, r_max] x [0, 2*pi)`. The angular
/// endpoint is excluded and the angular axis wraps around. Node `(ir, iphi)`
/// maps to linear index `ir * nphi + iphi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    r_min: f64,
    r_max: f64,
    nr: usize,
    nphi: usize,
}

impl PolarGrid {
    pub fn new(r_min: f64, r_max: f64, nr: usize, nphi: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) {
            return Err(Error::InvalidGrid("radii must be finite".into()));
        }
        if r_min <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "r_min must be positive (the origin is excluded), got {r_min}"
            )));
        }
        if r_max <= r_min {
            return Err(Error::InvalidGrid(format!("need r_max > r_min, got [{r_min}, {r_max}]")));
        }
        if nr < MIN_SAMPLES || nphi < MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_SAMPLES} samples per axis, got {nr} x {nphi}"
            )));
        }
        if !nphi.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("nphi must be even, got {nphi}")));
        }
        Ok(Self { r_min, r_max, nr, nphi })
    }

    /// Annulus that stops half a radial cell short of the origin:
    /// `r_min = dr / 2` with `r_max = (nr - 1/2) * dr`.
    pub fn half_cell(r_max: f64, nr: usize, nphi: usize) -> Result<Self> {
        if nr < 2 {
            return Err(Error::InvalidGrid("need nr >= 2".into()));
        }
        let dr = r_max / (nr as f64 - 0.5);
        Self::new(0.5 * dr, r_max, nr, nphi)
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nr - 1) as f64
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.nphi as f64
    }

    pub fn r(&self, ir: usize) -> f64 {
        self.r_min + ir as f64 * self.dr()
    }

    pub fn phi(&self, iphi: usize) -> f64 {
        iphi as f64 * self.dphi()
    }

    pub fn index(&self, ir: usize, iphi: usize) -> usize {
        ir * self.nphi + iphi
    }

    pub fn node_count(&self) -> usize {
        self.nr * self.nphi
    }
}

/// Either grid flavor. Fields carry one of these so that differential
/// operators can dispatch on the layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid2D {
    Cartesian(CartesianGrid),
    Polar(PolarGrid),
}

impl From<CartesianGrid> for Grid2D {
    fn from(g: CartesianGrid) -> Self {
        Grid2D::Cartesian(g)
    }
}

impl From<PolarGrid> for Grid2D {
    fn from(g: PolarGrid) -> Self {
        Grid2D::Polar(g)
    }
}

impl Grid2D {
    pub fn node_count(&self) -> usize {
        match self {
            Grid2D::Cartesian(g) => g.node_count(),
            Grid2D::Polar(g) => g.node_count(),
        }
    }

    /// Native coordinates of a node: `(x, y)` on Cartesian grids,
    /// `(r, phi)` on polar grids.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        match self {
            Grid2D::Cartesian(g) => {
                let ix = idx % g.nx();
                let iy = idx / g.nx();
                (g.x(ix), g.y(iy))
            }
            Grid2D::Polar(g) => {
                let iphi = idx % g.nphi();
                let ir = idx / g.nphi();
                (g.r(ir), g.phi(iphi))
            }
        }
    }

    /// Position of a node in the plane, regardless of layout.
    pub fn position(&self, idx: usize) -> (f64, f64) {
        match self {
            Grid2D::Cartesian(_) => self.coords(idx),
            Grid2D::Polar(_) => {
                let (r, phi) = self.coords(idx);
                (r * phi.cos(), r * phi.sin())
            }
        }
    }

    pub fn as_cartesian(&self) -> Option<&CartesianGrid> {
        match self {
            Grid2D::Cartesian(g) => Some(g),
            Grid2D::Polar(_) => None,
        }
    }

    pub fn as_polar(&self) -> Option<&PolarGrid> {
        match self {
            Grid2D::Polar(g) => Some(g),
            Grid2D::Cartesian(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_spacing_and_layout() {
        let g = CartesianGrid::new(-1.0, 1.0, 0.0, 4.0, 21, 17).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert!((g.dy() - 0.25).abs() < 1e-15);
        assert_eq!(g.index(3, 2), 2 * 21 + 3);
        let grid: Grid2D = g.into();
        let (x, y) = grid.coords(g.index(3, 2));
        assert!((x - (-0.7)).abs() < 1e-15);
        assert!((y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cartesian_rejects_small_and_empty() {
        assert!(CartesianGrid::new(0.0, 1.0, 0.0, 1.0, 8, 32).is_err());
        assert!(CartesianGrid::new(1.0, 1.0, 0.0, 1.0, 32, 32).is_err());
        assert!(CartesianGrid::new(f64::NAN, 1.0, 0.0, 1.0, 32, 32).is_err());
    }

    #[test]
    fn polar_excludes_origin_and_angular_endpoint() {
        assert!(PolarGrid::new(0.0, 1.0, 32, 32).is_err());
        assert!(PolarGrid::new(-0.1, 1.0, 32, 32).is_err());
        assert!(PolarGrid::new(0.1, 1.0, 32, 31).is_err());
        let g = PolarGrid::new(0.1, 1.0, 32, 64).unwrap();
        assert!((g.phi(0)).abs() < 1e-15);
        let last = g.phi(g.nphi() - 1);
        assert!(last < TAU);
        assert!((last + g.dphi() - TAU).abs() < 1e-12);
    }

    #[test]
    fn half_cell_offset() {
        let g = PolarGrid::half_cell(2.0, 64, 64).unwrap();
        assert!((g.r_min() - 0.5 * g.dr()).abs() < 1e-14);
        assert!((g.r(g.nr() - 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polar_positions() {
        let g = PolarGrid::new(0.5, 1.5, 16, 16).unwrap();
        let grid: Grid2D = g.into();
        let idx = g.index(0, 4); // r = 0.5, phi = pi/2
        let (x, y) = grid.position(idx);
        assert!(x.abs() < 1e-12);
        assert!((y - 0.5).abs() < 1e-12);
    }
}
