//! Sampled fields on 2D grids.
//!
//! `ScalarField2D` holds complex samples (wavefunctions), `RealField2D` real
//! samples (amplitudes, phases, potentials, residuals), and `VectorField2D`
//! a pair of real component arrays. Vector components are `(x, y)` on
//! Cartesian grids and physical `(radial, azimuthal)` on polar grids.
//!
//! Constructed fields are finite everywhere. Fields derived by the
//! decomposition in [`crate::madelung`] may instead carry `NaN` at masked
//! nodes; consumers in this crate treat `NaN` as "no data here".

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use num_complex::Complex64;

/// Complex scalar samples, one per grid node.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<Complex64>,
}

/// Builds a field by evaluating `generator` at every node. The generator
/// receives native node coordinates: `(x, y)` on Cartesian grids, `(r, phi)`
/// on polar grids. Non-finite generated values are rejected with the
/// offending node location.
pub fn build_field<G, F>(grid: G, generator: F) -> Result<ScalarField2D>
where
    G: Into<Grid2D>,
    F: Fn(f64, f64) -> Complex64,
{
    let grid = grid.into();
    let n = grid.node_count();
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let (a, b) = grid.coords(idx);
        let v = generator(a, b);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteValue { a, b, value: format!("{v}") });
        }
        values.push(v);
    }
    Ok(ScalarField2D { grid, values })
}

impl ScalarField2D {
    /// Wraps existing samples. The sample count must match the grid.
    pub fn from_values(grid: impl Into<Grid2D>, values: Vec<Complex64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.node_count() {
            return Err(Error::FieldMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid2D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Node-wise RMS of the modulus (plain average over nodes, no metric
    /// weight); used for relative residual norms.
    pub fn rms(&self) -> f64 {
        let n = self.values.len().max(1) as f64;
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt()
    }

    pub fn modulus(&self) -> RealField2D {
        RealField2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm()).collect(),
        }
    }

    pub fn real_part(&self) -> RealField2D {
        RealField2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }

    pub fn imag_part(&self) -> RealField2D {
        RealField2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v.im).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ScalarField2D {
        ScalarField2D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Bilinear interpolation at a point given in plane coordinates.
    ///
    /// On polar grids the point is converted to `(r, phi)` first; the angular
    /// axis wraps, the radial axis must stay within `[r_min, r_max]`.
    pub fn interpolate(&self, x: f64, y: f64) -> Result<Complex64> {
        match &self.grid {
            Grid2D::Cartesian(g) => {
                let fx = (x - g.x_min()) / g.dx();
                let fy = (y - g.y_min()) / g.dy();
                let eps = 1e-9;
                if fx < -eps || fx > (g.nx() - 1) as f64 + eps || fy < -eps || fy > (g.ny() - 1) as f64 + eps {
                    return Err(Error::OutsideDomain { x, y });
                }
                let ix = (fx.floor() as usize).min(g.nx() - 2);
                let iy = (fy.floor() as usize).min(g.ny() - 2);
                let tx = (fx - ix as f64).clamp(0.0, 1.0);
                let ty = (fy - iy as f64).clamp(0.0, 1.0);
                let v00 = self.values[g.index(ix, iy)];
                let v10 = self.values[g.index(ix + 1, iy)];
                let v01 = self.values[g.index(ix, iy + 1)];
                let v11 = self.values[g.index(ix + 1, iy + 1)];
                Ok(v00 * ((1.0 - tx) * (1.0 - ty))
                    + v10 * (tx * (1.0 - ty))
                    + v01 * ((1.0 - tx) * ty)
                    + v11 * (tx * ty))
            }
            Grid2D::Polar(g) => {
                let r = x.hypot(y);
                let phi = y.atan2(x).rem_euclid(std::f64::consts::TAU);
                let fr = (r - g.r_min()) / g.dr();
                let eps = 1e-9;
                if fr < -eps || fr > (g.nr() - 1) as f64 + eps {
                    return Err(Error::OutsideDomain { x, y });
                }
                let ir = (fr.floor() as usize).min(g.nr() - 2);
                let tr = (fr - ir as f64).clamp(0.0, 1.0);
                let fphi = phi / g.dphi();
                let ip = (fphi.floor() as usize).min(g.nphi() - 1);
                let tp = (fphi - ip as f64).clamp(0.0, 1.0);
                let ipn = (ip + 1) % g.nphi();
                let v00 = self.values[g.index(ir, ip)];
                let v10 = self.values[g.index(ir, ipn)];
                let v01 = self.values[g.index(ir + 1, ip)];
                let v11 = self.values[g.index(ir + 1, ipn)];
                Ok(v00 * ((1.0 - tp) * (1.0 - tr))
                    + v10 * (tp * (1.0 - tr))
                    + v01 * ((1.0 - tp) * tr)
                    + v11 * (tp * tr))
            }
        }
    }
}

/// Real scalar samples, one per grid node.
#[derive(Debug, Clone)]
pub struct RealField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RealField2D {
    pub fn from_values(grid: impl Into<Grid2D>, values: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.node_count() {
            return Err(Error::FieldMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn build<G, F>(grid: G, generator: F) -> Result<Self>
    where
        G: Into<Grid2D>,
        F: Fn(f64, f64) -> f64,
    {
        let grid = grid.into();
        let n = grid.node_count();
        let mut values = Vec::with_capacity(n);
        for idx in 0..n {
            let (a, b) = grid.coords(idx);
            let v = generator(a, b);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { a, b, value: format!("{v}") });
            }
            values.push(v);
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of nodes holding `NaN` (masked nodes in derived fields).
    pub fn masked_fraction(&self) -> f64 {
        let masked = self.values.iter().filter(|v| v.is_nan()).count();
        masked as f64 / self.values.len().max(1) as f64
    }

    /// Promotes to a complex field with zero imaginary part.
    pub fn to_complex(&self) -> ScalarField2D {
        ScalarField2D {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// Two real component arrays per grid: `(x, y)` components on Cartesian
/// grids, physical `(radial, azimuthal)` components on polar grids.
#[derive(Debug, Clone)]
pub struct VectorField2D {
    grid: Grid2D,
    comp0: Vec<f64>,
    comp1: Vec<f64>,
}

impl VectorField2D {
    pub fn from_components(grid: impl Into<Grid2D>, comp0: Vec<f64>, comp1: Vec<f64>) -> Result<Self> {
        let grid = grid.into();
        if comp0.len() != grid.node_count() || comp1.len() != grid.node_count() {
            return Err(Error::FieldMismatch(format!(
                "component lengths {} / {} for a grid with {} nodes",
                comp0.len(),
                comp1.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, comp0, comp1 })
    }

    pub(crate) fn from_components_unchecked(grid: Grid2D, comp0: Vec<f64>, comp1: Vec<f64>) -> Self {
        debug_assert_eq!(comp0.len(), grid.node_count());
        debug_assert_eq!(comp1.len(), grid.node_count());
        Self { grid, comp0, comp1 }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// First component: `x` on Cartesian grids, radial on polar grids.
    pub fn comp0(&self) -> &[f64] {
        &self.comp0
    }

    /// Second component: `y` on Cartesian grids, azimuthal on polar grids.
    pub fn comp1(&self) -> &[f64] {
        &self.comp1
    }

    pub fn magnitude_squared(&self, idx: usize) -> f64 {
        self.comp0[idx] * self.comp0[idx] + self.comp1[idx] * self.comp1[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CartesianGrid, PolarGrid};
    use std::f64::consts::TAU;

    #[test]
    fn constant_generator() {
        let g = CartesianGrid::centered_square(1.0, 32).unwrap();
        let f = build_field(g, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn generator_sees_native_coordinates() {
        // x + i y evaluated at a known node
        let g = CartesianGrid::new(0.0, 1.0, 0.0, 1.0, 17, 17).unwrap();
        let f = build_field(g, Complex64::new).unwrap();
        let idx = g.index(8, 8); // (0.5, 0.5)
        assert!((f.value(idx) - Complex64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn unit_modulus_phase_factor_on_polar() {
        let g = PolarGrid::new(0.1, 1.0, 16, 32).unwrap();
        let f = build_field(g, |_r, phi| Complex64::from_polar(1.0, phi)).unwrap();
        for v in f.values() {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_nonfinite_generator() {
        let g = CartesianGrid::centered_square(1.0, 17).unwrap();
        // the odd sample count puts a node exactly on x = 0
        let err = build_field(g, |x, _| Complex64::new(1.0 / x, 0.0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0, "), "error should name the node: {msg}");
        assert!(build_field(g, |_, _| Complex64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn bilinear_interpolation_reproduces_bilinear_functions() {
        let g = CartesianGrid::new(0.0, 2.0, 0.0, 2.0, 21, 21).unwrap();
        let f = build_field(g, |x, y| Complex64::new(1.0 + 2.0 * x - y + 0.5 * x * y, 0.0)).unwrap();
        for &(x, y) in &[(0.13, 1.71), (1.99, 0.02), (0.5, 0.5)] {
            let got = f.interpolate(x, y).unwrap().re;
            let want = 1.0 + 2.0 * x - y + 0.5 * x * y;
            assert!((got - want).abs() < 1e-12, "at ({x},{y}): {got} vs {want}");
        }
        assert!(f.interpolate(2.5, 0.0).is_err());
    }

    #[test]
    fn polar_interpolation_wraps_in_angle() {
        let g = PolarGrid::new(0.5, 1.5, 16, 64).unwrap();
        let f = build_field(g, Complex64::from_polar).unwrap();
        // a point just below the positive x axis lands in the wrap cell
        let phi = TAU - 0.25 * g.dphi();
        let (x, y) = (1.0 * phi.cos(), 1.0 * phi.sin());
        let v = f.interpolate(x, y).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-2);
        assert!((v.arg().rem_euclid(TAU) - phi).abs() < 1e-2);
    }
}
