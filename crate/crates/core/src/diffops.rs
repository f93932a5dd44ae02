//! Second-order finite-difference operators.
//!
//! Interior nodes use the usual central stencils; non-periodic edges use
//! one-sided stencils of the same order, so the truncation error is `O(h^2)`
//! uniformly. The azimuthal axis of a polar grid wraps around. All stencils
//! are exact on polynomials of degree two (per axis), which the tests pin
//! down. Every operator maps node-wise and is a pure function of its input;
//! `NaN` samples propagate to every output node whose stencil touches them.

use crate::constants::PhysicalConstants;
use crate::error::Result;
use crate::field::{RealField2D, ScalarField2D, VectorField2D};
use crate::grid::Grid2D;
use crate::potential::Potential;
use num_complex::Complex64;

/// First derivative along a lane of `n` samples with spacing `h`.
fn d1(get: &dyn Fn(usize) -> f64, n: usize, h: f64, periodic: bool, i: usize) -> f64 {
    if periodic {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        (get(ip) - get(im)) / (2.0 * h)
    } else if i == 0 {
        (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h)
    } else {
        (get(i + 1) - get(i - 1)) / (2.0 * h)
    }
}

/// Second derivative along a lane of `n` samples with spacing `h`.
fn d2(get: &dyn Fn(usize) -> f64, n: usize, h: f64, periodic: bool, i: usize) -> f64 {
    let h2 = h * h;
    if periodic {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        (get(ip) - 2.0 * get(i) + get(im)) / h2
    } else if i == 0 {
        (2.0 * get(0) - 5.0 * get(1) + 4.0 * get(2) - get(3)) / h2
    } else if i == n - 1 {
        (2.0 * get(n - 1) - 5.0 * get(n - 2) + 4.0 * get(n - 3) - get(n - 4)) / h2
    } else {
        (get(i + 1) - 2.0 * get(i) + get(i - 1)) / h2
    }
}

/// Gradient of a real field.
///
/// Cartesian grids return `(d/dx, d/dy)`; polar grids return the physical
/// components `(d/dr, (1/r) d/dphi)` with the angular axis treated as
/// periodic. Fields that are not truly periodic in `phi` (such as a raw
/// branch of the polar angle itself) get wrap artifacts in the two lanes
/// adjacent to `phi = 0`.
pub fn gradient(field: &RealField2D) -> VectorField2D {
    let v = field.values();
    match field.grid() {
        Grid2D::Cartesian(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let (dx, dy) = (g.dx(), g.dy());
            let mut comp0 = vec![0.0; nx * ny];
            let mut comp1 = vec![0.0; nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    let idx = iy * nx + ix;
                    comp0[idx] = d1(&|i| v[iy * nx + i], nx, dx, false, ix);
                    comp1[idx] = d1(&|j| v[j * nx + ix], ny, dy, false, iy);
                }
            }
            VectorField2D::from_components_unchecked(*field.grid(), comp0, comp1)
        }
        Grid2D::Polar(g) => {
            let (nr, nphi) = (g.nr(), g.nphi());
            let (dr, dphi) = (g.dr(), g.dphi());
            let mut comp0 = vec![0.0; nr * nphi];
            let mut comp1 = vec![0.0; nr * nphi];
            for ir in 0..nr {
                let r = g.r(ir);
                for iphi in 0..nphi {
                    let idx = ir * nphi + iphi;
                    comp0[idx] = d1(&|i| v[i * nphi + iphi], nr, dr, false, ir);
                    comp1[idx] = d1(&|j| v[ir * nphi + j], nphi, dphi, true, iphi) / r;
                }
            }
            VectorField2D::from_components_unchecked(*field.grid(), comp0, comp1)
        }
    }
}

/// Laplacian of a real field: the 5-point stencil on Cartesian grids, or
/// `d^2/dr^2 + (1/r) d/dr + (1/r^2) d^2/dphi^2` on polar grids.
pub fn laplacian_real(field: &RealField2D) -> RealField2D {
    let v = field.values();
    match field.grid() {
        Grid2D::Cartesian(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let (dx, dy) = (g.dx(), g.dy());
            let mut out = vec![0.0; nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    let idx = iy * nx + ix;
                    out[idx] = d2(&|i| v[iy * nx + i], nx, dx, false, ix)
                        + d2(&|j| v[j * nx + ix], ny, dy, false, iy);
                }
            }
            RealField2D::from_values_unchecked(*field.grid(), out)
        }
        Grid2D::Polar(g) => {
            let (nr, nphi) = (g.nr(), g.nphi());
            let (dr, dphi) = (g.dr(), g.dphi());
            let mut out = vec![0.0; nr * nphi];
            for ir in 0..nr {
                let r = g.r(ir);
                for iphi in 0..nphi {
                    let idx = ir * nphi + iphi;
                    let radial = &|i: usize| v[i * nphi + iphi];
                    out[idx] = d2(radial, nr, dr, false, ir)
                        + d1(radial, nr, dr, false, ir) / r
                        + d2(&|j| v[ir * nphi + j], nphi, dphi, true, iphi) / (r * r);
                }
            }
            RealField2D::from_values_unchecked(*field.grid(), out)
        }
    }
}

/// Laplacian of a complex field (the stencils have real coefficients, so the
/// real and imaginary parts are differentiated independently).
pub fn laplacian(field: &ScalarField2D) -> ScalarField2D {
    let re = laplacian_real(&field.real_part());
    let im = laplacian_real(&field.imag_part());
    let values = re
        .values()
        .iter()
        .zip(im.values())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    ScalarField2D::from_values_unchecked(*field.grid(), values)
}

/// Divergence of a vector field: `d(comp0)/dx + d(comp1)/dy` on Cartesian
/// grids, `(1/r) d(r comp0)/dr + (1/r) d(comp1)/dphi` on polar grids.
pub fn divergence(field: &VectorField2D) -> RealField2D {
    let (c0, c1) = (field.comp0(), field.comp1());
    match field.grid() {
        Grid2D::Cartesian(g) => {
            let (nx, ny) = (g.nx(), g.ny());
            let (dx, dy) = (g.dx(), g.dy());
            let mut out = vec![0.0; nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    let idx = iy * nx + ix;
                    out[idx] = d1(&|i| c0[iy * nx + i], nx, dx, false, ix)
                        + d1(&|j| c1[j * nx + ix], ny, dy, false, iy);
                }
            }
            RealField2D::from_values_unchecked(*field.grid(), out)
        }
        Grid2D::Polar(g) => {
            let (nr, nphi) = (g.nr(), g.nphi());
            let (dr, dphi) = (g.dr(), g.dphi());
            let mut out = vec![0.0; nr * nphi];
            for ir in 0..nr {
                let r = g.r(ir);
                for iphi in 0..nphi {
                    let idx = ir * nphi + iphi;
                    let radial_flux = &|i: usize| g.r(i) * c0[i * nphi + iphi];
                    out[idx] = d1(radial_flux, nr, dr, false, ir) / r
                        + d1(&|j| c1[ir * nphi + j], nphi, dphi, true, iphi) / r;
                }
            }
            RealField2D::from_values_unchecked(*field.grid(), out)
        }
    }
}

/// Residual of the time-independent Schrodinger equation.
#[derive(Debug, Clone)]
pub struct SeResidualReport {
    /// `-(hbar^2/2m) lap(psi) + (U - E) psi` at every node.
    pub field: ScalarField2D,
    /// Node-RMS of the residual divided by the node-RMS of `psi`.
    pub l2_relative: f64,
    /// Max modulus of the residual divided by the max modulus of `psi`.
    pub max_relative: f64,
}

/// Applies `-(hbar^2/2m) lap + U - E` to a candidate stationary state and
/// reports how far it is from solving the equation. Forbidden-class
/// potentials are rejected.
pub fn se_residual(
    psi: &ScalarField2D,
    potential: &Potential,
    energy: f64,
    constants: &PhysicalConstants,
) -> Result<SeResidualReport> {
    potential.require_admissible()?;
    let kf = constants.kinetic_factor();
    let lap = laplacian(psi);
    let grid = *psi.grid();
    let values: Vec<Complex64> = (0..psi.len())
        .map(|idx| {
            let (x, y) = grid.position(idx);
            let u = potential.eval_xy(x, y);
            -kf * lap.value(idx) + (u - energy) * psi.value(idx)
        })
        .collect();
    let field = ScalarField2D::from_values_unchecked(grid, values);
    let psi_rms = psi.rms();
    let psi_max = psi.max_modulus();
    Ok(SeResidualReport {
        l2_relative: field.rms() / psi_rms,
        max_relative: field.max_modulus() / psi_max,
        field,
    })
}
