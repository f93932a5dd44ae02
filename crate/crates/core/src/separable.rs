//! Separated stationary solutions `psi(r, phi) = Phi(phi) R(r)` in a central
//! potential.
//!
//! The angular factor solves `Phi'' + nu^2 Phi = 0` for a real constant
//! `nu >= 0`, so the general solution is
//! `Phi(phi) = A exp(i nu phi) + B exp(-i nu phi)`. Two distinct
//! single-valuedness conditions apply to it:
//!
//! * modulus periodicity, `|Phi(phi + 2 pi)| = |Phi(phi)|` — satisfied by
//!   every `nu` when one coefficient vanishes, and by integer and
//!   half-integer `nu` otherwise;
//! * full periodicity, `Phi(phi + 2 pi) = Phi(phi)` — satisfied only for
//!   integer `nu`.
//!
//! The radial factor is real (a radial phase would put a source or sink of
//! probability at the origin) and solves
//!
//! ```text
//! (hbar^2/m) (-R''/2 - R'/(2r)) + (hbar^2 nu^2/(2 m r^2) + U(r)) R = E R
//! ```
//!
//! with regular behavior `R ~ r^nu` at the origin. [`solve_radial`] finds
//! Dirichlet eigenpairs of this operator by shooting and bisection;
//! [`radial_equation_residual`] measures how well sampled profiles satisfy
//! the equation, optionally with the `(1/2r) R'` term removed so its effect
//! can be quantified.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::ScalarField2D;
use crate::grid::Grid2D;
use crate::potential::Potential;
use crate::special::{self, BesselOrder};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Angular factor `Phi(phi) = A exp(i nu phi) + B exp(-i nu phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSolution {
    nu: f64,
    coeff_plus: Complex64,
    coeff_minus: Complex64,
}

/// Outcome of a periodicity sweep: the largest deviation seen and, when the
/// check fails, the angle at which it was largest.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicityCheck {
    pub passed: bool,
    pub max_deviation: f64,
    pub witness_phi: Option<f64>,
}

const PERIODICITY_SWEEP: usize = 4096;
const PERIODICITY_TOL: f64 = 1e-12;

impl AngularSolution {
    pub fn new(nu: f64, coeff_plus: Complex64, coeff_minus: Complex64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "angular order must be a nonnegative real, got {nu}"
            )));
        }
        if coeff_plus.norm_sqr() == 0.0 && coeff_minus.norm_sqr() == 0.0 {
            return Err(Error::InvalidArgument(
                "angular coefficients must not both vanish".into(),
            ));
        }
        Ok(Self { nu, coeff_plus, coeff_minus })
    }

    /// The single-mode solution `exp(i nu phi) / sqrt(2 pi)`.
    pub fn circular(nu: f64) -> Result<Self> {
        let a = Complex64::new(1.0 / TAU.sqrt(), 0.0);
        Self::new(nu, a, Complex64::new(0.0, 0.0))
    }

    /// Single-mode solution of signed winding: positive `signed_nu` puts the
    /// amplitude on `exp(+i nu phi)`, negative on `exp(-i nu phi)`.
    pub fn phase_mode(signed_nu: f64) -> Result<Self> {
        let a = Complex64::new(1.0 / TAU.sqrt(), 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if signed_nu >= 0.0 {
            Self::new(signed_nu, a, zero)
        } else {
            Self::new(-signed_nu, zero, a)
        }
    }

    /// The balanced combination `cos(nu phi)` (`A = B = 1/2`).
    pub fn standing(nu: f64) -> Result<Self> {
        let half = Complex64::new(0.5, 0.0);
        Self::new(nu, half, half)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn coeff_plus(&self) -> Complex64 {
        self.coeff_plus
    }

    pub fn coeff_minus(&self) -> Complex64 {
        self.coeff_minus
    }

    /// `Phi(phi)`; satisfies `Phi'' + nu^2 Phi = 0` identically.
    pub fn eval(&self, phi: f64) -> Complex64 {
        self.coeff_plus * Complex64::from_polar(1.0, self.nu * phi)
            + self.coeff_minus * Complex64::from_polar(1.0, -self.nu * phi)
    }

    /// Slope of the implied phase action `S1(phi) = +/- nu hbar phi` for
    /// single-mode solutions; `None` when both coefficients are present (the
    /// phase is then not linear in `phi`).
    pub fn phase_action_slope(&self, hbar: f64) -> Option<f64> {
        if self.coeff_minus.norm_sqr() == 0.0 {
            Some(self.nu * hbar)
        } else if self.coeff_plus.norm_sqr() == 0.0 {
            Some(-self.nu * hbar)
        } else {
            None
        }
    }

    fn sweep(&self, deviation: impl Fn(Complex64, Complex64) -> f64) -> PeriodicityCheck {
        let mut max_deviation = 0.0;
        let mut witness = 0.0;
        for i in 0..PERIODICITY_SWEEP {
            let phi = TAU * i as f64 / PERIODICITY_SWEEP as f64;
            let d = deviation(self.eval(phi), self.eval(phi + TAU));
            if d > max_deviation {
                max_deviation = d;
                witness = phi;
            }
        }
        let passed = max_deviation <= PERIODICITY_TOL;
        PeriodicityCheck {
            passed,
            max_deviation,
            witness_phi: if passed { None } else { Some(witness) },
        }
    }

    /// Is `|Phi|` unchanged under `phi -> phi + 2 pi`? Swept over 4096
    /// angles with tolerance 1e-12.
    pub fn check_modulus_periodicity(&self) -> PeriodicityCheck {
        self.sweep(|here, shifted| (shifted.norm() - here.norm()).abs())
    }

    /// Is `Phi` itself unchanged under `phi -> phi + 2 pi`? Swept over 4096
    /// angles with tolerance 1e-12. Strictly stronger than modulus
    /// periodicity.
    pub fn check_full_periodicity(&self) -> PeriodicityCheck {
        self.sweep(|here, shifted| (shifted - here).norm())
    }
}

/// A Dirichlet eigenpair of the radial operator, sampled on a uniform grid
/// reaching from just outside the origin to `r_max`.
///
/// The samples are real and normalized to `int R^2 r dr = 1`, positive near
/// the origin, where they behave like `r^nu`.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    nu: f64,
    index: usize,
    energy: f64,
    wavenumber: f64,
    radii: Vec<f64>,
    samples: Vec<f64>,
}

const RK_STEPS: usize = 4096;
const R_MIN_FRACTION: f64 = 1e-4;
const SCAN_STEPS: usize = 200;
const BISECTION_REL_TOL: f64 = 1e-9;

/// One RK4 sweep of `R'' = -R'/r + (nu^2/r^2 + (2m/hbar^2)(U - E)) R`.
/// `h` may be negative (inward integration). Returns values at
/// `r0, r0 + h, ..., r0 + n h`.
#[allow(clippy::too_many_arguments)]
fn integrate(
    u: &Potential,
    nu: f64,
    energy: f64,
    constants: &PhysicalConstants,
    r0: f64,
    h: f64,
    n: usize,
    init: (f64, f64),
) -> Result<Vec<f64>> {
    let two_m_over_h2 = 1.0 / constants.kinetic_factor();
    let nu2 = nu * nu;
    let mut u_cache: Vec<f64> = Vec::with_capacity(2 * n + 1);
    for i in 0..=(2 * n) {
        u_cache.push(u.eval_radial(r0 + 0.5 * h * i as f64)?);
    }
    let rhs = |r: f64, u_val: f64, y: (f64, f64)| -> (f64, f64) {
        let coeff = nu2 / (r * r) + two_m_over_h2 * (u_val - energy);
        (y.1, -y.1 / r + coeff * y.0)
    };
    let mut out = Vec::with_capacity(n + 1);
    let (mut rr, mut pp) = init;
    out.push(rr);
    for i in 0..n {
        let r = r0 + h * i as f64;
        let (u0, um, u1) = (u_cache[2 * i], u_cache[2 * i + 1], u_cache[2 * i + 2]);
        let k1 = rhs(r, u0, (rr, pp));
        let k2 = rhs(r + 0.5 * h, um, (rr + 0.5 * h * k1.0, pp + 0.5 * h * k1.1));
        let k3 = rhs(r + 0.5 * h, um, (rr + 0.5 * h * k2.0, pp + 0.5 * h * k2.1));
        let k4 = rhs(r + h, u1, (rr + h * k3.0, pp + h * k3.1));
        rr += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        pp += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        out.push(rr);
    }
    Ok(out)
}

fn count_sign_changes(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

fn regular_start(nu: f64, r_min: f64) -> (f64, f64) {
    if nu == 0.0 {
        (1.0, 0.0)
    } else {
        (r_min.powf(nu), nu * r_min.powf(nu - 1.0))
    }
}

/// Solves the radial problem with a Dirichlet condition `R(r_max) = 0`,
/// looking for the eigenfunction with exactly `index` interior nodes.
///
/// Shooting starts from `r_min = 1e-4 r_max` with the regular data
/// `R = r^nu`, `R' = nu r^(nu-1)`, integrated by fixed-step RK4 with 4096
/// steps. The default energy window is scanned in 200 steps for the interior
/// node count to cross `index`, then the crossing is bisected to a relative
/// width of 1e-9. The window starts just above the sampled minimum of `U`
/// and extends to four times the free-particle estimate plus the sampled
/// spread of `U`, which brackets every confined low-lying state.
pub fn solve_radial(
    potential: &Potential,
    nu: f64,
    index: usize,
    r_max: f64,
    constants: &PhysicalConstants,
) -> Result<RadialSolution> {
    potential.require_admissible()?;
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let order = BesselOrder::new(nu)?;
    // free-particle estimate: k fixed by the (index+1)-th Bessel zero
    let k_free = special::bessel_j_zero(order, index + 1)? / r_max;
    let e_free = constants.kinetic_factor() * k_free * k_free;
    let r_min = R_MIN_FRACTION * r_max;
    let mut u_lo = f64::INFINITY;
    let mut u_hi = f64::NEG_INFINITY;
    for i in 0..=256 {
        let r = r_min + (r_max - r_min) * i as f64 / 256.0;
        let u = potential.eval_radial(r)?;
        u_lo = u_lo.min(u);
        u_hi = u_hi.max(u);
    }
    let e_lo = u_lo + 1e-12 * (1.0 + u_lo.abs());
    let e_hi = u_lo + 4.0 * e_free + (u_hi - u_lo);
    solve_radial_in_window(potential, nu, index, r_max, constants, (e_lo, e_hi))
}

/// Same as [`solve_radial`] but with an explicit energy window.
pub fn solve_radial_in_window(
    potential: &Potential,
    nu: f64,
    index: usize,
    r_max: f64,
    constants: &PhysicalConstants,
    window: (f64, f64),
) -> Result<RadialSolution> {
    potential.require_admissible()?;
    let (e_lo, e_hi) = window;
    if !(e_lo.is_finite() && e_hi.is_finite() && e_hi > e_lo) {
        return Err(Error::InvalidArgument(format!(
            "invalid energy window [{e_lo}, {e_hi}]"
        )));
    }
    let r_min = R_MIN_FRACTION * r_max;
    let h = (r_max - r_min) / RK_STEPS as f64;
    let shoot = |energy: f64| -> Result<Vec<f64>> {
        integrate(
            potential,
            nu,
            energy,
            constants,
            r_min,
            h,
            RK_STEPS,
            regular_start(nu, r_min),
        )
    };
    let nodes_at = |energy: f64| -> Result<usize> { Ok(count_sign_changes(&shoot(energy)?)) };

    // scan for the node-count crossing index -> index + 1
    let nodes_lo = nodes_at(e_lo)?;
    if nodes_lo > index {
        return Err(Error::NotBracketed {
            e_lo,
            e_hi,
            nodes_lo,
            nodes_hi: nodes_at(e_hi)?,
            index,
        });
    }
    let mut bracket = None;
    let mut prev_e = e_lo;
    for i in 1..=SCAN_STEPS {
        let e = e_lo + (e_hi - e_lo) * i as f64 / SCAN_STEPS as f64;
        if nodes_at(e)? > index {
            bracket = Some((prev_e, e));
            break;
        }
        prev_e = e;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NotBracketed {
        e_lo,
        e_hi,
        nodes_lo,
        nodes_hi: nodes_at(e_hi)?,
        index,
    })?;
    while hi - lo > BISECTION_REL_TOL * hi.abs().max(lo.abs()).max(1e-30) {
        let mid = 0.5 * (lo + hi);
        if nodes_at(mid)? > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let energy = 0.5 * (lo + hi);

    // reconstruct the eigenfunction; when a classically forbidden region
    // touches r_max, integrate inward from the wall and match at the turning
    // point so the growing mode cannot pollute the tail
    let radii: Vec<f64> = (0..=RK_STEPS).map(|i| r_min + h * i as f64).collect();
    let outward = shoot(energy)?;
    let mut samples = outward.clone();
    if potential.eval_radial(r_max)? > energy {
        let turning = radii
            .iter()
            .rposition(|&r| potential.eval_radial(r).unwrap_or(f64::INFINITY) <= energy)
            .unwrap_or(RK_STEPS / 2)
            .clamp(8, RK_STEPS - 8);
        let inward_rev = integrate(
            potential,
            nu,
            energy,
            constants,
            r_max,
            -h,
            RK_STEPS - turning,
            (0.0, -1.0),
        )?;
        // inward_rev[j] sits at radius r_max - j h, i.e. sample RK_STEPS - j
        let mut inward = vec![0.0; RK_STEPS + 1];
        for (j, &v) in inward_rev.iter().enumerate() {
            inward[RK_STEPS - j] = v;
        }
        // match where both branches are well away from their own zeros
        let lo_i = turning.saturating_sub(16).max(1);
        let hi_i = (turning + 16).min(RK_STEPS - 1);
        let out_scale = outward[lo_i..=hi_i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let in_scale = inward[lo_i..=hi_i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if out_scale == 0.0 || in_scale == 0.0 {
            return Err(Error::Solver("degenerate matching window".into()));
        }
        let m_idx = (lo_i..=hi_i)
            .max_by(|&a, &b| {
                let qa = (outward[a] / out_scale).abs().min((inward[a] / in_scale).abs());
                let qb = (outward[b] / out_scale).abs().min((inward[b] / in_scale).abs());
                qa.partial_cmp(&qb).unwrap()
            })
            .unwrap();
        let scale = outward[m_idx] / inward[m_idx];
        for i in m_idx..=RK_STEPS {
            samples[i] = scale * inward[i];
        }
    }

    // normalize int R^2 r dr = 1 (trapezoid)
    let mut norm2 = 0.0;
    for i in 0..RK_STEPS {
        let f0 = samples[i] * samples[i] * radii[i];
        let f1 = samples[i + 1] * samples[i + 1] * radii[i + 1];
        norm2 += 0.5 * (f0 + f1) * h;
    }
    if !(norm2.is_finite() && norm2 > 0.0) {
        return Err(Error::Solver(format!("non-normalizable solution (norm^2 = {norm2})")));
    }
    let inv = 1.0 / norm2.sqrt();
    for v in &mut samples {
        *v *= inv;
    }

    // a crossing in the final interval belongs to the Dirichlet wall, not to
    // the interior
    let interior = count_sign_changes(&samples[..RK_STEPS]);
    if interior != index {
        return Err(Error::Solver(format!(
            "converged to {interior} interior nodes instead of {index} (E = {energy})"
        )));
    }

    Ok(RadialSolution {
        nu,
        index,
        energy,
        wavenumber: constants.wavenumber(energy.max(0.0)),
        radii,
        samples,
    })
}

impl RadialSolution {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// The requested number of interior nodes.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `k = sqrt(2 m E) / hbar` (zero for bound states of negative energy).
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Cubic (4-point Lagrange) interpolation of the samples; below the
    /// first sample the regular behavior `R ~ r^nu` continues the profile.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let r0 = self.radii[0];
        let rn = self.r_max();
        if r < 0.0 || r > rn * (1.0 + 1e-9) {
            return Err(Error::OutsideDomain { x: r, y: 0.0 });
        }
        if r < r0 {
            return Ok(self.samples[0] * (r / r0).powf(self.nu));
        }
        let h = self.radii[1] - self.radii[0];
        let n = self.radii.len();
        let i = (((r - r0) / h).floor() as usize).min(n - 2);
        let base = i.saturating_sub(1).min(n - 4);
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            let ra = self.radii[base + a];
            for b in 0..4 {
                if a != b {
                    w *= (r - self.radii[base + b]) / (ra - self.radii[base + b]);
                }
            }
            acc += w * self.samples[base + a];
        }
        Ok(acc)
    }
}

/// Which form of the radial operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialOperator {
    /// `-(hbar^2/m)(R''/2 + R'/(2r)) + (hbar^2 nu^2/(2m r^2) + U) R - E R`.
    WithFirstDerivative,
    /// The same with the `(1/2r) R'` term removed, to expose how
    /// load-bearing it is.
    WithoutFirstDerivative,
}

/// Residual of the radial equation on a sampled profile.
#[derive(Debug, Clone)]
pub struct RadialResidual {
    /// Residual at interior sample points (the endpoints are excluded:
    /// derivatives use central stencils).
    pub values: Vec<f64>,
    /// RMS of the residual over interior points, divided by
    /// `max(|E|, 1) * rms(R)`.
    pub l2_relative: f64,
    /// Max of the residual over interior points, same normalization.
    pub max_relative: f64,
}

/// Applies the radial operator by central differences on a uniformly sampled
/// profile and reports the residual against `E R`.
pub fn radial_equation_residual(
    radii: &[f64],
    values: &[f64],
    nu: f64,
    potential: &Potential,
    energy: f64,
    constants: &PhysicalConstants,
    operator: RadialOperator,
) -> Result<RadialResidual> {
    potential.require_admissible()?;
    if radii.len() != values.len() || radii.len() < 5 {
        return Err(Error::InvalidArgument(
            "need matching radii/values with at least 5 samples".into(),
        ));
    }
    let h = radii[1] - radii[0];
    let kf = constants.kinetic_factor();
    let mut res = Vec::with_capacity(radii.len() - 2);
    for i in 1..radii.len() - 1 {
        let r = radii[i];
        let d1 = (values[i + 1] - values[i - 1]) / (2.0 * h);
        let d2 = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
        let first_term = match operator {
            RadialOperator::WithFirstDerivative => d1 / r,
            RadialOperator::WithoutFirstDerivative => 0.0,
        };
        let u = potential.eval_radial(r)?;
        res.push(-kf * (d2 + first_term) + (kf * nu * nu / (r * r) + u - energy) * values[i]);
    }
    let rms_r = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    let scale = energy.abs().max(1.0) * rms_r;
    let rms = (res.iter().map(|v| v * v).sum::<f64>() / res.len() as f64).sqrt();
    let max = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(RadialResidual {
        values: res,
        l2_relative: rms / scale,
        max_relative: max / scale,
    })
}

/// Result of fitting `c J_nu(k r)` to a radial profile near the origin.
#[derive(Debug, Clone, Copy)]
pub struct NearOriginMatch {
    /// The fitted scalar `c`.
    pub scale: f64,
    /// `max |R - c J| / max |R|` over the fit window.
    pub relative_max_deviation: f64,
    /// The fit window `(0, r_fit]`.
    pub r_fit: f64,
    pub samples_used: usize,
}

/// Fits the near-origin Bessel form on the default window `r <= 0.1 r_max`.
pub fn near_origin_match(sol: &RadialSolution) -> Result<NearOriginMatch> {
    near_origin_match_in(sol, 0.1 * sol.r_max())
}

/// Fits `c J_nu(k r)` (with `k` taken from the solution's energy) on
/// `r <= r_fit` by least squares over the samples in the window and reports
/// the residual shape deviation. Requires at least 8 samples in the window.
pub fn near_origin_match_in(sol: &RadialSolution, r_fit: f64) -> Result<NearOriginMatch> {
    let order = BesselOrder::new(sol.nu)?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut pairs = Vec::new();
    for (&r, &v) in sol.radii.iter().zip(&sol.samples) {
        if r > r_fit {
            break;
        }
        let j = special::bessel_j(order, sol.wavenumber * r)?;
        num += v * j;
        den += j * j;
        pairs.push((v, j));
    }
    if pairs.len() < 8 {
        return Err(Error::Fit(format!(
            "fit window (0, {r_fit}] contains only {} samples (need 8)",
            pairs.len()
        )));
    }
    if den == 0.0 {
        return Err(Error::Fit("Bessel profile vanishes on the fit window".into()));
    }
    let c = num / den;
    let mut dev = 0.0f64;
    let mut r_scale = 0.0f64;
    for &(v, j) in &pairs {
        dev = dev.max((v - c * j).abs());
        r_scale = r_scale.max(v.abs());
    }
    Ok(NearOriginMatch {
        scale: c,
        relative_max_deviation: dev / r_scale,
        r_fit,
        samples_used: pairs.len(),
    })
}

/// Samples `psi(r, phi) = Phi(phi) R(r)` on a target grid. The angular and
/// radial orders must agree; every grid node must fall inside the radial
/// solution's domain.
pub fn assemble_separable_state(
    angular: &AngularSolution,
    radial: &RadialSolution,
    grid: impl Into<Grid2D>,
) -> Result<ScalarField2D> {
    if (angular.nu() - radial.nu()).abs() > 1e-12 {
        return Err(Error::OrderMismatch {
            angular: angular.nu(),
            radial: radial.nu(),
        });
    }
    let grid = grid.into();
    let n = grid.node_count();
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let (r, phi) = match grid {
            Grid2D::Polar(_) => grid.coords(idx),
            Grid2D::Cartesian(_) => {
                let (x, y) = grid.coords(idx);
                (x.hypot(y), y.atan2(x).rem_euclid(TAU))
            }
        };
        values.push(angular.eval(phi) * radial.eval(r)?);
    }
    Ok(ScalarField2D::from_values_unchecked(grid, values))
}
