//! Candidate separable states `exp(i nu phi) J_nu(k r)` for arbitrary real
//! `nu`, and the two measurements that separate physical from spurious ones.
//!
//! Any real `nu` gives a local solution of the free stationary equation in
//! polar form with a single-valued modulus. What distinguishes the physical
//! candidates is full single-valuedness, probed here two ways:
//!
//! * [`branch_jump`]: parameterize the state with `phi` on the principal
//!   sector `[0, 2 pi)` and measure the discontinuity across the `phi = 0`
//!   ray, `|psi(r, 2 pi^-) - psi(r, 0^+)| = |1 - exp(2 pi i nu)| |J_nu(k r)|`.
//!   This vanishes exactly when `nu` is an integer.
//! * [`plane_wave_fit`]: a free state of energy `E = (hbar k)^2 / 2m` must
//!   be a superposition of plane waves of that one wavenumber,
//!   `psi(r) = int dalpha A(alpha) exp(i k r cos(alpha - phi))`.
//!   The integral is discretized by an `N`-point trapezoid rule in `alpha`
//!   and `A` is fitted by least squares on an annulus. Every such
//!   superposition is `2 pi`-periodic in `phi` no matter what `A` is, so for
//!   integer `nu` the fit reconstructs the candidate to round-off (the
//!   Jacobi-Anger expansion gives `A(alpha) = i^-nu exp(i nu alpha)/(2 pi)`),
//!   while for non-integer `nu` the error saturates at a measured floor.
//!
//! On a polar grid whose angular sample count is a multiple of `N`, the
//! normal matrix of the fit is circulant, so its spectral decomposition is a
//! discrete Fourier transform: the solve is exact, fast, and reports its own
//! condition number; eigenvalues below `1e-12` of the largest are truncated.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::ScalarField2D;
use crate::grid::Grid2D;
use crate::special::{self, BesselOrder};
use crate::topology::{circulation, LoopPath, WindingResult};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Default annulus for the plane-wave fit, in units of `k r`.
pub const DEFAULT_ANNULUS: (f64, f64) = (0.2, 6.0);

/// A sampled candidate state `exp(i nu phi) J_nu(k r)` with `phi` taken on
/// the principal sector `[0, 2 pi)`.
#[derive(Debug, Clone)]
pub struct CandidateState {
    nu: f64,
    wavenumber: f64,
    field: ScalarField2D,
}

impl CandidateState {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn field(&self) -> &ScalarField2D {
        &self.field
    }

    /// Largest radius reachable on the candidate's grid.
    pub fn max_radius(&self) -> f64 {
        max_radius(self.field.grid())
    }
}

fn max_radius(grid: &Grid2D) -> f64 {
    match grid {
        Grid2D::Polar(g) => g.r_max(),
        Grid2D::Cartesian(g) => {
            let x = g.x_min().abs().max(g.x_max().abs());
            let y = g.y_min().abs().max(g.y_max().abs());
            x.hypot(y)
        }
    }
}

/// `|1 - exp(2 pi i nu)| = 2 |sin(pi nu)|`, computed with the argument
/// reduced to the nearest integer so that integer orders give exactly zero.
fn jump_factor(nu: f64) -> f64 {
    2.0 * (PI * (nu - nu.round())).sin().abs()
}

/// Samples `exp(i nu phi) J_nu(k r)` on a grid, with the branch cut pinned
/// to the `phi = 0` ray.
pub fn build_candidate(nu: f64, k: f64, grid: impl Into<Grid2D>) -> Result<CandidateState> {
    let order = BesselOrder::new(nu)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
    }
    let grid = grid.into();
    let reach = k * max_radius(&grid);
    if reach > special::MAX_ARGUMENT {
        return Err(Error::OutOfRange {
            quantity: "k * r_max",
            value: reach,
            min: 0.0,
            max: special::MAX_ARGUMENT,
        });
    }
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
        let j = special::bessel_j(order, k * r)?;
        values.push(Complex64::from_polar(1.0, nu * phi) * j);
    }
    Ok(CandidateState {
        nu,
        wavenumber: k,
        field: ScalarField2D::from_values_unchecked(grid, values),
    })
}

/// Maximum over radii of the discontinuity across the `phi = 0` cut,
/// `|psi(r, 2 pi^-) - psi(r, 0^+)| = |1 - exp(2 pi i nu)| |J_nu(k r)|`.
/// Exactly zero when `nu` is an integer.
pub fn branch_jump(state: &CandidateState) -> f64 {
    let order = BesselOrder::new(state.nu).expect("candidate order already validated");
    let factor = jump_factor(state.nu);
    let radii: Vec<f64> = match state.field.grid() {
        Grid2D::Polar(g) => (0..g.nr()).map(|i| g.r(i)).collect(),
        Grid2D::Cartesian(_) => {
            let r_max = state.max_radius();
            (1..=512).map(|i| r_max * i as f64 / 512.0).collect()
        }
    };
    let mut max_j = 0.0f64;
    for r in radii {
        let j = special::bessel_j(order, state.wavenumber * r)
            .expect("radius within validated range");
        max_j = max_j.max(j.abs());
    }
    factor * max_j
}

/// Least-squares plane-wave representation of a candidate on an annulus.
#[derive(Debug, Clone)]
pub struct PlaneWaveExpansion {
    pub wavenumber: f64,
    /// Uniform propagation angles `alpha_i = 2 pi i / N`.
    pub alphas: Vec<f64>,
    /// Fitted angular amplitudes `A(alpha_i)`.
    pub coefficients: Vec<Complex64>,
    /// `max |model - psi| / max |psi|` over the annulus samples.
    pub reconstruction_error: f64,
    /// Ratio of the largest to the smallest retained eigenvalue of the
    /// normal matrix.
    pub condition_number: f64,
    /// The annulus actually used, as radii.
    pub annulus: (f64, f64),
    /// Annulus samples that entered the fit.
    pub samples_used: usize,
}

/// Fits `N` plane-wave amplitudes on the default annulus
/// `0.2 <= k r <= 6`.
pub fn plane_wave_fit(state: &CandidateState, n_coeffs: usize) -> Result<PlaneWaveExpansion> {
    plane_wave_fit_in(state, n_coeffs, DEFAULT_ANNULUS)
}

/// Fits `N` plane-wave amplitudes `A(alpha_i)` by least squares over the
/// candidate's samples with `kr_bounds.0 <= k r <= kr_bounds.1`.
///
/// Requires a polar grid whose `nphi` is a multiple of `N` (the normal
/// matrix is then exactly circulant) and a power-of-two `N >= 64`.
pub fn plane_wave_fit_in(
    state: &CandidateState,
    n_coeffs: usize,
    kr_bounds: (f64, f64),
) -> Result<PlaneWaveExpansion> {
    if n_coeffs < 64 || !n_coeffs.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "coefficient count must be a power of two >= 64, got {n_coeffs}"
        )));
    }
    let g = *state
        .field
        .grid()
        .as_polar()
        .ok_or_else(|| Error::Fit("plane-wave fit requires a polar grid".into()))?;
    let nphi = g.nphi();
    if nphi % n_coeffs != 0 {
        return Err(Error::Fit(format!(
            "angular sample count {nphi} must be a multiple of the coefficient count {n_coeffs}"
        )));
    }
    let k = state.wavenumber;
    let rows: Vec<usize> = (0..g.nr())
        .filter(|&ir| {
            let kr = k * g.r(ir);
            kr >= kr_bounds.0 && kr <= kr_bounds.1
        })
        .collect();
    if rows.len() < 4 {
        return Err(Error::Fit(format!(
            "annulus {:?} (in k r) covers only {} radial rows of the grid",
            kr_bounds,
            rows.len()
        )));
    }

    let n = n_coeffs;
    let stride = nphi / n;
    let weight = TAU / n as f64;
    // cos of every representable angle difference alpha_i - phi_s
    let cos_table: Vec<f64> = (0..nphi).map(|m| (TAU * m as f64 / nphi as f64).cos()).collect();

    // b_i = sum_s conj(M_si) psi_s,  first row of the (circulant) normal
    // matrix c_d = sum_s conj(M_s0) M_sd, with
    // M_si = weight * exp(i k r_s cos(alpha_i - phi_s))
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut c_row = vec![Complex64::new(0.0, 0.0); n];
    for &ir in &rows {
        let kr = k * g.r(ir);
        let kernel: Vec<Complex64> = (0..nphi)
            .map(|m| Complex64::from_polar(1.0, -kr * cos_table[m]))
            .collect();
        let row = &state.field.values()[ir * nphi..(ir + 1) * nphi];
        for i in 0..n {
            let shift = i * stride;
            let mut acc_b = Complex64::new(0.0, 0.0);
            let mut acc_c = Complex64::new(0.0, 0.0);
            for (s, &sample) in row.iter().enumerate() {
                let m = (shift + nphi - s) % nphi;
                let m0 = (nphi - s) % nphi;
                acc_b += kernel[m] * sample;
                acc_c += kernel[m].conj() * kernel[m0];
            }
            b[i] += acc_b;
            c_row[i] += acc_c;
        }
    }
    for v in &mut b {
        *v *= weight;
    }
    for v in &mut c_row {
        *v *= weight * weight;
    }

    // spectral decomposition of the circulant system: eigenvalues are the
    // DFT of the first row, eigenvectors the Fourier modes
    let mut lambda = vec![0.0f64; n];
    for (m, lam) in lambda.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (d, &c) in c_row.iter().enumerate() {
            acc += c * Complex64::from_polar(1.0, TAU * (m * d) as f64 / n as f64);
        }
        *lam = acc.re;
    }
    let lambda_max = lambda.iter().cloned().fold(0.0f64, f64::max);
    if lambda_max <= 0.0 {
        return Err(Error::Fit("normal matrix is numerically zero".into()));
    }
    // eigenvalues this small amplify round-off in the data into the
    // coefficients without improving the reconstruction
    let cutoff = 1e-9 * lambda_max;
    let mut lambda_min_kept = f64::INFINITY;
    let mut bhat = vec![Complex64::new(0.0, 0.0); n];
    for m in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &bi) in b.iter().enumerate() {
            acc += bi * Complex64::from_polar(1.0, -TAU * (m * i) as f64 / n as f64);
        }
        if lambda[m] > cutoff {
            bhat[m] = acc / lambda[m];
            lambda_min_kept = lambda_min_kept.min(lambda[m]);
        }
    }
    let mut coefficients = vec![Complex64::new(0.0, 0.0); n];
    for (i, coeff) in coefficients.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &bm) in bhat.iter().enumerate() {
            acc += bm * Complex64::from_polar(1.0, TAU * (m * i) as f64 / n as f64);
        }
        *coeff = acc / n as f64;
    }

    // reconstruction error over the annulus
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut samples_used = 0usize;
    for &ir in &rows {
        let kr = k * g.r(ir);
        let kernel: Vec<Complex64> = (0..nphi)
            .map(|m| Complex64::from_polar(1.0, -kr * cos_table[m]))
            .collect();
        let row = &state.field.values()[ir * nphi..(ir + 1) * nphi];
        for (s, &sample) in row.iter().enumerate() {
            let mut model = Complex64::new(0.0, 0.0);
            for (i, &a) in coefficients.iter().enumerate() {
                let m = (i * stride + nphi - s) % nphi;
                model += kernel[m].conj() * a;
            }
            model *= weight;
            worst = worst.max((model - sample).norm());
            scale = scale.max(sample.norm());
            samples_used += 1;
        }
    }

    Ok(PlaneWaveExpansion {
        wavenumber: k,
        alphas: (0..n).map(|i| TAU * i as f64 / n as f64).collect(),
        coefficients,
        reconstruction_error: if scale > 0.0 { worst / scale } else { f64::NAN },
        condition_number: lambda_max / lambda_min_kept,
        annulus: (kr_bounds.0 / k, kr_bounds.1 / k),
        samples_used,
    })
}

/// Classification outcome for one candidate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Physical,
    Spurious,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Physical => write!(f, "physical"),
            Verdict::Spurious => write!(f, "spurious"),
        }
    }
}

/// Thresholds for [`classify`].
#[derive(Debug, Clone, Copy)]
pub struct SpuriosityTolerances {
    /// Largest branch-cut discontinuity still counted as continuous.
    pub branch_jump: f64,
    /// Largest plane-wave reconstruction error still counted as expandable.
    pub expansion_error: f64,
    /// Plane-wave coefficient count.
    pub coefficient_count: usize,
}

impl Default for SpuriosityTolerances {
    fn default() -> Self {
        Self {
            branch_jump: 1e-8,
            expansion_error: 1e-6,
            coefficient_count: 64,
        }
    }
}

/// Everything measured about one candidate order.
#[derive(Debug, Clone)]
pub struct SpuriosityReport {
    pub nu: f64,
    pub wavenumber: f64,
    pub branch_jump: f64,
    pub best_expansion_error: f64,
    pub expansion_condition: f64,
    pub verdict: Verdict,
}

/// Builds the candidate of order `nu`, measures its branch-cut jump and its
/// best plane-wave reconstruction, and declares it physical only if both
/// pass their tolerances. Integer orders pass; every other order fails.
pub fn classify(
    nu: f64,
    k: f64,
    grid: impl Into<Grid2D>,
    tolerances: &SpuriosityTolerances,
) -> Result<SpuriosityReport> {
    if !(tolerances.branch_jump > 0.0 && tolerances.expansion_error > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let state = build_candidate(nu, k, grid)?;
    let jump = branch_jump(&state);
    let fit = plane_wave_fit(&state, tolerances.coefficient_count)?;
    let verdict = if jump <= tolerances.branch_jump
        && fit.reconstruction_error <= tolerances.expansion_error
    {
        Verdict::Physical
    } else {
        Verdict::Spurious
    };
    Ok(SpuriosityReport {
        nu,
        wavenumber: k,
        branch_jump: jump,
        best_expansion_error: fit.reconstruction_error,
        expansion_condition: fit.condition_number,
        verdict,
    })
}

/// Circulation of a candidate along a centered circle: for integer orders
/// this reproduces the candidate's winding.
pub fn candidate_circulation(
    state: &CandidateState,
    radius: f64,
    constants: &PhysicalConstants,
) -> Result<WindingResult> {
    let path = LoopPath::circle((0.0, 0.0), radius, 720)?;
    circulation(state.field(), &path, constants)
}
