//! Nodal points, loop circulation, and winding-number bookkeeping.
//!
//! The circulation of the probability velocity around a closed loop is
//! `hbar` times the total phase change of `psi` along the loop. Summing
//! principal-branch increments `arg(psi_{k+1} / psi_k)` over a closed sample
//! sequence telescopes to an exact integer multiple of `2 pi` whenever every
//! increment stays below a half turn, so the measured circulation is
//! quantized to `2 pi j hbar` up to floating-point rounding — the reported
//! `quantization_defect` records exactly how far from an integer the sum
//! landed, and is never silently rounded away.
//!
//! Isolated zeros of `psi` are where nonzero winding can live: both
//! `Re psi = 0` and `Im psi = 0` must cross inside a grid cell.
//! [`nodal_scan`] finds such cells, localizes the common zero by a bilinear
//! sub-cell solve, and reports the cell's corner-phase winding. The loop
//! integral then equals the sum of the windings of the enclosed nodal
//! points, which [`sum_rule_check`] verifies directly.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::ScalarField2D;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Minimum number of samples on a loop.
pub const MIN_LOOP_SAMPLES: usize = 64;

/// Largest tolerated phase step between consecutive loop samples.
const PHASE_STEP_LIMIT: f64 = PI - 0.1;

/// Refinement cap: loops are resampled at 2x density until this many points.
const MAX_LOOP_SAMPLES: usize = 1 << 16;

/// Relative amplitude below which a loop sample counts as masked.
const LOOP_MASK_THRESHOLD: f64 = 1e-6;

/// A closed polygonal loop. The last stored point connects back to the
/// first; it is not duplicated.
#[derive(Debug, Clone)]
pub struct LoopPath {
    points: Vec<(f64, f64)>,
}

impl LoopPath {
    /// A closed polygon through the given vertices (first and last connect).
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < MIN_LOOP_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "a loop needs at least {MIN_LOOP_SAMPLES} samples, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(Error::InvalidArgument("loop points must be finite".into()));
        }
        Ok(Self { points })
    }

    /// Counterclockwise circle.
    pub fn circle(center: (f64, f64), radius: f64, samples: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("circle radius {radius}")));
        }
        let points = (0..samples)
            .map(|k| {
                let t = TAU * k as f64 / samples as f64;
                (center.0 + radius * t.cos(), center.1 + radius * t.sin())
            })
            .collect();
        Self::from_points(points)
    }

    /// Counterclockwise axis-aligned square of half side `half`.
    pub fn square(center: (f64, f64), half: f64, samples: usize) -> Result<Self> {
        if !(half.is_finite() && half > 0.0) {
            return Err(Error::InvalidArgument(format!("square half side {half}")));
        }
        let per_side = samples.div_ceil(4).max(MIN_LOOP_SAMPLES / 4);
        let mut points = Vec::with_capacity(4 * per_side);
        let corners = [
            (center.0 - half, center.1 - half),
            (center.0 + half, center.1 - half),
            (center.0 + half, center.1 + half),
            (center.0 - half, center.1 + half),
        ];
        for s in 0..4 {
            let (x0, y0) = corners[s];
            let (x1, y1) = corners[(s + 1) % 4];
            for k in 0..per_side {
                let t = k as f64 / per_side as f64;
                points.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
            }
        }
        Self::from_points(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same loop traversed in the opposite direction.
    pub fn reversed(&self) -> LoopPath {
        let mut points = self.points.clone();
        points.reverse();
        LoopPath { points }
    }

    /// Inserts the midpoint of every edge, doubling the sample density.
    pub fn refined(&self) -> LoopPath {
        let n = self.points.len();
        let mut points = Vec::with_capacity(2 * n);
        for k in 0..n {
            let a = self.points[k];
            let b = self.points[(k + 1) % n];
            points.push(a);
            points.push((0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1)));
        }
        LoopPath { points }
    }

    /// Signed winding number of this polygon around `p` (counterclockwise
    /// positive). Points on the polygon itself give arbitrary results.
    pub fn winding_around(&self, p: (f64, f64)) -> i64 {
        let mut total = 0.0;
        let n = self.points.len();
        for k in 0..n {
            let a = self.points[k];
            let b = self.points[(k + 1) % n];
            let va = (a.0 - p.0, a.1 - p.1);
            let vb = (b.0 - p.0, b.1 - p.1);
            let cross = va.0 * vb.1 - va.1 * vb.0;
            let dot = va.0 * vb.0 + va.1 * vb.1;
            total += cross.atan2(dot);
        }
        (total / TAU).round() as i64
    }
}

/// Measured circulation on a loop.
#[derive(Debug, Clone, Copy)]
pub struct WindingResult {
    /// `hbar * sum of phase increments` (units of action).
    pub circulation: f64,
    /// Nearest integer to `circulation / (2 pi hbar)`.
    pub winding: i64,
    /// `|circulation / (2 pi hbar) - winding|`.
    pub quantization_defect: f64,
    /// Loop samples actually used (after any refinement).
    pub samples_used: usize,
}

/// Circulation of the phase along a loop: `hbar * sum_k arg(psi_{k+1}/psi_k)`
/// with field values bilinearly interpolated at the loop points.
///
/// Any sample with `|psi|` below `1e-6 max|psi|` is rejected as masked. If a
/// phase step reaches `pi - 0.1` the loop is resampled at twice the density
/// (up to 65536 points) before giving up: a step that large cannot be
/// attributed to either direction around the circle.
pub fn circulation(
    psi: &ScalarField2D,
    path: &LoopPath,
    constants: &PhysicalConstants,
) -> Result<WindingResult> {
    let cutoff = LOOP_MASK_THRESHOLD * psi.max_modulus();
    let mut current = path.clone();
    loop {
        let mut values = Vec::with_capacity(current.len());
        for (k, &(x, y)) in current.points().iter().enumerate() {
            let v = psi.interpolate(x, y)?;
            if v.norm() < cutoff {
                return Err(Error::MaskedLoopSample { index: k, x, y });
            }
            values.push(v);
        }
        let n = values.len();
        let mut total = 0.0;
        let mut worst_step = 0.0f64;
        let mut worst_segment = 0;
        for k in 0..n {
            let step = (values[(k + 1) % n] * values[k].conj()).arg();
            if step.abs() > worst_step {
                worst_step = step.abs();
                worst_segment = k;
            }
            total += step;
        }
        if worst_step >= PHASE_STEP_LIMIT {
            if 2 * n <= MAX_LOOP_SAMPLES {
                current = current.refined();
                continue;
            }
            return Err(Error::UnderSampledLoop {
                segment: worst_segment,
                step: worst_step,
                limit: PHASE_STEP_LIMIT,
                samples: n,
            });
        }
        let hbar = constants.hbar();
        let turns = total / TAU;
        let winding = turns.round() as i64;
        return Ok(WindingResult {
            circulation: hbar * total,
            winding,
            quantization_defect: (turns - winding as f64).abs(),
            samples_used: n,
        });
    }
}

/// An isolated zero of `psi` carrying nonzero phase winding.
#[derive(Debug, Clone, Copy)]
pub struct NodalPoint {
    /// Sub-cell location from the bilinear solve.
    pub location: (f64, f64),
    /// Winding of the cell's corner phases (+-1 generically; a degenerate
    /// cell hosting more charge reports the summed winding as one point).
    pub winding: i32,
    /// Lower-left node indices of the hosting cell.
    pub cell: (usize, usize),
}

/// Scans every grid cell of a Cartesian field for simultaneous sign changes
/// of `Re psi` and `Im psi`, localizes the common zero by a bilinear
/// sub-cell solve, and reports cells whose corner phases wind. Row-major
/// cell order, so output order is deterministic.
pub fn nodal_scan(psi: &ScalarField2D) -> Result<Vec<NodalPoint>> {
    let g = *psi
        .grid()
        .as_cartesian()
        .ok_or_else(|| Error::InvalidArgument("nodal scan requires a Cartesian grid".into()))?;
    let tiny = 1e-14 * psi.max_modulus();
    let mut out = Vec::new();
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            // counterclockwise corners
            let mut corners = [
                psi.value(g.index(i, j)),
                psi.value(g.index(i + 1, j)),
                psi.value(g.index(i + 1, j + 1)),
                psi.value(g.index(i, j + 1)),
            ];
            // a corner sitting exactly on a zero has no phase: nudge it to
            // the bilinear value slightly inside the cell
            let insets = [
                (1e-3, 1e-3),
                (1.0 - 1e-3, 1e-3),
                (1.0 - 1e-3, 1.0 - 1e-3),
                (1e-3, 1.0 - 1e-3),
            ];
            for (c, corner) in corners.iter_mut().enumerate() {
                if corner.norm() <= tiny {
                    let (ex, ey) = insets[c];
                    *corner = psi
                        .interpolate(g.x(i) + ex * g.dx(), g.y(j) + ey * g.dy())
                        .unwrap_or(*corner);
                }
            }
            if corners.iter().any(|c| c.norm() == 0.0) {
                // entire cell degenerate; no phase information
                continue;
            }
            let re_lo = corners.iter().any(|c| c.re < 0.0);
            let re_hi = corners.iter().any(|c| c.re > 0.0);
            let im_lo = corners.iter().any(|c| c.im < 0.0);
            let im_hi = corners.iter().any(|c| c.im > 0.0);
            if !(re_lo && re_hi && im_lo && im_hi) {
                continue;
            }
            let mut total = 0.0;
            for c in 0..4 {
                total += (corners[(c + 1) % 4] * corners[c].conj()).arg();
            }
            let winding = (total / TAU).round() as i32;
            if winding == 0 {
                continue;
            }
            let (fx, fy) = bilinear_zero(&corners);
            out.push(NodalPoint {
                location: (g.x(i) + fx * g.dx(), g.y(j) + fy * g.dy()),
                winding,
                cell: (i, j),
            });
        }
    }
    Ok(out)
}

/// Common zero of the two bilinear interpolants fixed by the corner values
/// (counterclockwise from the lower-left corner). Falls back to the cell
/// center when the quadratic degenerates.
fn bilinear_zero(corners: &[Complex64; 4]) -> (f64, f64) {
    // f(x, y) = A + B x + C y + D x y on the unit square
    let coeff = |f: [f64; 4]| -> (f64, f64, f64, f64) {
        (f[0], f[1] - f[0], f[3] - f[0], f[2] - f[1] - f[3] + f[0])
    };
    let (a1, b1, c1, d1) = coeff([corners[0].re, corners[1].re, corners[2].re, corners[3].re]);
    let (a2, b2, c2, d2) = coeff([corners[0].im, corners[1].im, corners[2].im, corners[3].im]);
    // eliminate y: (a2 + b2 x)(c1 + d1 x) = (a1 + b1 x)(c2 + d2 x)
    let qa = b2 * d1 - b1 * d2;
    let qb = a2 * d1 + b2 * c1 - a1 * d2 - b1 * c2;
    let qc = a2 * c1 - a1 * c2;
    let mut candidates = Vec::new();
    if qa.abs() < 1e-300 {
        if qb.abs() > 1e-300 {
            candidates.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let root = disc.sqrt();
            candidates.push((-qb + root) / (2.0 * qa));
            candidates.push((-qb - root) / (2.0 * qa));
        }
    }
    for x in candidates {
        if !(-1e-6..=1.0 + 1e-6).contains(&x) {
            continue;
        }
        // recover y from whichever bilinear sheet is better conditioned
        let den1 = c1 + d1 * x;
        let den2 = c2 + d2 * x;
        let y = if den1.abs() >= den2.abs() {
            if den1.abs() < 1e-300 {
                continue;
            }
            -(a1 + b1 * x) / den1
        } else {
            -(a2 + b2 * x) / den2
        };
        if (-1e-6..=1.0 + 1e-6).contains(&y) {
            return (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        }
    }
    (0.5, 0.5)
}

/// Comparison of a loop's measured winding against the summed windings of
/// the nodal points it encloses.
#[derive(Debug, Clone)]
pub struct SumRuleReport {
    pub measurement: WindingResult,
    /// Nodal points enclosed by the loop (winding counted with the loop's
    /// own orientation and multiplicity).
    pub enclosed: Vec<NodalPoint>,
    pub enclosed_sum: i64,
    pub consistent: bool,
}

/// Verifies that the loop circulation equals `2 pi hbar` times the sum of
/// enclosed vortex windings. Enclosure uses the loop's signed polygon
/// winding around each nodal point, so orientation and multiple wraps are
/// respected.
pub fn sum_rule_check(
    psi: &ScalarField2D,
    path: &LoopPath,
    constants: &PhysicalConstants,
) -> Result<SumRuleReport> {
    let measurement = circulation(psi, path, constants)?;
    let points = nodal_scan(psi)?;
    let mut enclosed = Vec::new();
    let mut enclosed_sum = 0i64;
    for p in points {
        let wraps = path.winding_around(p.location);
        if wraps != 0 {
            enclosed_sum += wraps * p.winding as i64;
            enclosed.push(p);
        }
    }
    Ok(SumRuleReport {
        consistent: measurement.winding == enclosed_sum,
        measurement,
        enclosed,
        enclosed_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;
    use crate::grid::CartesianGrid;

    fn constants() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn vortex_field(g: CartesianGrid) -> ScalarField2D {
        build_field(g, Complex64::new).unwrap()
    }

    #[test]
    fn unit_circle_around_single_vortex() {
        let g = CartesianGrid::centered_square(2.0, 64).unwrap();
        let psi = vortex_field(g);
        let path = LoopPath::circle((0.0, 0.0), 1.0, 720).unwrap();
        let r = circulation(&psi, &path, &constants()).unwrap();
        assert_eq!(r.winding, 1);
        assert!((r.circulation - TAU).abs() < 1e-9);
        assert!(r.quantization_defect < 1e-12);
    }

    #[test]
    fn nodeless_field_has_zero_circulation() {
        let g = CartesianGrid::centered_square(2.0, 64).unwrap();
        let psi = build_field(g, |x, y| Complex64::new((-(x * x + y * y)).exp(), 0.0)).unwrap();
        let path = LoopPath::circle((0.0, 0.0), 1.5, 128).unwrap();
        let r = circulation(&psi, &path, &constants()).unwrap();
        assert_eq!(r.winding, 0);
        assert!(r.circulation.abs() < 1e-12);
    }

    #[test]
    fn squared_vortex_counts_twice() {
        let g = CartesianGrid::centered_square(2.0, 128).unwrap();
        let psi = build_field(g, |x, y| {
            let z = Complex64::new(x, y);
            z * z
        })
        .unwrap();
        let path = LoopPath::circle((0.0, 0.0), 1.0, 720).unwrap();
        let r = circulation(&psi, &path, &constants()).unwrap();
        assert_eq!(r.winding, 2);
        assert!(r.quantization_defect < 1e-12);
    }

    #[test]
    fn loop_radius_selects_enclosed_pair() {
        // two unit vortices at (+-0.3, 0): a wide loop sees both, a narrow
        // loop between them sees none
        let g = CartesianGrid::centered_square(2.0, 192).unwrap();
        let psi = build_field(g, |x, y| {
            Complex64::new(x - 0.3, y) * Complex64::new(x + 0.3, y) * (-(x * x + y * y)).exp()
        })
        .unwrap();
        let wide = LoopPath::circle((0.0, 0.0), 1.0, 720).unwrap();
        let narrow = LoopPath::circle((0.0, 0.0), 0.1, 720).unwrap();
        let c = constants();
        assert_eq!(circulation(&psi, &wide, &c).unwrap().winding, 2);
        assert_eq!(circulation(&psi, &narrow, &c).unwrap().winding, 0);
    }

    #[test]
    fn hbar_scales_circulation() {
        let g = CartesianGrid::centered_square(2.0, 64).unwrap();
        let psi = vortex_field(g);
        let path = LoopPath::circle((0.0, 0.0), 1.0, 256).unwrap();
        let c = PhysicalConstants::new(0.25, 1.0).unwrap();
        let r = circulation(&psi, &path, &c).unwrap();
        assert_eq!(r.winding, 1);
        assert!((r.circulation - 0.25 * TAU).abs() < 1e-12);
    }

    #[test]
    fn loop_deformation_invariance() {
        let g = CartesianGrid::centered_square(3.0, 192).unwrap();
        let psi = build_field(g, |x, y| {
            Complex64::new(x - 0.2, y + 0.1) * (-(x * x + y * y)).exp()
        })
        .unwrap();
        let c = constants();
        let mut results = Vec::new();
        for radius in [0.8, 1.2, 1.8, 2.2] {
            let path = LoopPath::circle((0.0, 0.0), radius, 720).unwrap();
            results.push(circulation(&psi, &path, &c).unwrap());
        }
        let square = LoopPath::square((0.0, 0.0), 1.5, 720).unwrap();
        results.push(circulation(&psi, &square, &c).unwrap());
        for r in &results {
            assert_eq!(r.winding, 1);
            assert!((r.circulation - results[0].circulation).abs() < 1e-6 * TAU);
        }
    }

    #[test]
    fn orientation_reversal_negates_circulation() {
        let g = CartesianGrid::centered_square(2.0, 96).unwrap();
        let psi = vortex_field(g);
        let path = LoopPath::circle((0.0, 0.0), 1.0, 256).unwrap();
        let c = constants();
        let fwd = circulation(&psi, &path, &c).unwrap();
        let bwd = circulation(&psi, &path.reversed(), &c).unwrap();
        assert_eq!(fwd.winding, -bwd.winding);
        assert!((fwd.circulation + bwd.circulation).abs() < 1e-12);
    }

    #[test]
    fn undersampled_loop_refines_automatically() {
        // a fast plane wave makes raw 64-sample steps exceed the half-turn
        // limit; midpoint refinement brings them back under it
        let g = CartesianGrid::centered_square(1.5, 301).unwrap();
        let psi = build_field(g, |x, _| Complex64::from_polar(1.0, 40.0 * x)).unwrap();
        let path = LoopPath::circle((0.0, 0.0), 1.0, 64).unwrap();
        let r = circulation(&psi, &path, &constants()).unwrap();
        assert_eq!(r.winding, 0);
        assert!(r.samples_used > 64, "used {}", r.samples_used);
    }

    #[test]
    fn masked_sample_is_rejected() {
        let g = CartesianGrid::centered_square(2.0, 64).unwrap();
        let psi = vortex_field(g);
        // a loop passing straight through the node
        let path = LoopPath::circle((1.0, 0.0), 1.0, 128).unwrap();
        match circulation(&psi, &path, &constants()) {
            Err(Error::MaskedLoopSample { .. }) => {}
            other => panic!("expected masked-sample error, got {other:?}"),
        }
    }

    #[test]
    fn scan_finds_single_positive_vortex() {
        let g = CartesianGrid::centered_square(1.0, 32).unwrap();
        let psi = vortex_field(g);
        let points = nodal_scan(&psi).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].winding, 1);
        assert!(points[0].location.0.abs() < 1e-9);
        assert!(points[0].location.1.abs() < 1e-9);
    }

    #[test]
    fn scan_finds_conjugate_vortex_with_negative_winding() {
        let g = CartesianGrid::centered_square(1.0, 32).unwrap();
        let psi = build_field(g, |x, y| Complex64::new(x, -y)).unwrap();
        let points = nodal_scan(&psi).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].winding, -1);
    }

    #[test]
    fn scan_localizes_off_grid_pair() {
        // the product field is quadratic, so the bilinear sub-cell solve is
        // accurate to O(h^2); h = 2/63 here
        let g = CartesianGrid::centered_square(1.0, 64).unwrap();
        let psi =
            build_field(g, |x, y| Complex64::new(x - 0.5, y) * Complex64::new(x + 0.5, y)).unwrap();
        let mut points = nodal_scan(&psi).unwrap();
        points.sort_by(|a, b| a.location.0.partial_cmp(&b.location.0).unwrap());
        assert_eq!(points.len(), 2);
        assert!((points[0].location.0 + 0.5).abs() < 5e-3);
        assert!((points[1].location.0 - 0.5).abs() < 5e-3);
        assert!(points.iter().all(|p| p.location.1.abs() < 5e-3));
        assert!(points.iter().all(|p| p.winding == 1));
    }

    #[test]
    fn real_field_has_no_vortices() {
        let g = CartesianGrid::centered_square(3.0, 64).unwrap();
        let psi = build_field(g, |x, _| Complex64::new(x.sin(), 0.0)).unwrap();
        assert!(nodal_scan(&psi).unwrap().is_empty());
    }

    #[test]
    fn polygon_winding_number() {
        let path = LoopPath::circle((0.0, 0.0), 1.0, 64).unwrap();
        assert_eq!(path.winding_around((0.2, 0.1)), 1);
        assert_eq!(path.winding_around((1.5, 0.0)), 0);
        assert_eq!(path.reversed().winding_around((0.0, 0.0)), -1);
    }

    #[test]
    fn sum_rule_on_pair_and_empty_loop() {
        let g = CartesianGrid::centered_square(2.0, 192).unwrap();
        let c = constants();
        // vortex/antivortex pair: enclosed sum and measured winding both 0
        let pair = build_field(g, |x, y| {
            Complex64::new(x - 0.4, y) * Complex64::new(x + 0.4, -y) * (-(x * x + y * y)).exp()
        })
        .unwrap();
        let path = LoopPath::circle((0.0, 0.0), 1.2, 720).unwrap();
        let report = sum_rule_check(&pair, &path, &c).unwrap();
        assert!(report.consistent);
        assert_eq!(report.measurement.winding, 0);
        assert_eq!(report.enclosed_sum, 0);
        assert_eq!(report.enclosed.len(), 2);
        // a loop enclosing nothing
        let away = LoopPath::circle((1.2, 1.2), 0.3, 128).unwrap();
        let empty = sum_rule_check(&pair, &away, &c).unwrap();
        assert!(empty.consistent);
        assert_eq!(empty.measurement.winding, 0);
        assert!(empty.enclosed.is_empty());
    }

    #[test]
    fn loop_constructors_validate() {
        assert!(LoopPath::circle((0.0, 0.0), -1.0, 128).is_err());
        assert!(LoopPath::from_points(vec![(0.0, 0.0); 8]).is_err());
        let sq = LoopPath::square((0.0, 0.0), 1.0, 100).unwrap();
        assert!(sq.len() >= MIN_LOOP_SAMPLES);
    }
}

