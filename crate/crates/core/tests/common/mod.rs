//! Independent oracles for the acceptance suite.
//!
//! Nothing here reuses the library's solvers: the eigenvalue oracle
//! discretizes the planar Hamiltonian directly on a Cartesian grid and
//! finds its smallest eigenvalue by inverse power iteration, with the
//! inner solves done by conjugate gradients (the operator is symmetric
//! positive definite for a confining potential).

/// Smallest eigenvalue of `-1/2 lap + U` on `[-half, half]^2` with Dirichlet
/// walls, discretized by the 5-point stencil on an `n x n` grid.
pub fn ground_energy_fd(half: f64, n: usize, potential: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 2.0 * half / (n - 1) as f64;
    let coord = |i: usize| -half + i as f64 * h;
    let u: Vec<f64> = (0..n * n)
        .map(|idx| potential(coord(idx % n), coord(idx / n)))
        .collect();

    // Dirichlet: off-grid neighbors are zero
    let apply = |x: &[f64], out: &mut [f64]| {
        let inv_h2 = 1.0 / (h * h);
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let left = if i > 0 { x[idx - 1] } else { 0.0 };
                let right = if i + 1 < n { x[idx + 1] } else { 0.0 };
                let down = if j > 0 { x[idx - n] } else { 0.0 };
                let up = if j + 1 < n { x[idx + n] } else { 0.0 };
                let lap = (left + right + up + down - 4.0 * x[idx]) * inv_h2;
                out[idx] = -0.5 * lap + u[idx] * x[idx];
            }
        }
    };

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // conjugate gradients for H y = b
    let cg = |b: &[f64], y: &mut Vec<f64>| {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; b.len()];
        let mut rr = dot(&r, &r);
        let target = rr * 1e-24;
        for _ in 0..4000 {
            apply(&p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for i in 0..y.len() {
                y[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_next = dot(&r, &r);
            if rr_next < target {
                break;
            }
            let beta = rr_next / rr;
            rr = rr_next;
            for i in 0..p.len() {
                p[i] = r[i] + beta * p[i];
            }
        }
    };

    // inverse power iteration from a symmetric positive start
    let mut x: Vec<f64> = (0..n * n)
        .map(|idx| {
            let (px, py) = (coord(idx % n), coord(idx / n));
            (-0.1 * (px * px + py * py)).exp()
        })
        .collect();
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let mut y = vec![0.0; n * n];
    for _ in 0..18 {
        cg(&x, &mut y);
        let norm = dot(&y, &y).sqrt();
        for i in 0..x.len() {
            x[i] = y[i] / norm;
        }
    }
    let mut hx = vec![0.0; n * n];
    apply(&x, &mut hx);
    dot(&x, &hx) / dot(&x, &x)
}

/// Richardson extrapolation of the second-order eigenvalue discretization:
/// evaluates at `n - 1` and `2(n - 1)` intervals and cancels the `h^2` term.
pub fn ground_energy_extrapolated(half: f64, n: usize, potential: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
    let coarse = ground_energy_fd(half, n, potential);
    let fine = ground_energy_fd(half, 2 * (n - 1) + 1, potential);
    (4.0 * fine - coarse) / 3.0
}
