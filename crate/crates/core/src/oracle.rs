//! Brute-force references: finite-volume Laplace eigenvalues, finite-difference
//! Schrödinger eigenvalues and direct geodesic integration.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::Profile;

/// Base resolution of the Laplace oracle; Richardson uses `N`, `2N`, `4N`.
pub const SL_BASE_CELLS: usize = 4000;

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * (lo.abs() + hi.abs()) + 1e-300 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate, by inverse iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = lambda + 1e-10 * (1.0 + lambda.abs());
        let mut v = vec![1.0; n];
        for _ in 0..3 {
            // Thomas algorithm on (T − shift).
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut denom = self.diag[0] - shift;
            c[0] = if n > 1 { self.off[0] / denom } else { 0.0 };
            d[0] = v[0] / denom;
            for i in 1..n {
                denom = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
                if i + 1 < n {
                    c[i] = self.off[i] / denom;
                }
                d[i] = (v[i] - self.off[i - 1] * d[i - 1]) / denom;
            }
            let mut x = vec![0.0; n];
            x[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                x[i] = d[i] - c[i] * x[i + 1];
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            v = x.into_iter().map(|v| v / norm).collect();
        }
        v
    }
}

/// Finite-volume discretization of `−Δ` restricted to `e^{inθ}` in the `u` chart.
fn laplace_matrix(p: &Profile, n: i64, cells: usize) -> Tridiagonal {
    let besse = p.besse();
    let h = PI / cells as f64;
    let n2 = (n * n) as f64;
    let mut w = Vec::with_capacity(cells);
    let mut diag = vec![0.0; cells];
    // Conductance sin u / f at interior faces u = i h.
    let cond: Vec<f64> = (1..cells)
        .map(|i| {
            let u = i as f64 * h;
            u.sin() / besse.f(u.cos()) / h
        })
        .collect();
    for i in 0..cells {
        let u = (i as f64 + 0.5) * h;
        let (s, c) = u.sin_cos();
        let f = besse.f(c);
        w.push(f * s * h);
        diag[i] = n2 * f / s * h;
        if i > 0 {
            diag[i] += cond[i - 1];
        }
        if i + 1 < cells {
            diag[i] += cond[i];
        }
    }
    let mut off = Vec::with_capacity(cells - 1);
    for i in 0..cells - 1 {
        off.push(-cond[i] / (w[i] * w[i + 1]).sqrt());
    }
    for i in 0..cells {
        diag[i] /= w[i];
    }
    Tridiagonal { diag, off }
}

/// Lowest `count` eigenvalues of the Laplacian on the `n`-th angular sector.
pub fn sturm_liouville_eigs(p: &Profile, n: i64, count: usize) -> Result<Vec<f64>> {
    sturm_liouville_eigs_with(p, n, count, SL_BASE_CELLS)
}

pub fn sturm_liouville_eigs_with(
    p: &Profile,
    n: i64,
    count: usize,
    base_cells: usize,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::input("eigenvalue count must be at least 1"));
    }
    // Keep at least ~40 cells per oscillation of the highest requested mode.
    let modes = n.unsigned_abs() as usize + count;
    if base_cells < 40 * modes {
        return Err(Error::input(format!(
            "grid of {base_cells} cells too coarse for {count} eigenvalues at n = {n}"
        )));
    }
    let levels = [base_cells, 2 * base_cells, 4 * base_cells];
    let raw: Vec<Vec<f64>> = levels
        .par_iter()
        .map(|&cells| {
            let t = laplace_matrix(p, n, cells);
            (0..count).map(|k| t.eigenvalue(k)).collect()
        })
        .collect();
    // Two Richardson steps for an error expansion in h² and h⁴.
    Ok((0..count)
        .map(|k| (64.0 * raw[2][k] - 20.0 * raw[1][k] + raw[0][k]) / 45.0)
        .collect())
}

/// Lowest `count` eigenvalues of `−(h²/2) d²/dx² + V` on `domain` with Dirichlet ends.
pub fn schrodinger_eigs_1d(
    v: impl Fn(f64) -> f64 + Sync,
    h: f64,
    domain: (f64, f64),
    count: usize,
) -> Result<Vec<f64>> {
    schrodinger_eigs_1d_with(v, h, domain, count, 2000)
}

pub fn schrodinger_eigs_1d_with(
    v: impl Fn(f64) -> f64 + Sync,
    h: f64,
    domain: (f64, f64),
    count: usize,
    base_points: usize,
) -> Result<Vec<f64>> {
    let (a, b) = domain;
    if !(b > a) || count == 0 || !(h > 0.0) {
        return Err(Error::input("need a nonempty domain, h > 0 and count ≥ 1"));
    }
    let build = |m: usize| {
        let dx = (b - a) / (m + 1) as f64;
        let k = 0.5 * h * h / (dx * dx);
        let diag: Vec<f64> = (1..=m).map(|i| 2.0 * k + v(a + i as f64 * dx)).collect();
        Tridiagonal {
            diag,
            off: vec![-k; m - 1],
        }
    };
    let levels = [base_points, 2 * base_points + 1, 4 * base_points + 3];
    let mats: Vec<Tridiagonal> = levels.iter().map(|&m| build(m)).collect();
    let raw: Vec<Vec<f64>> = mats
        .par_iter()
        .map(|t| (0..count).map(|k| t.eigenvalue(k)).collect())
        .collect();
    // Leakage guard: the highest requested state must be negligible at the walls.
    let top = &mats[0];
    let vec = top.eigenvector(raw[0][count - 1]);
    let peak = vec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let edge = (base_points / 100).max(1);
    let wall = vec[..edge]
        .iter()
        .chain(&vec[vec.len() - edge..])
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if wall > 1e-6 * peak {
        return Err(Error::input(format!(
            "domain [{a}, {b}] too small: boundary amplitude {:.2e} of peak",
            wall / peak
        )));
    }
    Ok((0..count)
        .map(|k| (64.0 * raw[2][k] - 20.0 * raw[1][k] + raw[0][k]) / 45.0)
        .collect())
}

/// A northbound equator crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub s: f64,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct GeodesicRun {
    /// Samples `(s, u, θ, ψ)` at every step.
    pub samples: Vec<[f64; 4]>,
    pub crossings: Vec<Crossing>,
    /// Largest deviation of `a sin ψ` from `i1`.
    pub clairaut_drift: f64,
}

impl GeodesicRun {
    /// Arclength and angle advance of the first return to the equator.
    pub fn first_return(&self) -> Option<(f64, f64)> {
        let c = self.crossings.get(1)?;
        let c0 = self.crossings[0];
        Some((c.s - c0.s, c.theta - c0.theta))
    }
}

/// Unit-speed geodesic from the equator with Clairaut value `i1`, heading north.
///
/// The state is `(u, θ, ψ)` with `ψ` the angle to the meridian direction of
/// increasing `u`; the system has no singularity at the turning points.
pub fn geodesic_integrate(p: &Profile, i1: f64, horizon: f64) -> Result<GeodesicRun> {
    geodesic_integrate_with(p, i1, horizon, 1e-3)
}

pub fn geodesic_integrate_with(
    p: &Profile,
    i1: f64,
    horizon: f64,
    step: f64,
) -> Result<GeodesicRun> {
    if !(i1.abs() > 0.0 && i1.abs() < 1.0) || !(horizon > 0.0) {
        return Err(Error::input("geodesic needs 0 < |i1| < 1 and a positive horizon"));
    }
    let besse = p.besse();
    let rhs = |y: [f64; 3]| -> [f64; 3] {
        let (su, cu) = y[0].sin_cos();
        let (sp, cp) = y[2].sin_cos();
        let f = besse.f(cu);
        [cp / f, sp / su, -cu * sp / (f * su)]
    };
    let steps = (horizon / step).ceil() as usize;
    let h = horizon / steps as f64;
    let mut y = [FRAC_PI_2, 0.0, PI - i1.asin()];
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push([0.0, y[0], y[1], y[2]]);
    let mut crossings = vec![Crossing { s: 0.0, theta: 0.0 }];
    let mut drift: f64 = 0.0;
    let mut dy = rhs(y);
    for j in 0..steps {
        let s = j as f64 * h;
        let k1 = dy;
        let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]];
        let k2 = rhs(y2);
        let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]];
        let k3 = rhs(y3);
        let y4 = [y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]];
        let k4 = rhs(y4);
        let mut next = [0.0; 3];
        for i in 0..3 {
            next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if next.iter().any(|v| !v.is_finite()) || next[0] <= 0.0 || next[0] >= PI {
            return Err(Error::numeric(format!(
                "geodesic left the chart at s = {s:.6}; reduce the step"
            )));
        }
        let dnext = rhs(next);
        // Northbound crossing: u decreases through π/2.
        if y[0] > FRAC_PI_2 && next[0] <= FRAC_PI_2 && s > 0.0 {
            let hermite = |t: f64, a: f64, b: f64, da: f64, db: f64| {
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * a
                    + (t3 - 2.0 * t2 + t) * h * da
                    + (-2.0 * t3 + 3.0 * t2) * b
                    + (t3 - t2) * h * db
            };
            let g = |t: f64| hermite(t, y[0], next[0], dy[0], dnext[0]) - FRAC_PI_2;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            crossings.push(Crossing {
                s: s + t * h,
                theta: hermite(t, y[1], next[1], dy[1], dnext[1]),
            });
        }
        y = next;
        dy = dnext;
        drift = drift.max((y[0].sin() * y[2].sin() - i1).abs());
        samples.push([s + h, y[0], y[1], y[2]]);
    }
    if drift > 1e-6 {
        return Err(Error::numeric(format!(
            "Clairaut drift {drift:.2e}: step too large for this geodesic"
        )));
    }
    Ok(GeodesicRun {
        samples,
        crossings,
        clairaut_drift: drift,
    })
}
