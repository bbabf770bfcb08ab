//! Second-order linear ODE with a zero window, solved in Volterra form.
//!
//! Integrating `p2 K'' + p1 K' + p0 K = r` twice from the window edge `x_w` with
//! `K(x_w) = K'(x_w) = 0` gives
//!
//! ```text
//! p2 K + ∫_{x_w}^x [(p1 − 2p2')(y) + (x − y)(p2'' − p1' + p0)(y)] K(y) dy = (I² r)(x)
//! ```
//!
//! which is marched with the trapezoid rule in `ξ = √(y − x_w)`, so solutions with a
//! square-root onset at the window edge stay well resolved. One Richardson step
//! against the every-other-node subgrid removes the leading `O(Δξ²)` error.

use super::sampled::SampledFunction;
use super::spline::{CubicSpline, SplineEnd};
use crate::error::{Error, Result};

/// A coefficient function with its first two derivatives.
pub trait Coefficient {
    fn eval3(&self, x: f64) -> [f64; 3];
}

impl Coefficient for SampledFunction {
    fn eval3(&self, x: f64) -> [f64; 3] {
        [self.eval(x), self.deriv(x), self.deriv2(x)]
    }
}

/// Closure-backed coefficient returning `[value, d/dx, d²/dx²]`.
pub struct Analytic<F>(pub F);

impl<F: Fn(f64) -> [f64; 3]> Coefficient for Analytic<F> {
    fn eval3(&self, x: f64) -> [f64; 3] {
        (self.0)(x)
    }
}

/// Constant coefficient.
impl Coefficient for f64 {
    fn eval3(&self, _x: f64) -> [f64; 3] {
        [*self, 0.0, 0.0]
    }
}

/// Right-hand side of the equation.
pub enum OdeRhs<'a> {
    /// Values of `r` on the grid.
    Pointwise(&'a [f64]),
    /// Values of the already twice-integrated right-hand side of the Volterra form.
    TwiceIntegrated(&'a [f64]),
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub solution: SampledFunction,
    /// Smallest over largest diagonal pivot of the marching scheme.
    pub pivot_ratio: f64,
    /// Largest Richardson correction applied.
    pub richardson_correction: f64,
}

const PIVOT_FLOOR: f64 = 1e-12;

/// Solve `p2 K'' + p1 K' + p0 K = rhs` on `nodes` with `K ≡ 0` for `x ≤ window_end`.
pub fn solve_linear_ode2(
    nodes: &[f64],
    p2: &dyn Coefficient,
    p1: &dyn Coefficient,
    p0: &dyn Coefficient,
    rhs: OdeRhs<'_>,
    window_end: f64,
) -> Result<OdeSolution> {
    let n = nodes.len();
    if n < 3 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("ODE grid must be strictly increasing with ≥ 3 nodes"));
    }
    let r = match &rhs {
        OdeRhs::Pointwise(v) | OdeRhs::TwiceIntegrated(v) => *v,
    };
    if r.len() != n {
        return Err(Error::input("right-hand side does not match the grid"));
    }
    if !(window_end >= nodes[0] && window_end < nodes[n - 1]) {
        return Err(Error::input("zero window must start the grid and leave it nonempty"));
    }

    let p2_zero = nodes.iter().all(|&x| p2.eval3(x)[0] == 0.0);
    let p1_zero = nodes.iter().all(|&x| p1.eval3(x)[0] == 0.0);
    if p2_zero {
        if !p1_zero {
            return Err(Error::input("first-order equations are not supported"));
        }
        let OdeRhs::Pointwise(r) = rhs else {
            return Err(Error::input("algebraic case needs a pointwise right-hand side"));
        };
        let mut k = vec![0.0; n];
        let mut pmin = f64::INFINITY;
        let mut pmax: f64 = 0.0;
        for i in 0..n {
            if nodes[i] <= window_end {
                continue;
            }
            let c = p0.eval3(nodes[i])[0];
            pmin = pmin.min(c.abs());
            pmax = pmax.max(c.abs());
            k[i] = r[i] / c;
        }
        let ratio = pmin / pmax;
        if !(ratio > PIVOT_FLOOR) {
            return Err(Error::Singular {
                condition: ratio,
                context: "p0 vanishes on the active range".into(),
            });
        }
        return Ok(OdeSolution {
            solution: SampledFunction::new(nodes.to_vec(), k)?,
            pivot_ratio: ratio,
            richardson_correction: 0.0,
        });
    }

    let phi: Vec<f64> = match rhs {
        OdeRhs::TwiceIntegrated(v) => v.to_vec(),
        OdeRhs::Pointwise(v) => twice_integrate(nodes, v, window_end)?,
    };

    let first = nodes.iter().position(|&x| x > window_end).unwrap();
    let active: Vec<usize> = (first..n).collect();
    let fine = march(nodes, &active, p2, p1, p0, &phi, window_end)?;
    // With the window edge as ξ-node 0, the coarse grid keeps ξ-nodes 2, 4, ….
    let coarse_idx: Vec<usize> = active.iter().copied().skip(1).step_by(2).collect();
    let mut k = vec![0.0; n];
    for (&i, &v) in active.iter().zip(&fine.0) {
        k[i] = v;
    }
    let mut correction = 0.0f64;
    if coarse_idx.len() >= 4 {
        let coarse = march(nodes, &coarse_idx, p2, p1, p0, &phi, window_end)?;
        // Correction (fine − coarse)/3 at shared nodes, interpolated in ξ elsewhere.
        let xi: Vec<f64> = std::iter::once(0.0)
            .chain(coarse_idx.iter().map(|&i| (nodes[i] - window_end).sqrt()))
            .collect();
        let corr: Vec<f64> = std::iter::once(0.0)
            .chain(
                coarse_idx
                    .iter()
                    .zip(&coarse.0)
                    .map(|(&i, &c)| (k[i] - c) / 3.0),
            )
            .collect();
        let sp = CubicSpline::new(&xi, &corr, SplineEnd::NotAKnot)?;
        for &i in &active {
            let c = sp.eval((nodes[i] - window_end).sqrt());
            correction = correction.max(c.abs());
            k[i] += c;
        }
    }
    Ok(OdeSolution {
        solution: SampledFunction::new(nodes.to_vec(), k)?,
        pivot_ratio: fine.1,
        richardson_correction: correction,
    })
}

fn march(
    nodes: &[f64],
    idx: &[usize],
    p2: &dyn Coefficient,
    p1: &dyn Coefficient,
    p0: &dyn Coefficient,
    phi: &[f64],
    xw: f64,
) -> Result<(Vec<f64>, f64)> {
    let m = idx.len();
    let xs: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
    let xi: Vec<f64> = xs.iter().map(|&x| (x - xw).sqrt()).collect();
    // Kernel pieces at the quadrature nodes (ξ = 0 node carries K = 0).
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for &x in &xs {
        let [_, q2d, q2dd] = p2.eval3(x);
        let [q1, q1d, _] = p1.eval3(x);
        let q0 = p0.eval3(x)[0];
        a.push(q1 - 2.0 * q2d);
        b.push(q2dd - q1d + q0);
    }
    let mut k = vec![0.0; m];
    let mut pmin = f64::INFINITY;
    let mut pmax: f64 = 0.0;
    for i in 0..m {
        // Trapezoid weights on ξ-nodes 0 (window edge), ξ_0, …, ξ_i.
        let mut sum = 0.0;
        for j in 0..i {
            let left = if j == 0 { xi[0] } else { xi[j] - xi[j - 1] };
            let w = 0.5 * (left + (xi[j + 1] - xi[j]));
            sum += w * 2.0 * xi[j] * (a[j] + (xs[i] - xs[j]) * b[j]) * k[j];
        }
        let wi = 0.5 * if i == 0 { xi[0] } else { xi[i] - xi[i - 1] };
        let pivot = p2.eval3(xs[i])[0] + wi * 2.0 * xi[i] * a[i];
        pmin = pmin.min(pivot.abs());
        pmax = pmax.max(pivot.abs());
        k[i] = (phi[idx[i]] - sum) / pivot;
    }
    let ratio = pmin / pmax;
    if !(ratio > PIVOT_FLOOR) || k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            condition: ratio,
            context: "Volterra marching for the second-order equation".into(),
        });
    }
    Ok((k, ratio))
}

/// `(I² r)(x) = ∫_{x_w}^x (x − y) r(y) dy` for a smooth pointwise `r`.
fn twice_integrate(nodes: &[f64], r: &[f64], xw: f64) -> Result<Vec<f64>> {
    let sp = CubicSpline::new(nodes, r, SplineEnd::NotAKnot)?;
    let base = sp.integral_to(xw);
    let i1: Vec<f64> = nodes.iter().map(|&x| sp.integral_to(x) - base).collect();
    let sp1 = CubicSpline::new(nodes, &i1, SplineEnd::NotAKnot)?;
    let base1 = sp1.integral_to(xw);
    Ok(nodes
        .iter()
        .map(|&x| {
            if x <= xw {
                0.0
            } else {
                sp1.integral_to(x) - base1
            }
        })
        .collect())
}
