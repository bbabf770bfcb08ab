//! From a normal form to the branch slopes `|a'(r±)|` and back to a profile.
//!
//! Work happens in `x = 1/a²` with `v = x − 1`, on a grid uniform in `√v`.
//! With `G = x^{-3/2} J`, the action satisfies `A G = 2νs(ν)` where `A` is the
//! Abel transform, `ν = x^{-1/2}` and `s = π(F − νF')` the half return time.
//! The subprincipal data gives
//! `I²[(x^{3/2}/3) K''] = I_{3/2}[4νs g/√π] + (κ/3)√v`, `κ = 2/f(0)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::cheb::{chebyshev_basis, lstsq};
use crate::numerics::{
    abel_invert, frac_integral, solve_linear_ode2, Analytic, Chebyshev, FracOrder, OdeRhs,
    SampledFunction,
};
use crate::profile::{BesseForm, Profile, DEFAULT_NODES};
use crate::quantization::NormalForm;

/// Upper end of the `v` grid: `x ≤ 401`, i.e. `a ≥ 0.05`.
pub const V_MAX: f64 = 400.0;
pub const GRID_NODES: usize = 1024;
/// The `K` solve runs on a grid this many times finer, then keeps every such node.
pub const K_REFINE: usize = 4;
/// Degree of the Chebyshev series for `q` in the rebuilt Besse form.
pub const REBUILD_DEGREE: usize = 16;
/// Branch samples with `a` above this are dropped from the rebuild fit.
pub const EQUATOR_BUFFER: f64 = 0.99;

/// `v_k = V (k/N)²`, `k = 0..=N`.
pub fn v_grid(v_max: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| v_max * (k as f64 / n as f64).powi(2))
        .collect()
}

fn half_return(nf: &NormalForm, nu: f64) -> f64 {
    let (f, fp) = nf.action(nu);
    PI * (f - nu * fp)
}

/// `J(x) = 1/|a'(r−)| + 1/|a'(r+)|` on `x ∈ (1, 1 + V]`.
pub fn recover_j(nf: &NormalForm) -> Result<SampledFunction> {
    recover_j_on(nf, &v_grid(V_MAX, GRID_NODES))
}

pub fn recover_j_on(nf: &NormalForm, v: &[f64]) -> Result<SampledFunction> {
    let d: Vec<f64> = v
        .iter()
        .map(|&v| {
            let nu = (1.0 + v).powf(-0.5);
            2.0 * nu * half_return(nf, nu)
        })
        .collect();
    if d.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::numeric(
            "νs(ν) is not monotone in the energy: the action map is not invertible",
        ));
    }
    let d0 = d[0];
    let shifted = SampledFunction::new(v.to_vec(), d.iter().map(|x| x - d0).collect())?;
    let g = abel_invert(&shifted)?.values;
    let (x, j): (Vec<f64>, Vec<f64>) = v
        .iter()
        .zip(g.values())
        .skip(1)
        .map(|(&v, &gr)| {
            let x = 1.0 + v;
            (x, x.powf(1.5) * (d0 / (PI * v.sqrt()) + gr))
        })
        .unzip();
    SampledFunction::new(x, j)
}

/// `K(x) = |a'(r−)| + |a'(r+)|` on `x ∈ [1, 1 + V]`, with `K(1) = 0`.
pub fn recover_k(nf: &NormalForm) -> Result<SampledFunction> {
    let fine = recover_k_on(nf, &v_grid(V_MAX, K_REFINE * GRID_NODES))?;
    let (x, k): (Vec<f64>, Vec<f64>) = fine
        .nodes()
        .iter()
        .zip(fine.values())
        .step_by(K_REFINE)
        .map(|(&x, &k)| (x, k))
        .unzip();
    SampledFunction::new(x, k)
}

pub fn recover_k_on(nf: &NormalForm, v: &[f64]) -> Result<SampledFunction> {
    let d: Vec<f64> = v
        .iter()
        .map(|&v| {
            let nu = (1.0 + v).powf(-0.5);
            4.0 * nu * half_return(nf, nu) * nf.level_hm1(nu) / PI.sqrt()
        })
        .collect();
    let kappa = 2.0 * PI / half_return(nf, 1.0);
    let i32 = frac_integral(&SampledFunction::new(v.to_vec(), d)?, FracOrder::new(1.5))?;
    let rhs: Vec<f64> = v
        .iter()
        .zip(i32.values())
        .map(|(&v, &r)| r + kappa / 3.0 * v.sqrt())
        .collect();
    let x: Vec<f64> = v.iter().map(|v| 1.0 + v).collect();
    let p2 = Analytic(|x: f64| [x.powf(1.5) / 3.0, 0.5 * x.sqrt(), 0.25 / x.sqrt()]);
    let sol = solve_linear_ode2(&x, &p2, &0.0, &0.0, OdeRhs::TwiceIntegrated(&rhs), 1.0)?;
    if sol.pivot_ratio < 1e-10 {
        return Err(Error::Singular {
            condition: sol.pivot_ratio,
            context: "K equation".into(),
        });
    }
    Ok(sol.solution)
}

/// The two branch slopes over a grid of `x = 1/a²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchData {
    pub x: Vec<f64>,
    pub j: Vec<f64>,
    pub k: Vec<f64>,
    /// Larger slope, assigned to the branch through the pole `r = 0`.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl BranchData {
    /// Smallest value of `J·K`; at least 4 for consistent data.
    pub fn min_jk(&self) -> f64 {
        self.j
            .iter()
            .zip(&self.k)
            .map(|(j, k)| j * k)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solves `p + q = K`, `1/p + 1/q = J` pointwise on the grid of `j`.
pub fn combine_branches(j: &SampledFunction, k: &SampledFunction) -> Result<BranchData> {
    let mut out = BranchData {
        x: Vec::new(),
        j: Vec::new(),
        k: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
    };
    for (&x, &jv) in j.nodes().iter().zip(j.values()) {
        let kv = k.eval(x);
        if !(jv > 0.0 && kv > 0.0) {
            return Err(Error::numeric(format!("J = {jv}, K = {kv} at x = {x}: must be positive")));
        }
        let disc = kv * kv - 4.0 * kv / jv;
        if disc < -1e-3 * kv * kv {
            return Err(Error::numeric(format!(
                "inconsistent J, K at x = {x}: J·K = {:.6} < 4",
                jv * kv
            )));
        }
        let r = disc.max(0.0).sqrt();
        out.x.push(x);
        out.j.push(jv);
        out.k.push(kv);
        out.p.push(0.5 * (kv + r));
        out.q.push(0.5 * (kv - r));
    }
    Ok(out)
}

/// Besse form from the branch slopes: `f(w) = w/p`, `f(−w) = w/q` with `w = √(1 − a²)`,
/// fitted as `f = 1 + (1 − X²) q(X)` with a Chebyshev series `q` of the given degree.
pub fn rebuild_besse(b: &BranchData, degree: usize) -> Result<BesseForm> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..b.x.len() {
        let a = b.x[i].powf(-0.5);
        if a > EQUATOR_BUFFER {
            continue;
        }
        let w = (1.0 - a * a).sqrt();
        for (sx, slope) in [(w, b.p[i]), (-w, b.q[i])] {
            if slope > 0.0 {
                xs.push(sx);
                ys.push(w / slope - 1.0);
            }
        }
    }
    let ncols = degree + 1;
    if xs.len() < 2 * ncols {
        return Err(Error::numeric("too few branch samples for the profile fit"));
    }
    let coeffs = lstsq(&xs, &ys, ncols, |x| {
        chebyshev_basis(x, ncols)
            .into_iter()
            .map(|t| (1.0 - x * x) * t)
            .collect()
    })?;
    let besse = BesseForm::chebyshev(Chebyshev::new(coeffs, -1.0, 1.0), "reconstructed");
    besse.validate()?;
    Ok(besse)
}

pub fn rebuild_profile(b: &BranchData) -> Result<Profile> {
    Profile::from_besse(rebuild_besse(b, REBUILD_DEGREE)?, DEFAULT_NODES)
}

/// Even part `(f(x) + f(−x))/2` from `τ_E` sampled over `i1`.
///
/// With `V = 1 − i1²` and `s = τ_E/2`, `s(V) = A[E/(2√y)](V)` for
/// `E(y) = f(√y) + f(−√y)`, so `E = 2s(0)/π + 2√y A⁻¹[s − s(0)]`.
pub fn recover_even_part(tau_e: &SampledFunction) -> Result<SampledFunction> {
    let (vs, ss): (Vec<f64>, Vec<f64>) = tau_e
        .nodes()
        .iter()
        .zip(tau_e.values())
        .filter(|(i, _)| i.abs() < 1.0)
        .map(|(i, t)| (1.0 - i * i, 0.5 * t))
        .unzip();
    if vs.len() < 8 {
        return Err(Error::input("τ_E needs at least 8 samples inside (−1, 1)"));
    }
    let degree = (vs.len() / 3).clamp(4, 40);
    let s = Chebyshev::fit(&vs, &ss, degree, 0.0, 1.0)?;
    let n = GRID_NODES;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let grid: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let s0 = s.eval(0.0);
    let shifted = SampledFunction::new(grid, xs.iter().map(|x| s.eval(x * x) - s0).collect())?;
    let h = abel_invert(&shifted)?.values;
    let even: Vec<f64> = xs
        .iter()
        .zip(h.values())
        .map(|(&x, &hv)| s0 / PI + x * hv)
        .collect();
    SampledFunction::new(xs, even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionChart;
    use crate::profile::preset;
    use crate::quantization::branch_slope_sum;
    use crate::numerics::Jet;

    /// Branch slopes of a Besse form at `x = 1/a²`: `(w/f(w), w/f(−w))`.
    fn true_slopes(b: &BesseForm, x: f64) -> (f64, f64) {
        let w = (1.0 - 1.0 / x).sqrt();
        (w / b.f(w), w / b.f(-w))
    }

    #[test]
    fn sphere_closed_forms() {
        let p = preset("sphere").unwrap();
        let nf = NormalForm::from_profile(&p).unwrap();
        let j = recover_j(&nf).unwrap();
        let k = recover_k(&nf).unwrap();
        for (&x, &jv) in j.nodes().iter().zip(j.values()).step_by(37) {
            let w = (1.0 - 1.0 / x).sqrt();
            assert!((jv - 2.0 / w).abs() < 1e-6 * (2.0 / w), "J({x}) = {jv}");
            assert!((k.eval(x) - 2.0 * w).abs() < 1e-4, "K({x}) = {}", k.eval(x));
        }
        let b = combine_branches(&j, &k).unwrap();
        for i in (0..b.x.len()).step_by(50) {
            let w = (1.0 - 1.0 / b.x[i]).sqrt();
            assert!((b.p[i] - w).abs() < 2e-3 && (b.q[i] - w).abs() < 2e-3);
        }
    }

    #[test]
    fn asym_matches_profile_slopes() {
        let p = preset("asym").unwrap();
        let nf = NormalForm::from_profile(&p).unwrap();
        let j = recover_j(&nf).unwrap();
        let k = recover_k(&nf).unwrap();
        let mut ej: f64 = 0.0;
        let mut ek: f64 = 0.0;
        for &x in j.nodes() {
            let a = x.powf(-0.5);
            if !(0.05..=0.95).contains(&a) {
                continue;
            }
            let (s1, s2) = true_slopes(p.besse(), x);
            ej = ej.max((j.eval(x) - (1.0 / s1 + 1.0 / s2)).abs());
            ek = ek.max((k.eval(x) - (s1 + s2)).abs());
        }
        assert!(ej < 1e-4, "J error {ej}");
        assert!(ek < 1e-3, "K error {ek}");
    }

    #[test]
    fn k_from_manufactured_data() {
        // Forward-generate the subprincipal data from a known K and invert.
        let b = BesseForm::polynomial(vec![0.3, -0.1, 0.05], "manufactured");
        let nf = NormalForm::from_besse(&b).unwrap();
        let k = recover_k(&nf).unwrap();
        let mut err: f64 = 0.0;
        for &x in k.nodes().iter().skip(1).step_by(7) {
            let sigma = (x - 1.0).sqrt();
            let exact = branch_slope_sum(&b, Jet::constant(sigma)).v;
            err = err.max((k.eval(x) - exact).abs());
        }
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn combine_algebra() {
        let x = vec![1.5, 2.0, 3.0];
        let j = SampledFunction::new(x.clone(), vec![3.0; 3]).unwrap();
        let k = SampledFunction::new(x.clone(), vec![1.5; 3]).unwrap();
        let b = combine_branches(&j, &k).unwrap();
        assert!((b.p[1] - 1.0).abs() < 1e-14 && (b.q[1] - 0.5).abs() < 1e-14);
        let w = 0.4;
        let j = SampledFunction::new(x.clone(), vec![2.0 / w; 3]).unwrap();
        let k = SampledFunction::new(x, vec![2.0 * w; 3]).unwrap();
        let b = combine_branches(&j, &k).unwrap();
        assert!((b.p[0] - w).abs() < 1e-7 && (b.q[0] - w).abs() < 1e-7);
        assert!(b.min_jk() >= 4.0 - 1e-12);
    }

    #[test]
    fn even_part_of_presets() {
        for (name, exact) in [
            ("asym", (|x: f64| 1.7 - 0.7 * x * x) as fn(f64) -> f64),
            ("mirror", |x: f64| 1.7 - 0.7 * x * x),
            ("sphere", |_| 1.0),
        ] {
            let p = preset(name).unwrap();
            let chart = ActionChart::build(&p, 200).unwrap();
            let tau = SampledFunction::new(chart.i1.clone(), chart.tau_e.clone()).unwrap();
            let even = recover_even_part(&tau).unwrap();
            let err = even.max_abs_diff(exact);
            assert!(err < 1e-6, "{name}: {err}");
        }
    }

    #[test]
    fn rebuild_from_exact_branches() {
        let p = preset("asym").unwrap();
        let x: Vec<f64> = v_grid(V_MAX, 400).into_iter().skip(1).map(|v| 1.0 + v).collect();
        let (mut pp, mut qq) = (Vec::new(), Vec::new());
        for &xv in &x {
            let (s1, s2) = true_slopes(p.besse(), xv);
            pp.push(s1.max(s2));
            qq.push(s1.min(s2));
        }
        let b = BranchData {
            j: pp.iter().zip(&qq).map(|(a, b)| 1.0 / a + 1.0 / b).collect(),
            k: pp.iter().zip(&qq).map(|(a, b)| a + b).collect(),
            x,
            p: pp,
            q: qq,
        };
        let r = rebuild_profile(&b).unwrap();
        let d = crate::profile::isometry_distance(&p, &r);
        assert!(d < 1e-6, "{d}");
        assert!((r.length() - p.length()).abs() < 1e-6);
    }
}
