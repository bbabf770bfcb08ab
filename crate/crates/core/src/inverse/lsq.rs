//! Parametric fallback: Levenberg–Marquardt fit of polynomial Besse coefficients.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::actions::besse_action;
use crate::error::{Error, Result};
use crate::numerics::Chebyshev;
use crate::profile::BesseForm;
use crate::quantization::{subprincipal, NormalForm};

pub const MAX_FAMILY_DIM: usize = 12;
const MAX_ITER: usize = 200;
const JAC_STEP: f64 = 1e-6;

/// Normal-form samples to be matched, on a fixed `ν` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FitTarget {
    pub nu: Vec<f64>,
    pub f: Vec<f64>,
    /// `H₋₁` on `H₁ = 1`; `None` fits the actions alone.
    pub hm1: Option<Vec<f64>>,
}

impl FitTarget {
    /// Samples `nf` at `count` Chebyshev points of `ν ∈ (0, 1)`.
    pub fn from_normal_form(nf: &NormalForm, count: usize, with_hm1: bool) -> Self {
        let mut nu = Chebyshev::nodes(count, 0.0, 1.0);
        nu.reverse();
        let f = nu.iter().map(|&v| nf.action(v).0).collect();
        let hm1 = with_hm1.then(|| nu.iter().map(|&v| nf.level_hm1(v)).collect());
        Self { nu, f, hm1 }
    }

    fn residuals(&self, q: &[f64]) -> Option<DVector<f64>> {
        let besse = BesseForm::polynomial(q.to_vec(), "fit");
        if besse.min_f() <= 0.0 {
            return None;
        }
        let mut out = Vec::with_capacity(self.nu.len() * 2);
        for (&nu, &f) in self.nu.iter().zip(&self.f) {
            out.push(besse_action(&besse, nu).ok()?.0 - f);
        }
        if let Some(h) = &self.hm1 {
            for (&nu, &g) in self.nu.iter().zip(h) {
                out.push(subprincipal(&besse, nu).ok()? - g);
            }
        }
        Some(DVector::from_vec(out))
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    /// Monomial coefficients of `q`, with `f = 1 + (1 − x²) q`.
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Singular values of the Jacobian at the solution, descending.
    pub singular_values: Vec<f64>,
    /// Largest over smallest singular value (infinite when one vanishes).
    pub flatness_ratio: f64,
    /// Right singular vector of the smallest singular value.
    pub flat_direction: Vec<f64>,
    /// `s² (JᵀJ)⁺`, a proxy for the parameter covariance.
    pub covariance: Vec<Vec<f64>>,
}

impl FitOutcome {
    pub fn besse(&self) -> BesseForm {
        BesseForm::polynomial(self.params.clone(), "fit")
    }
}

fn jacobian(target: &FitTarget, q: &[f64], m: usize) -> Result<DMatrix<f64>> {
    let cols: Vec<DVector<f64>> = (0..q.len())
        .into_par_iter()
        .map(|k| {
            let mut hi = q.to_vec();
            let mut lo = q.to_vec();
            hi[k] += JAC_STEP;
            lo[k] -= JAC_STEP;
            match (target.residuals(&hi), target.residuals(&lo)) {
                (Some(a), Some(b)) => Ok((a - b) / (2.0 * JAC_STEP)),
                _ => Err(Error::numeric("Jacobian probe left the admissible family")),
            }
        })
        .collect::<Result<_>>()?;
    let mut j = DMatrix::zeros(m, q.len());
    for (k, c) in cols.iter().enumerate() {
        j.set_column(k, c);
    }
    Ok(j)
}

/// Least-squares fit of a degree `dim − 1` polynomial `q` to the target, started at the sphere.
pub fn reconstruct_fit(target: &FitTarget, dim: usize) -> Result<FitOutcome> {
    if dim == 0 || dim > MAX_FAMILY_DIM {
        return Err(Error::input(format!("family dimension must be 1..={MAX_FAMILY_DIM}")));
    }
    let mut q = vec![0.0; dim];
    let mut r = target
        .residuals(&q)
        .ok_or_else(|| Error::numeric("the sphere is not admissible"))?;
    let m = r.len();
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let j = jacobian(target, &q, m)?;
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let scale = jtj.diagonal().max().max(1e-300);
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for k in 0..dim {
                a[(k, k)] += lambda * scale;
            }
            let step = a
                .svd(true, true)
                .solve(&(-&grad), 1e-15 * scale)
                .map_err(|e| Error::numeric(format!("LM step failed: {e}")))?;
            let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if let Some(rt) = target.residuals(&trial) {
                let ct = rt.norm_squared();
                if ct <= cost {
                    let small = step.amax() < 1e-13 * (1.0 + q.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                    let flat = cost - ct <= 1e-15 * cost.max(1e-300);
                    q = trial;
                    r = rt;
                    cost = ct;
                    lambda = (lambda / 3.0).max(1e-15);
                    accepted = true;
                    converged = small || flat || cost < 1e-28;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left: a local minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::numeric(format!(
            "fit did not converge in {MAX_ITER} iterations; best iterate {q:?}, residual {:.3e}",
            cost.sqrt()
        )));
    }
    let j = jacobian(target, &q, m)?;
    let svd = j.clone().svd(false, true);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let last = *order.last().unwrap();
    let flat_direction = v_t.row(last).iter().copied().collect();
    let smax = singular_values[0];
    let smin = *singular_values.last().unwrap();
    let flatness_ratio = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let dof = (m as f64 - dim as f64).max(1.0);
    let s2 = cost / dof;
    let jtj = j.transpose() * &j;
    let pinv = jtj
        .pseudo_inverse(1e-12 * smax * smax)
        .map_err(|e| Error::numeric(format!("covariance: {e}")))?;
    let covariance = (0..dim)
        .map(|a| (0..dim).map(|b| s2 * pinv[(a, b)]).collect())
        .collect();
    Ok(FitOutcome {
        params: q,
        residual_norm: cost.sqrt(),
        iterations,
        singular_values,
        flatness_ratio,
        flat_direction,
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::preset;

    #[test]
    fn recovers_asym_cubic() {
        let p = preset("asym").unwrap();
        let nf = NormalForm::from_profile(&p).unwrap();
        let t = FitTarget::from_normal_form(&nf, 24, true);
        let fit = reconstruct_fit(&t, 4).unwrap();
        let want = [0.7, 0.2, 0.0, 0.0];
        for (a, b) in fit.params.iter().zip(want) {
            assert!((a - b).abs() < 1e-3, "{:?}", fit.params);
        }
    }

    #[test]
    fn sphere_fit_is_trivial() {
        let p = preset("sphere").unwrap();
        let nf = NormalForm::from_profile(&p).unwrap();
        let t = FitTarget::from_normal_form(&nf, 24, true);
        let fit = reconstruct_fit(&t, 4).unwrap();
        assert!(fit.params.iter().all(|c| c.abs() < 1e-4), "{:?}", fit.params);
    }

    #[test]
    fn actions_alone_leave_odd_part_free() {
        let p = preset("asym").unwrap();
        let nf = NormalForm::from_profile(&p).unwrap();
        let t = FitTarget::from_normal_form(&nf, 24, false);
        let fit = reconstruct_fit(&t, 4).unwrap();
        assert!((fit.params[0] - 0.7).abs() < 1e-3 && fit.params[2].abs() < 1e-3);
        assert!(fit.flatness_ratio >= 100.0);
        let odd = fit.flat_direction[1].powi(2) + fit.flat_direction[3].powi(2);
        assert!(odd > 0.99, "{:?}", fit.flat_direction);
    }
}
