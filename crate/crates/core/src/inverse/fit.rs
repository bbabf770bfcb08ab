//! Normal form from a labelled joint spectrum, by regression along lattice rays.
//!
//! The lattice points `(n, m + 1/2)` on the ray through a primitive point
//! `(n₀, m₀ + 1/2)` are its odd multiples `j`, and along the ray
//! `√λ ≈ j h₁ + h₋₁/j + c/j³` by homogeneity.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numerics::cheb::lstsq;
use crate::numerics::Chebyshev;
use crate::quantization::{JointSpectrum, NormalForm};

/// Rays whose rms residual exceeds this multiple of the median are dropped.
pub const NOISE_FACTOR: f64 = 10.0;
pub const MIN_DISTINCT_N: usize = 3;
pub const MIN_DEPTH: i64 = 30;
const MAX_DEGREE: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub n0: i64,
    pub m0: i64,
    /// Number of lattice points used.
    pub points: usize,
    pub nu: f64,
    pub f: f64,
    pub hm1: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct NormalFormFit {
    pub normal_form: NormalForm,
    pub rays: Vec<RaySample>,
    pub rejected: usize,
    /// Largest rms regression residual among the rays kept.
    pub max_residual: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn fit_normal_form(spec: &JointSpectrum) -> Result<NormalFormFit> {
    let table: HashMap<(i64, i64), f64> = spec
        .entries
        .iter()
        .map(|e| ((e.n, e.m), e.lambda.max(0.0).sqrt()))
        .collect();
    let mut ns: Vec<i64> = spec.entries.iter().map(|e| e.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let depth = spec.entries.iter().map(|e| e.m).max().unwrap_or(0);
    if ns.len() < MIN_DISTINCT_N || depth < MIN_DEPTH {
        return Err(Error::input(format!(
            "spectrum too shallow for ray fits: {} distinct n (need {MIN_DISTINCT_N}), m up to {depth} (need {MIN_DEPTH})",
            ns.len()
        )));
    }
    let mut keys: Vec<(i64, i64)> = table.keys().copied().collect();
    keys.sort_unstable();
    let mut rays = Vec::new();
    for (n0, m0) in keys {
        if gcd(n0, 2 * m0 + 1) != 1 {
            continue;
        }
        let mut js = Vec::new();
        let mut ys = Vec::new();
        let mut j = 1i64;
        while let Some(&y) = table.get(&(j * n0, j * m0 + (j - 1) / 2)) {
            js.push(j as f64);
            ys.push(y);
            j += 2;
        }
        if js.len() < 2 {
            continue;
        }
        let ncols = if js.len() >= 4 { 3 } else { 2 };
        let c = lstsq(&js, &ys, ncols, |j| {
            [j, 1.0 / j, j.powi(-3)][..ncols].to_vec()
        })?;
        let rms = (js
            .iter()
            .zip(&ys)
            .map(|(&j, &y)| {
                let model = c[0] * j + c[1] / j + c.get(2).map_or(0.0, |c3| c3 / j.powi(3));
                (y - model).powi(2)
            })
            .sum::<f64>()
            / js.len() as f64)
            .sqrt();
        let h1 = c[0];
        if !(h1 > 0.0) {
            continue;
        }
        rays.push(RaySample {
            n0,
            m0,
            points: js.len(),
            nu: n0 as f64 / h1,
            f: (m0 as f64 + 0.5) / h1,
            hm1: c[1] * h1,
            residual: rms,
        });
    }
    let mut res: Vec<f64> = rays.iter().map(|r| r.residual).collect();
    res.sort_by(f64::total_cmp);
    let median = res.get(res.len() / 2).copied().unwrap_or(0.0);
    let floor = NOISE_FACTOR * median + 1e-12;
    let before = rays.len();
    rays.retain(|r| r.residual <= floor && r.nu.abs() < 1.0);
    let rejected = before - rays.len();
    if rays.len() < 8 {
        return Err(Error::input(format!(
            "only {} usable rays; raise the eigenvalue cutoff",
            rays.len()
        )));
    }
    let ys: Vec<f64> = rays.iter().map(|r| r.nu * r.nu).collect();
    let mut distinct = ys.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let degree = (distinct.len() / 3).clamp(1, MAX_DEGREE);
    let f: Vec<f64> = rays.iter().map(|r| r.f).collect();
    let g: Vec<f64> = rays.iter().map(|r| r.hm1).collect();
    let normal_form = NormalForm::from_series(
        Chebyshev::fit(&ys, &f, degree, 0.0, 1.0)?,
        Chebyshev::fit(&ys, &g, degree, 0.0, 1.0)?,
    );
    let max_residual = rays.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(NormalFormFit {
        normal_form,
        rays,
        rejected,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::preset;
    use crate::quantization::{spectrum, Provenance};

    #[test]
    fn recovers_generating_normal_form() {
        let p = preset("asym").unwrap();
        let truth = NormalForm::from_profile(&p).unwrap();
        let spec = spectrum(&p, 2500.0).unwrap();
        let fit = fit_normal_form(&spec).unwrap();
        assert!(fit.max_residual < 1e-10);
        for &nu in &[0.0, 0.2, 0.5, 0.8, 0.95] {
            let (a, _) = fit.normal_form.action(nu);
            let (b, _) = truth.action(nu);
            assert!((a - b).abs() < 1e-6, "F at {nu}: {a} vs {b}");
            let (ga, gb) = (fit.normal_form.level_hm1(nu), truth.level_hm1(nu));
            assert!((ga - gb).abs() < 1e-3, "g at {nu}: {ga} vs {gb}");
        }
    }

    #[test]
    fn row_order_is_irrelevant() {
        let p = preset("mirror").unwrap();
        let spec = spectrum(&p, 1600.0).unwrap();
        let mut rev = spec.entries.clone();
        rev.reverse();
        let shuffled = JointSpectrum::new(rev, Provenance::File);
        let a = fit_normal_form(&spec).unwrap().normal_form;
        let b = fit_normal_form(&shuffled).unwrap().normal_form;
        assert_eq!(a.f_series().coeffs(), b.f_series().coeffs());
        assert_eq!(a.g_series().coeffs(), b.g_series().coeffs());
    }

    #[test]
    fn shallow_spectrum_is_rejected() {
        let p = preset("asym").unwrap();
        let spec = spectrum(&p, 100.0).unwrap();
        assert!(fit_normal_form(&spec).unwrap_err().is_input_error());
    }
}
