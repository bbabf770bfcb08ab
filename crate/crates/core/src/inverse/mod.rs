//! Reconstruction of a profile from spectral data.
//!
//! Pipeline: labelled spectrum → normal form (ray fits) → `J` and `K`
//! (Abel inversion and a Volterra solve) → branch slopes → Besse form.

mod branches;
mod fit;
mod lsq;

use serde::{Deserialize, Serialize};

pub use branches::{
    combine_branches, rebuild_besse, rebuild_profile, recover_even_part, recover_j, recover_j_on,
    recover_k, recover_k_on, v_grid, BranchData, EQUATOR_BUFFER, GRID_NODES, K_REFINE,
    REBUILD_DEGREE, V_MAX,
};
pub use fit::{fit_normal_form, NormalFormFit, RaySample, MIN_DEPTH, MIN_DISTINCT_N, NOISE_FACTOR};
pub use lsq::{reconstruct_fit, FitOutcome, FitTarget, MAX_FAMILY_DIM};

use crate::error::Result;
use crate::io::{BesseJson, ProfileJson};
use crate::numerics::Chebyshev;
use crate::profile::{validate_simple, Profile};
use crate::quantization::{JointSpectrum, NormalForm};

/// Input to the reconstruction.
#[derive(Debug, Clone)]
pub enum SpectralData {
    Spectrum(JointSpectrum),
    NormalForm(NormalForm),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest rms residual of the ray regressions (0 for normal-form input).
    pub ray_fit: f64,
    /// `sup |F_rebuilt − F_data|` over `ν ∈ [0, 1)`.
    pub action: f64,
    /// `sup |H₋₁_rebuilt − H₋₁_data|` on `H₁ = 1`.
    pub subprincipal: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub profile: Profile,
    pub branches: BranchData,
    pub residuals: Residuals,
    pub flags: Vec<String>,
}

const RESIDUAL_SAMPLES: usize = 41;

fn compare(a: &NormalForm, b: &NormalForm) -> (f64, f64) {
    let mut da: f64 = 0.0;
    let mut dg: f64 = 0.0;
    for k in 0..RESIDUAL_SAMPLES {
        let nu = 0.98 * k as f64 / (RESIDUAL_SAMPLES - 1) as f64;
        da = da.max((a.action(nu).0 - b.action(nu).0).abs());
        dg = dg.max((a.level_hm1(nu) - b.level_hm1(nu)).abs());
    }
    (da, dg)
}

/// Runs the full pipeline.
pub fn reconstruct(data: &SpectralData) -> Result<ReconstructionResult> {
    let mut flags = Vec::new();
    let (nf, ray_fit) = match data {
        SpectralData::Spectrum(s) => {
            let fit = fit_normal_form(s)?;
            if fit.rejected > 0 {
                flags.push(format!("{} noisy rays rejected", fit.rejected));
            }
            (fit.normal_form, fit.max_residual)
        }
        SpectralData::NormalForm(nf) => (nf.clone(), 0.0),
    };
    let j = recover_j(&nf)?;
    let k = recover_k(&nf)?;
    let branches = combine_branches(&j, &k)?;
    let jk = branches.min_jk();
    if jk < 4.0 - 1e-3 {
        flags.push(format!("J·K dips to {jk:.6} below 4"));
    }
    let profile = rebuild_profile(&branches)?;
    let report = validate_simple(&profile);
    for c in &report.checks {
        if c.passed == Some(false) {
            flags.push(format!("{} failed: {}", c.name, c.detail));
        }
    }
    let (action, subprincipal) = compare(&NormalForm::from_profile(&profile)?, &nf);
    Ok(ReconstructionResult {
        profile,
        branches,
        residuals: Residuals {
            ray_fit,
            action,
            subprincipal,
        },
        flags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridsJson {
    pub x: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionJson {
    pub besse: BesseJson,
    /// Monomial coefficients of `f`, from a degree-`REBUILD_DEGREE + 2` fit of the series.
    pub f_coeffs: Vec<f64>,
    pub residuals: Residuals,
    pub grids: GridsJson,
    pub flags: Vec<String>,
}

impl ReconstructionResult {
    pub fn to_json(&self) -> ReconstructionJson {
        let besse = ProfileJson::from_profile(&self.profile)
            .besse
            .unwrap_or_default();
        let b = self.profile.besse();
        let f = Chebyshev::interpolate(|x| b.f(x), -1.0, 1.0, REBUILD_DEGREE + 3);
        ReconstructionJson {
            besse,
            f_coeffs: monomial(&f),
            residuals: self.residuals,
            grids: GridsJson {
                x: self.branches.x.clone(),
                j: self.branches.j.clone(),
                k: self.branches.k.clone(),
                p: self.branches.p.clone(),
                q: self.branches.q.clone(),
            },
            flags: self.flags.clone(),
        }
    }
}

/// Monomial coefficients of a Chebyshev series on [-1, 1].
fn monomial(c: &Chebyshev) -> Vec<f64> {
    let n = c.coeffs().len();
    let mut out = vec![0.0; n];
    let (mut prev, mut cur) = (vec![1.0], vec![0.0, 1.0]);
    for (k, &ck) in c.coeffs().iter().enumerate() {
        let t: &[f64] = if k == 0 { &prev } else { &cur };
        for (i, v) in t.iter().enumerate() {
            out[i] += ck * v;
        }
        if k >= 1 {
            let mut next = vec![0.0; cur.len() + 1];
            for (i, v) in cur.iter().enumerate() {
                next[i + 1] += 2.0 * v;
            }
            for (i, v) in prev.iter().enumerate() {
                next[i] -= v;
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }
    out
}
