//! Semiclassical joint spectrum of the Laplacian on a surface of revolution.
//!
//! The spectrum of `√Δ` is `Ĥ(n, m + 1/2)` over the lattice `m ≥ |n|`, with
//! `Ĥ = H₁ + H₋₁ + O(m⁻²)`. `H₁` is the homogeneous extension of the action
//! curve `I₂ = F(I₁)`; `H₋₁` is stored on the level set `H₁ = 1` and extended
//! with degree −1.

mod radial;
mod wkb;

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use radial::{branch_slope_sum, subprincipal, subprincipal_meridian, RADIAL_CONSTANTS};
pub use wkb::{bohr_sommerfeld_1d, wkb_correction_1d};

use crate::actions::{besse_action, solve_homogeneous};
use crate::error::{Error, Result};
use crate::numerics::{Chebyshev, SampledFunction};
use crate::profile::{BesseForm, Profile, ProfileCurve};

/// Maslov vector `μ`.
pub const MASLOV: [f64; 2] = [0.0, 0.5];

/// Chebyshev nodes in `y = ν²` used to build a normal form.
pub const NORMAL_FORM_NODES: usize = 64;

/// `H₁` and `H₋₁` as Chebyshev series in `y = ν² ∈ [0, 1]` on the level set `H₁ = 1`.
#[derive(Debug, Clone)]
pub struct NormalForm {
    f: Chebyshev,
    df: Chebyshev,
    g: Chebyshev,
}

impl NormalForm {
    pub fn from_profile(p: &Profile) -> Result<Self> {
        Self::from_besse(p.besse())
    }

    pub fn from_besse(besse: &BesseForm) -> Result<Self> {
        Self::from_besse_with(besse, NORMAL_FORM_NODES)
    }

    pub fn from_besse_with(besse: &BesseForm, nodes: usize) -> Result<Self> {
        let ys = Chebyshev::nodes(nodes, 0.0, 1.0);
        let rows: Vec<(f64, f64)> = ys
            .par_iter()
            .map(|&y| {
                let nu = y.sqrt();
                Ok((besse_action(besse, nu)?.0, subprincipal(besse, nu)?))
            })
            .collect::<Result<_>>()?;
        let fv: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let gv: Vec<f64> = rows.iter().map(|r| r.1).collect();
        Ok(Self::from_series(
            Chebyshev::from_node_values(&fv, 0.0, 1.0),
            Chebyshev::from_node_values(&gv, 0.0, 1.0),
        ))
    }

    /// Normal form from series for `F` and `g` in `y = ν²` on `[0, 1]`.
    pub fn from_series(f: Chebyshev, g: Chebyshev) -> Self {
        let df = f.derivative();
        Self { f, df, g }
    }

    /// `F(ν)` and `F'(ν)`.
    pub fn action(&self, nu: f64) -> (f64, f64) {
        let y = (nu * nu).min(1.0);
        (self.f.eval(y), 2.0 * nu * self.df.eval(y))
    }

    /// `H₋₁` on the level set `H₁ = 1` at `I₁ = ν`.
    pub fn level_hm1(&self, nu: f64) -> f64 {
        self.g.eval((nu * nu).min(1.0))
    }

    pub fn f_series(&self) -> &Chebyshev {
        &self.f
    }

    pub fn g_series(&self) -> &Chebyshev {
        &self.g
    }

    pub fn h1(&self, i1: f64, i2: f64) -> Result<f64> {
        solve_homogeneous(|nu| self.action(nu.clamp(-1.0, 1.0)), i1, i2)
    }

    pub fn hm1(&self, i1: f64, i2: f64) -> Result<f64> {
        let t = self.h1(i1, i2)?;
        Ok(self.level_hm1(i1 / t) / t)
    }

    /// `H₀`, identically zero.
    pub fn h0(&self, _i1: f64, _i2: f64) -> f64 {
        0.0
    }

    pub fn mu(&self) -> [f64; 2] {
        MASLOV
    }

    /// `(H₁, H₋₁)` at the lattice point `(n, m + 1/2)`.
    pub fn lattice(&self, n: i64, m: i64) -> Result<(f64, f64)> {
        check_lattice(n, m)?;
        let (i1, i2) = (n as f64, m as f64 + MASLOV[1]);
        let t = self.h1(i1, i2)?;
        Ok((t, self.level_hm1(i1 / t) / t))
    }

    pub fn to_json(&self) -> NormalFormJson {
        let ys = Chebyshev::nodes(self.f.coeffs().len(), 0.0, 1.0);
        let mut nu: Vec<f64> = ys.iter().map(|y| y.sqrt()).collect();
        nu.reverse();
        NormalFormJson {
            f: nu.iter().map(|&v| self.action(v).0).collect(),
            hm1: nu.iter().map(|&v| self.level_hm1(v)).collect(),
            nu,
            mu: MASLOV,
        }
    }

    pub fn from_json(j: &NormalFormJson) -> Result<Self> {
        let n = j.nu.len();
        if n < 2 || j.f.len() != n || j.hm1.len() != n {
            return Err(Error::input("normal form grids must be equally long with ≥ 2 points"));
        }
        if j.mu != MASLOV {
            return Err(Error::input(format!("unsupported Maslov vector {:?}", j.mu)));
        }
        let ys: Vec<f64> = j.nu.iter().map(|v| v * v).collect();
        let deg = n - 1;
        Ok(Self::from_series(
            Chebyshev::fit(&ys, &j.f, deg, 0.0, 1.0)?,
            Chebyshev::fit(&ys, &j.hm1, deg, 0.0, 1.0)?,
        ))
    }
}

/// Serialized normal form: `F` and `H₋₁` sampled on `ν ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub nu: Vec<f64>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "Hm1")]
    pub hm1: Vec<f64>,
    pub mu: [f64; 2],
}

fn check_lattice(n: i64, m: i64) -> Result<()> {
    if m < n.abs() {
        return Err(Error::input(format!("lattice point (n={n}, m={m}) needs m ≥ |n|")));
    }
    Ok(())
}

/// Half-density radial potential `W = a''/(2a) − a'²/(4a²)` at an interior radius.
pub fn effective_potential_at(p: &dyn ProfileCurve, r: f64) -> Result<f64> {
    let l = p.length();
    if !(r > 0.0 && r < l) {
        return Err(Error::input(format!("W is singular at the poles; r = {r} not in (0, {l})")));
    }
    let [a, a1, a2] = p.eval(r);
    Ok(a2 / (2.0 * a) - a1 * a1 / (4.0 * a * a))
}

/// `W` sampled on `nodes` interior Chebyshev points of `(0, L)`.
pub fn effective_potential(p: &dyn ProfileCurve, nodes: usize) -> Result<SampledFunction> {
    let mut r = Chebyshev::nodes(nodes.max(2), 0.0, p.length());
    r.reverse();
    let w = r
        .iter()
        .map(|&x| effective_potential_at(p, x))
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(r, w)
}

/// `H₁(n, m + 1/2)`, the Bohr–Sommerfeld value of `√λ`.
pub fn bs_sqrt_eigenvalue(nf: &NormalForm, n: i64, m: i64) -> Result<f64> {
    Ok(nf.lattice(n, m)?.0)
}

/// `H₋₁(n, m + 1/2)`.
///
/// The profile must be the one `nf` was built from; it is only used to check
/// that the point lies in the classically allowed range.
pub fn correction_hm1(p: &Profile, nf: &NormalForm, n: i64, m: i64) -> Result<f64> {
    let (t, hm1) = nf.lattice(n, m)?;
    if (n as f64 / t).abs() >= 1.0 || t * t < n as f64 * n as f64 / p.f0().powi(2) {
        return Err(Error::numeric(format!(
            "energy {} below the potential minimum for n = {n}",
            t * t
        )));
    }
    Ok(hm1)
}

/// Origin of spectral data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Semiclassical,
    Oracle,
    File,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Semiclassical => "semiclassical",
            Provenance::Oracle => "oracle",
            Provenance::File => "file",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "semiclassical" => Some(Self::Semiclassical),
            "oracle" => Some(Self::Oracle),
            "file" => Some(Self::File),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub n: i64,
    pub m: i64,
    pub lambda: f64,
}

/// Joint spectrum `{(n, m, λ)}`, ordered by `n` then `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub entries: Vec<SpectrumEntry>,
    pub provenance: Provenance,
    /// Cutoff used to generate the list, when known.
    pub lambda_max: Option<f64>,
}

impl JointSpectrum {
    pub fn new(mut entries: Vec<SpectrumEntry>, provenance: Provenance) -> Self {
        entries.sort_by(|a, b| (a.n, a.m).cmp(&(b.n, b.m)));
        Self {
            entries,
            provenance,
            lambda_max: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: i64, m: i64) -> Option<f64> {
        self.entries
            .binary_search_by(|e| (e.n, e.m).cmp(&(n, m)))
            .ok()
            .map(|i| self.entries[i].lambda)
    }

    /// Entries with angular index `n`, ascending in `m`.
    pub fn column(&self, n: i64) -> Vec<SpectrumEntry> {
        self.entries.iter().filter(|e| e.n == n).copied().collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "m", "lambda", "sqrt_lambda", "provenance"])?;
        for e in &self.entries {
            out.write_record([
                e.n.to_string(),
                e.m.to_string(),
                crate::io::fmt17(e.lambda),
                crate::io::fmt17(e.lambda.max(0.0).sqrt()),
                self.provenance.as_str().to_string(),
            ])
            .map_err(Error::from)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`JointSpectrum::write_csv`] (with or without a header).
    ///
    /// A column whose provenance tags all agree keeps that tag; otherwise it becomes `File`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut entries = Vec::new();
        let mut tags = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            if i == 0 && rec.get(0) == Some("n") {
                continue;
            }
            if rec.len() < 3 {
                return Err(Error::input(format!("spectrum row {}: expected n,m,lambda", i + 1)));
            }
            let parse_i = |k: usize| {
                rec[k]
                    .parse::<i64>()
                    .map_err(|e| Error::input(format!("spectrum row {}: {e}", i + 1)))
            };
            let (n, m) = (parse_i(0)?, parse_i(1)?);
            let lambda: f64 = rec[2]
                .parse()
                .map_err(|e| Error::input(format!("spectrum row {}: {e}", i + 1)))?;
            check_lattice(n, m)?;
            if !(lambda >= 0.0) {
                return Err(Error::input(format!("spectrum row {}: λ must be ≥ 0", i + 1)));
            }
            entries.push(SpectrumEntry { n, m, lambda });
            tags.push(rec.get(4).and_then(Provenance::parse));
        }
        let provenance = match tags.first() {
            Some(Some(t)) if tags.iter().all(|x| *x == Some(*t)) => *t,
            _ => Provenance::File,
        };
        let s = Self::new(entries, provenance);
        for w in s.entries.windows(2) {
            if w[0].n == w[1].n && w[0].m == w[1].m {
                return Err(Error::input(format!("duplicate entry (n={}, m={})", w[0].n, w[0].m)));
            }
        }
        Ok(s)
    }
}

/// All lattice points with `(H₁ + H₋₁)² ≤ lambda_max`, `λ = (H₁ + H₋₁)²`.
pub fn spectrum(p: &Profile, lambda_max: f64) -> Result<JointSpectrum> {
    spectrum_from(&NormalForm::from_profile(p)?, lambda_max)
}

pub fn spectrum_from(nf: &NormalForm, lambda_max: f64) -> Result<JointSpectrum> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(Error::input("lambda_max must be finite and ≥ 0"));
    }
    let cap = lambda_max.sqrt();
    // H₁(n, ·) ≥ |n| + 1/2, so |n| < √λmax + 1 bounds the angular range.
    let nmax = (cap + 1.0).ceil() as i64;
    let columns: Vec<Vec<SpectrumEntry>> = (-nmax..=nmax)
        .into_par_iter()
        .map(|n| {
            let mut col = Vec::new();
            let mut m = n.abs();
            loop {
                let (h1, hm1) = nf.lattice(n, m)?;
                let s = h1 + hm1;
                if s > cap && h1 > cap {
                    break;
                }
                if s * s <= lambda_max && s >= 0.0 {
                    col.push(SpectrumEntry { n, m, lambda: s * s });
                }
                m += 1;
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let mut s = JointSpectrum::new(columns.into_iter().flatten().collect(), Provenance::Semiclassical);
    s.lambda_max = Some(lambda_max);
    Ok(s)
}

/// Oracle joint spectrum: the lowest `count` Sturm–Liouville eigenvalues for each `n`.
pub fn oracle_spectrum(p: &Profile, ns: &[i64], count: usize) -> Result<JointSpectrum> {
    let cols: Vec<Vec<SpectrumEntry>> = ns
        .par_iter()
        .map(|&n| {
            let eigs = crate::oracle::sturm_liouville_eigs(p, n, count)?;
            Ok(eigs
                .into_iter()
                .enumerate()
                .map(|(k, lambda)| SpectrumEntry {
                    n,
                    m: n.abs() + k as i64,
                    lambda: lambda.max(0.0),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(JointSpectrum::new(cols.into_iter().flatten().collect(), Provenance::Oracle))
}
