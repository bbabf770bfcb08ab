//! Smoothed wave trace `Σ e^{it√λ} w(√λ/Λ)` and its singularities.
//!
//! The window is a Gaussian band around `Λ`, `w(x) = exp(−(x − 1)²/(2σ²))`,
//! so the trace is a sum of envelopes of width `≈ 1/(σΛ)` centred on the
//! lengths of closed geodesics.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{twist_at, LengthSpectrum, PeriodicTorus, TWIST_STEP};
use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::numerics::GaussLegendre;
use crate::profile::Profile;
use crate::quantization::{JointSpectrum, MASLOV};

/// The window is negligible (below `e^{-18}`) beyond this many widths.
const WINDOW_WIDTHS: f64 = 6.0;
/// Required spectral coverage in window widths above the centre.
const COVERAGE_WIDTHS: f64 = 4.0;
/// Time samples per envelope width `1/(σΛ)`.
const SAMPLES_PER_WIDTH: f64 = 50.0;

pub fn window(x: f64, sigma: f64) -> f64 {
    (-(x - 1.0).powi(2) / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSignal {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    pub sigma: f64,
    pub cutoff: f64,
}

impl TraceSignal {
    /// Value at `−t`, from time reversal.
    pub fn at_negative(&self, i: usize) -> Complex64 {
        self.values[i].conj()
    }

    /// Envelope width `1/(σΛ)`.
    pub fn resolution(&self) -> f64 {
        1.0 / (self.sigma * self.cutoff)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "re", "im", "abs"])?;
        for (t, v) in self.t.iter().zip(&self.values) {
            wr.write_record([fmt17(*t), fmt17(v.re), fmt17(v.im), fmt17(v.norm())])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Trace at a single time; entries are summed in spectrum order.
pub fn trace_at(spec: &JointSpectrum, cutoff: f64, sigma: f64, t: f64) -> Complex64 {
    let lo = cutoff * (1.0 - WINDOW_WIDTHS * sigma);
    let hi = cutoff * (1.0 + WINDOW_WIDTHS * sigma);
    let mut acc = Complex64::new(0.0, 0.0);
    for e in &spec.entries {
        let rho = e.lambda.max(0.0).sqrt();
        if rho < lo || rho > hi {
            continue;
        }
        acc += Complex64::from_polar(window(rho / cutoff, sigma), t * rho);
    }
    acc
}

/// Trace on `[0, tmax]`, sampled at 50 points per envelope width.
pub fn smoothed_trace(spec: &JointSpectrum, cutoff: f64, sigma: f64, tmax: f64) -> Result<TraceSignal> {
    if !(cutoff > 0.0 && sigma > 0.0 && sigma < 0.25 && tmax > 0.0) {
        return Err(Error::input("need Λ > 0, 0 < σ < 1/4 and tmax > 0"));
    }
    let need = (cutoff * (1.0 + COVERAGE_WIDTHS * sigma)).powi(2);
    let covered = spec
        .lambda_max
        .unwrap_or_else(|| spec.entries.iter().map(|e| e.lambda).fold(0.0, f64::max));
    if covered < need {
        return Err(Error::input(format!(
            "spectrum covers λ ≤ {covered:.6}, the window needs λ ≤ {need:.6}"
        )));
    }
    let dt = 1.0 / (sigma * cutoff * SAMPLES_PER_WIDTH);
    let n = (tmax / dt).ceil() as usize;
    let t: Vec<f64> = (0..=n).map(|k| tmax * k as f64 / n as f64).collect();
    let values = t.par_iter().map(|&s| trace_at(spec, cutoff, sigma, s)).collect();
    Ok(TraceSignal {
        t,
        values,
        sigma,
        cutoff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    /// `|trace|` at the refined maximum.
    pub height: f64,
}

/// Local maxima of `|trace|` above `threshold · median|trace|`, refined by a parabola
/// through three samples. The central lobe `t < 4/(σΛ)` is skipped.
pub fn detect_singularities(sig: &TraceSignal, threshold: f64) -> Vec<Peak> {
    let abs: Vec<f64> = sig.values.iter().map(|v| v.norm()).collect();
    if abs.len() < 3 {
        return Vec::new();
    }
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let floor = threshold * median;
    let skip = 4.0 * sig.resolution();
    let mut peaks = Vec::new();
    for i in 1..abs.len() - 1 {
        let (a, b, c) = (abs[i - 1], abs[i], abs[i + 1]);
        if sig.t[i] < skip || !(b > a && b >= c) || b <= floor {
            continue;
        }
        let den = a - 2.0 * b + c;
        let shift = if den < 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        let h = sig.t[i + 1] - sig.t[i];
        peaks.push(Peak {
            t: sig.t[i] + shift * h,
            height: b - 0.25 * (a - c) * shift,
        });
    }
    peaks
}

/// Principal wave invariant `c_L = (2π|α|L)^{-1/2} e^{∓iπ/4} e^{i⟨M, μ⟩}`, where the
/// sign of the quarter turn follows the sign of the twist `α`.
pub fn principal_invariant(p: &Profile, torus: &PeriodicTorus) -> Result<Complex64> {
    if torus.degenerate {
        return Err(Error::input("the equator is a degenerate torus (α undefined)"));
    }
    let alpha = twist_at(p, torus.i1, torus.winding, TWIST_STEP)?;
    if alpha.abs() < crate::profile::TWIST_FLOOR {
        return Err(Error::numeric(format!("twist α = {alpha:.3e} vanishes at this torus")));
    }
    let phase = -alpha.signum() * PI / 4.0
        + torus.winding.0 as f64 * MASLOV[0]
        + torus.winding.1 as f64 * MASLOV[1];
    let modulus = (2.0 * PI * alpha.abs() * torus.length).powf(-0.5);
    Ok(Complex64::from_polar(modulus, phase))
}

/// `K(s) = ∫ ρ^{1/2} w(ρ/Λ) e^{iρs} dρ`, the smoothed `(s + i0)^{-3/2}` profile.
pub fn model_kernel(cutoff: f64, sigma: f64, s: f64) -> Complex64 {
    let gl = GaussLegendre::new(96);
    let lo = cutoff * (1.0 - WINDOW_WIDTHS * sigma);
    let hi = cutoff * (1.0 + WINDOW_WIDTHS * sigma);
    let re = gl.integrate(|r| r.sqrt() * window(r / cutoff, sigma) * (r * s).cos(), lo, hi);
    let im = gl.integrate(|r| r.sqrt() * window(r / cutoff, sigma) * (r * s).sin(), lo, hi);
    Complex64::new(re, im)
}

/// Least-squares complex amplitude `A` of `A·K(t − L)` over `|t − L| ≤ 2/(σΛ)`.
pub fn fit_amplitude(sig: &TraceSignal, length: f64) -> Result<Complex64> {
    let half = 2.0 * sig.resolution();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (t, v) in sig.t.iter().zip(&sig.values) {
        if (t - length).abs() > half {
            continue;
        }
        let k = model_kernel(sig.cutoff, sig.sigma, t - length);
        num += k.conj() * v;
        den += k.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::input(format!("length {length} lies outside the trace window")));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityRecord {
    pub t: f64,
    pub amplitude: f64,
    pub matched_length: Option<f64>,
    pub winding: Option<(i64, i64)>,
}

/// Matches each peak with the nearest torus length within `tol`.
pub fn singularity_report(
    peaks: &[Peak],
    lengths: &LengthSpectrum,
    tol: f64,
) -> Vec<SingularityRecord> {
    peaks
        .iter()
        .map(|pk| {
            let best = lengths
                .tori()
                .iter()
                .min_by(|a, b| (a.length - pk.t).abs().total_cmp(&(b.length - pk.t).abs()))
                .filter(|tor| (tor.length - pk.t).abs() <= tol);
            SingularityRecord {
                t: pk.t,
                amplitude: pk.height,
                matched_length: best.map(|t| t.length),
                winding: best.map(|t| t.winding),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::{Provenance, SpectrumEntry};

    fn single(lambda: f64) -> JointSpectrum {
        let mut s = JointSpectrum::new(vec![SpectrumEntry { n: 0, m: 0, lambda }], Provenance::File);
        s.lambda_max = Some(1e6);
        s
    }

    #[test]
    fn single_entry_is_a_pure_phase() {
        let s = single(1.0);
        let sig = smoothed_trace(&s, 1.05, 0.2, 3.0).unwrap();
        let w = window(1.0 / 1.05, 0.2);
        for (t, v) in sig.t.iter().zip(&sig.values) {
            assert!((v - Complex64::from_polar(w, *t)).norm() < 1e-14);
        }
    }

    #[test]
    fn coverage_is_enforced() {
        let mut s = single(1.0);
        s.lambda_max = Some(100.0);
        let err = smoothed_trace(&s, 40.0, 0.05, 1.0).unwrap_err();
        assert!(err.to_string().contains("2304"));
    }

    #[test]
    fn flat_signal_has_no_peaks() {
        let sig = TraceSignal {
            t: (0..500).map(|k| k as f64 * 0.01).collect(),
            values: vec![Complex64::new(1.0, 0.0); 500],
            sigma: 0.05,
            cutoff: 40.0,
        };
        assert!(detect_singularities(&sig, 3.0).is_empty());
    }

    #[test]
    fn kernel_matches_direct_sum_scale() {
        // A dense uniform spectrum ρ_j = jδ, weighted by ρ^{1/2}, reproduces K/δ.
        let (cutoff, sigma, s) = (30.0, 0.05, 0.3);
        let delta = 1e-3;
        let mut direct = Complex64::new(0.0, 0.0);
        let mut rho: f64 = cutoff * 0.5;
        while rho < cutoff * 1.5 {
            direct += Complex64::from_polar(rho.sqrt() * window(rho / cutoff, sigma), rho * s);
            rho += delta;
        }
        let k = model_kernel(cutoff, sigma, s);
        assert!((direct * delta - k).norm() < 1e-6 * k.norm().max(1.0));
    }
}
