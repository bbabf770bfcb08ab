//! Action variables of the geodesic flow and the data derived from them.
//!
//! With Clairaut integral `I₁ = i1`, `k = |i1|` and `b = √(1 − k²)`, all radial
//! integrals are taken in the Besse variable `x = cos u`, where the turning
//! points sit at `x = ±b`:
//!
//! ```text
//! F(i1)  = 1 + π⁻¹ ∫ √(b² − x²) q(x) dx
//! s(i)   = π + ∫ (1 − x²) q(x) / √(b² − x²) dx
//! θ(i)   = π + k ∫ q(x) / √(b² − x²) dx
//! ```
//!
//! Actions are normalized so that the meridian torus has `I₂ = L/π` and a periodic
//! torus with winding `M` has length `2π M·I`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{brent, singular_quad, Chebyshev, SingularPower};
use crate::profile::{BesseForm, Profile, ProfileCurve};

/// Gauss–Chebyshev nodes for the radial integrals.
const QUAD_NODES: usize = 256;
/// Half-width of the stencil used for twist coefficients.
pub const TWIST_STEP: f64 = 0.01;

fn check_i1(i1: f64) -> Result<f64> {
    if !i1.is_finite() || i1.abs() >= 1.0 {
        return Err(Error::input(format!(
            "Clairaut value {i1} outside (-1, 1): no annulus of oscillation"
        )));
    }
    Ok(i1.abs())
}

struct Radial {
    /// `∫ √(b² − x²) q dx`
    plus: f64,
    /// `∫ q / √(b² − x²) dx`
    minus: f64,
    /// `∫ (1 − x²) q / √(b² − x²) dx`
    weighted: f64,
}

fn radial(besse: &BesseForm, k: f64) -> Result<Radial> {
    let b = (1.0 - k * k).sqrt();
    if b == 0.0 {
        let q0 = besse.q(0.0);
        return Ok(Radial {
            plus: 0.0,
            minus: PI * q0,
            weighted: PI * q0,
        });
    }
    let plus = singular_quad(|x| besse.q(x), -b, b, SingularPower::PlusHalf, QUAD_NODES)?;
    let mut minus = 0.0;
    let mut weighted = 0.0;
    for j in 0..QUAD_NODES {
        let x = b * (PI * (j as f64 + 0.5) / QUAD_NODES as f64).cos();
        let q = besse.q(x);
        minus += q;
        weighted += (1.0 - x * x) * q;
    }
    let w = PI / QUAD_NODES as f64;
    Ok(Radial {
        plus,
        minus: minus * w,
        weighted: weighted * w,
    })
}

/// `F(ν)` and `F'(ν)` straight from a Besse form, for `0 ≤ ν < 1`.
pub(crate) fn besse_action(besse: &BesseForm, nu: f64) -> Result<(f64, f64)> {
    let k = check_i1(nu)?;
    let r = radial(besse, k)?;
    Ok((1.0 + r.plus / PI, -nu.signum() * k / PI * r.minus))
}

/// Half return time `s = π(F − νF')` straight from a Besse form.
pub(crate) fn besse_half_return(besse: &BesseForm, nu: f64) -> Result<f64> {
    let k = check_i1(nu)?;
    Ok(PI + radial(besse, k)?.weighted)
}

/// Radii `r± ` where `a(r±) = |i1|`; `(0, L)` for the meridian.
pub fn turning_points(p: &Profile, i1: f64) -> Result<(f64, f64)> {
    let k = check_i1(i1)?;
    let l = p.length();
    if k == 0.0 {
        return Ok((0.0, l));
    }
    let r0 = p.r0();
    let lo = brent(|r| p.a(r) - k, 0.0, r0, 1e-15)?;
    let hi = brent(|r| p.a(r) - k, r0, l, 1e-15)?;
    Ok((lo, hi))
}

/// `I₂ = F(I₁)` on the level set `H = 1`.
pub fn action_f(p: &Profile, i1: f64) -> Result<f64> {
    let k = check_i1(i1)?;
    Ok(1.0 + radial(p.besse(), k)?.plus / PI)
}

/// `F'(i1)`.
pub fn action_fp(p: &Profile, i1: f64) -> Result<f64> {
    let k = check_i1(i1)?;
    Ok(-i1.signum() * k / PI * radial(p.besse(), k)?.minus)
}

/// `F''(i1)`.
pub fn action_fpp(p: &Profile, i1: f64) -> Result<f64> {
    let k = check_i1(i1)?;
    let besse = p.besse();
    let b2 = 1.0 - k * k;
    let b = b2.sqrt();
    let j = radial(besse, k)?.minus;
    // d/dk of k·∫q/√(b²−x²) = ∫q/√ − (k²/b²) ∫ x q'(x)/√(b²−x²).
    let extra = if b == 0.0 {
        0.5 * PI * besse.q3(0.0)[2]
    } else {
        singular_quad(|x| x * besse.q3(x)[1], -b, b, SingularPower::MinusHalf, QUAD_NODES)? / b2
    };
    Ok(-(j - k * k * extra) / PI)
}

/// Arc data between two consecutive contacts with the extremal parallels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnData {
    pub s: f64,
    pub theta: f64,
    /// Equatorial first-return time `2s`.
    pub tau_e: f64,
    /// Equatorial first-return angle `2θ − 2π`.
    pub omega_e: f64,
}

pub fn return_data(p: &Profile, i1: f64) -> Result<ReturnData> {
    let k = check_i1(i1)?;
    let r = radial(p.besse(), k)?;
    let s = PI + r.weighted;
    let theta = PI + k * r.minus;
    Ok(ReturnData {
        s,
        theta,
        tau_e: 2.0 * s,
        omega_e: 2.0 * theta - 2.0 * PI,
    })
}

/// Frequency vector `(ω₁, ω₂)` on `H = 1`.
pub fn frequency(p: &Profile, i1: f64) -> Result<(f64, f64)> {
    let f = action_f(p, i1)?;
    let fp = action_fp(p, i1)?;
    frequency_from(i1, f, fp)
}

fn frequency_from(i1: f64, f: f64, fp: f64) -> Result<(f64, f64)> {
    let den = f - i1 * fp;
    if !(den.abs() > 1e-14) {
        return Err(Error::numeric(format!(
            "F − i1·F' vanishes at i1 = {i1}; frequency map undefined"
        )));
    }
    let w2 = 1.0 / den;
    Ok((-fp * w2, w2))
}

/// Solves `t F(I₁/t) = I₂` for `t = H(I₁, I₂)`, given `F` and `F'`.
///
/// `t ↦ t F(I₁/t)` is increasing with slope `F − νF' > 0`.
pub fn solve_homogeneous(fun: impl Fn(f64) -> (f64, f64), i1: f64, i2: f64) -> Result<f64> {
    if !(i2 > i1.abs()) {
        return Err(Error::input(format!(
            "({i1}, {i2}) lies outside the action cone I₂ > |I₁|"
        )));
    }
    let g = |t: f64| t * fun(i1 / t).0 - i2;
    let lo = i1.abs() * (1.0 + 1e-15);
    let mut hi = i2.max(lo * 2.0);
    let mut guard = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::numeric("homogeneous extension: no upper bracket"));
        }
    }
    let (mut a, mut b) = (lo, hi);
    let mut t = if g(lo) >= 0.0 { lo } else { 0.5 * (a + b) };
    if t == lo {
        return Ok(t);
    }
    for _ in 0..200 {
        let (f, fp) = fun(i1 / t);
        let val = t * f - i2;
        if val > 0.0 {
            b = t;
        } else {
            a = t;
        }
        let slope = f - (i1 / t) * fp;
        let mut next = t - val / slope;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if (next - t).abs() <= 1e-15 * t {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

/// `H(I₁, I₂)` for the profile, evaluated from the radial integrals.
pub fn hamiltonian(p: &Profile, i1: f64, i2: f64) -> Result<f64> {
    let fun = |nu: f64| {
        let nu = nu.clamp(-1.0 + 1e-16, 1.0 - 1e-16);
        (
            action_f(p, nu).unwrap_or(f64::NAN),
            action_fp(p, nu).unwrap_or(f64::NAN),
        )
    };
    solve_homogeneous(fun, i1, i2)
}

fn second_difference(h: impl Fn(f64) -> Result<f64>, delta: f64) -> Result<f64> {
    let v = [
        h(-2.0 * delta)?,
        h(-delta)?,
        h(0.0)?,
        h(delta)?,
        h(2.0 * delta)?,
    ];
    Ok((-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * delta * delta))
}

/// Twist coefficient `α = h''(0)` of `h(ξ) = H(ξ, L/π)` at the meridian torus.
pub fn twist_alpha(p: &Profile) -> Result<f64> {
    twist_alpha_with(p, TWIST_STEP)
}

pub fn twist_alpha_with(p: &Profile, delta: f64) -> Result<f64> {
    twist_at(p, 0.0, (0, 1), delta)
}

/// `h''(0)` for `h(ξ) = H(I° + ξ v)` with `I° = (i1, F(i1))` and `v = (1, −M₁/M₂)`.
pub fn twist_at(p: &Profile, i1: f64, winding: (i64, i64), delta: f64) -> Result<f64> {
    if winding.1 == 0 {
        return Err(Error::input("twist needs a winding with M₂ ≠ 0"));
    }
    let base = (i1, action_f(p, i1)?);
    let slope = -(winding.0 as f64) / winding.1 as f64;
    second_difference(
        |xi| hamiltonian(p, base.0 + xi, base.1 + xi * slope),
        delta,
    )
}

/// Sampled action data over an interior Chebyshev grid of `i1`.
#[derive(Debug, Clone)]
pub struct ActionChart {
    pub i1: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub tau_e: Vec<f64>,
    pub omega_e: Vec<f64>,
    pub omega1: Vec<f64>,
    pub omega2: Vec<f64>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ActionChart {
    pub fn build(p: &Profile, n: usize) -> Result<Self> {
        let mut i1 = Chebyshev::nodes(n, -1.0, 1.0);
        i1.reverse();
        let rows: Vec<[f64; 8]> = i1
            .par_iter()
            .map(|&x| -> Result<[f64; 8]> {
                let f = action_f(p, x)?;
                let fp = action_fp(p, x)?;
                let rd = return_data(p, x)?;
                let (w1, w2) = frequency_from(x, f, fp)?;
                Ok([f, fp, rd.tau_e, rd.omega_e, w1, w2, rd.s, rd.theta])
            })
            .collect::<Result<_>>()?;
        let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
        Ok(Self {
            f: col(0),
            fp: col(1),
            tau_e: col(2),
            omega_e: col(3),
            omega1: col(4),
            omega2: col(5),
            s: col(6),
            theta: col(7),
            i1,
        })
    }

    pub fn len(&self) -> usize {
        self.i1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i1.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i1", "F", "Fp", "tauE", "omegaE", "omega1", "omega2"])?;
        for j in 0..self.len() {
            let row = [
                self.i1[j],
                self.f[j],
                self.fp[j],
                self.tau_e[j],
                self.omega_e[j],
                self.omega1[j],
                self.omega2[j],
            ];
            wr.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// A periodic torus, one representative per time-reversal pair (`i1 ≥ 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTorus {
    pub i1: f64,
    pub winding: (i64, i64),
    pub length: f64,
    /// The equator: a limiting torus with no annulus of oscillation.
    pub degenerate: bool,
    /// Number of traversals of the primitive closed geodesic.
    pub iterate: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LengthSpectrum {
    /// Every torus is periodic with the same return angle (e.g. the round sphere).
    Degenerate { reason: String },
    Tori {
        tori: Vec<PeriodicTorus>,
        /// False when two distinct tori share a length.
        simple: bool,
    },
}

impl LengthSpectrum {
    pub fn tori(&self) -> &[PeriodicTorus] {
        match self {
            LengthSpectrum::Degenerate { .. } => &[],
            LengthSpectrum::Tori { tori, .. } => tori,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["M1", "M2", "i1", "length", "degenerate_flag"])?;
        for t in self.tori() {
            wr.write_record([
                t.winding.0.to_string(),
                t.winding.1.to_string(),
                format!("{:.16e}", t.i1),
                format!("{:.16e}", t.length),
                (t.degenerate as u8).to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Periodic tori with `q ≤ qmax` plus meridian and equator, sorted by length up to `lmax`.
pub fn length_spectrum(p: &Profile, qmax: u32, lmax: f64) -> Result<LengthSpectrum> {
    let samples = 400;
    let ks: Vec<f64> = (1..samples).map(|j| j as f64 / samples as f64).collect();
    let thetas: Vec<f64> = ks
        .iter()
        .map(|&k| return_data(p, k).map(|r| r.theta))
        .collect::<Result<_>>()?;
    let spread = thetas
        .iter()
        .map(|t| (t - PI).abs())
        .fold(0.0f64, f64::max);
    if spread < 1e-10 {
        return Ok(LengthSpectrum::Degenerate {
            reason: "return angle is constant: every torus is periodic".into(),
        });
    }
    let increasing = thetas[samples - 2] > thetas[0];
    let monotone = thetas
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
    if !monotone {
        return Err(Error::numeric(
            "return angle θ(i) is not monotone: the torus map is not an embedding (non-degeneracy fails)",
        ));
    }
    let f0 = p.f0();
    let (lo, hi) = if f0 > 1.0 { (1.0, f0) } else { (f0, 1.0) };
    let theta_of = |k: f64| -> f64 { return_data(p, k).map(|r| r.theta).unwrap_or(f64::NAN) };

    let mut prim = Vec::new();
    for q in 1..=qmax as i64 {
        let pmin = (lo * q as f64).floor() as i64;
        let pmax = (hi * q as f64).ceil() as i64;
        for pp in pmin..=pmax {
            let ratio = pp as f64 / q as f64;
            if ratio <= lo || ratio >= hi || gcd(pp, q) != 1 {
                continue;
            }
            let target = PI * ratio;
            let k = brent(|k| theta_of(k) - target, 0.0, 1.0 - 1e-15, 1e-15)?;
            let s = return_data(p, k)?.s;
            prim.push(PeriodicTorus {
                i1: k,
                winding: (pp - q, q),
                length: 2.0 * q as f64 * s,
                degenerate: false,
                iterate: 1,
            });
        }
    }
    prim.push(PeriodicTorus {
        i1: 0.0,
        winding: (0, 1),
        length: 2.0 * p.length(),
        degenerate: false,
        iterate: 1,
    });
    prim.push(PeriodicTorus {
        i1: 1.0,
        winding: (1, 0),
        length: 2.0 * PI,
        degenerate: true,
        iterate: 1,
    });

    let mut tori = Vec::new();
    for t in prim {
        let mut j = 1;
        while j as f64 * t.length <= lmax {
            tori.push(PeriodicTorus {
                winding: (t.winding.0 * j, t.winding.1 * j),
                length: t.length * j as f64,
                iterate: j as u32,
                ..t.clone()
            });
            j += 1;
        }
    }
    tori.sort_by(|a, b| a.length.total_cmp(&b.length));
    let simple = tori
        .windows(2)
        .all(|w| (w[1].length - w[0].length).abs() > 1e-8 * w[1].length);
    Ok(LengthSpectrum::Tori { tori, simple })
}

/// Compares equatorial return times and angles on a common `i1` grid.
pub fn flows_equivalent(p1: &Profile, p2: &Profile, tol: f64) -> Result<bool> {
    let grid = Chebyshev::nodes(64, -1.0, 1.0);
    for &x in &grid {
        let a = return_data(p1, x)?;
        let b = return_data(p2, x)?;
        if (a.tau_e - b.tau_e).abs() > tol || (a.omega_e - b.omega_e).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::preset;

    #[test]
    fn sphere_closed_forms() {
        let p = preset("sphere").unwrap();
        let (a, b) = turning_points(&p, 0.5).unwrap();
        assert!((a - PI / 6.0).abs() < 1e-12 && (b - 5.0 * PI / 6.0).abs() < 1e-12);
        for &i1 in &[-0.9, -0.3, 0.0, 0.5, 0.99] {
            assert!((action_f(&p, i1).unwrap() - 1.0).abs() < 1e-14);
            let r = return_data(&p, i1).unwrap();
            assert!((r.tau_e - 2.0 * PI).abs() < 1e-13);
            assert!(r.omega_e.abs() < 1e-13);
            let (w1, w2) = frequency(&p, i1).unwrap();
            assert!(w1.abs() < 1e-14 && (w2 - 1.0).abs() < 1e-14);
        }
        assert!(twist_alpha(&p).unwrap().abs() < 1e-9);
        assert!(matches!(
            length_spectrum(&p, 5, 20.0).unwrap(),
            LengthSpectrum::Degenerate { .. }
        ));
    }

    #[test]
    fn meridian_value_and_limits() {
        let p = preset("asym").unwrap();
        assert!((action_f(&p, 0.0).unwrap() - p.length() / PI).abs() < 1e-13);
        let near = return_data(&p, 1.0 - 1e-9).unwrap();
        assert!((near.tau_e - 2.0 * PI * p.f0()).abs() < 1e-6);
        let (a, b) = turning_points(&p, 1.0 - 1e-12).unwrap();
        assert!((a - p.r0()).abs() < 1e-4 && (b - p.r0()).abs() < 1e-4);
        assert!(turning_points(&p, 1.0).is_err());
    }

    #[test]
    fn asym_turning_points_residual() {
        let p = preset("asym").unwrap();
        let (a, b) = turning_points(&p, 0.3).unwrap();
        assert!((p.a(a) - 0.3).abs() <= 1e-12);
        assert!((p.a(b) - 0.3).abs() <= 1e-12);
        // Independent: a = sin u at u = asin(0.3) and π − asin(0.3).
        let u = 0.3f64.asin();
        assert!((a - p.r_of_u(u)).abs() < 1e-11);
        assert!((b - p.r_of_u(PI - u)).abs() < 1e-11);
    }

    #[test]
    fn action_matches_r_space_integral() {
        // Independent oracle: F = |i1| + π⁻¹ ∫ √(1 − i1²/a²) dr over [r−, r+],
        // midpoint rule in the variable r = r− + (r+ − r−)(1 − cos φ)/2.
        let p = preset("asym").unwrap();
        let i1: f64 = 0.3;
        let (lo, hi) = turning_points(&p, i1).unwrap();
        let n = 20_000;
        let mut acc = 0.0;
        for j in 0..n {
            let phi = PI * (j as f64 + 0.5) / n as f64;
            let r = lo + 0.5 * (hi - lo) * (1.0 - phi.cos());
            let dr = 0.5 * (hi - lo) * phi.sin() * PI / n as f64;
            acc += (1.0 - i1 * i1 / p.a(r).powi(2)).max(0.0).sqrt() * dr;
        }
        let brute = i1 + acc / PI;
        assert!((action_f(&p, i1).unwrap() - brute).abs() < 1e-7);
    }

    #[test]
    fn derivative_identities() {
        let p = preset("asym").unwrap();
        for &i1 in &[-0.6, 0.3, 0.8] {
            let e = 1e-5;
            let fd = (action_f(&p, i1 + e).unwrap() - action_f(&p, i1 - e).unwrap()) / (2.0 * e);
            let fp = action_fp(&p, i1).unwrap();
            assert!((fd - fp).abs() < 1e-9);
            let fdd = (action_fp(&p, i1 + e).unwrap() - action_fp(&p, i1 - e).unwrap()) / (2.0 * e);
            assert!((fdd - action_fpp(&p, i1).unwrap()).abs() < 1e-8);
            let r = return_data(&p, i1).unwrap();
            // ω_E is even in i1 while F' is odd.
            assert!((r.omega_e + 2.0 * PI * fp * i1.signum()).abs() < 1e-12);
            let (w1, w2) = frequency(&p, i1).unwrap();
            assert!((w1 * i1 + w2 * action_f(&p, i1).unwrap() - 1.0).abs() < 1e-14);
            assert!((w1 / w2 + fp).abs() < 1e-12);
        }
    }

    #[test]
    fn twist_matches_frequency_derivative() {
        for name in ["mirror", "asym", "spheroid(0.8)"] {
            let p = preset(name).unwrap();
            let alpha = twist_alpha(&p).unwrap();
            let closed = -action_fpp(&p, 0.0).unwrap() / action_f(&p, 0.0).unwrap();
            assert!((alpha - closed).abs() < 1e-7, "{name}: {alpha} vs {closed}");
            let e = 1e-4;
            let dw = (frequency(&p, e).unwrap().0 - frequency(&p, -e).unwrap().0) / (2.0 * e);
            assert!((alpha - dw).abs() < 1e-6);
        }
        let s = preset("spheroid(0.8)").unwrap();
        let a1 = twist_alpha_with(&s, 0.02).unwrap();
        let a2 = twist_alpha_with(&s, 0.01).unwrap();
        assert!(a1 != 0.0 && a1.signum() == a2.signum());
    }

    #[test]
    fn asym_length_spectrum() {
        let p = preset("asym").unwrap();
        let ls = length_spectrum(&p, 5, 60.0).unwrap();
        let tori = ls.tori();
        let meridian = tori.iter().find(|t| t.winding == (0, 1)).unwrap();
        assert!((meridian.length - 2.0 * p.length()).abs() < 1e-12);
        assert!(tori.iter().any(|t| t.degenerate && (t.length - 2.0 * PI).abs() < 1e-12));
        for t in tori.iter().filter(|t| !t.degenerate && t.iterate == 1 && t.i1 > 0.0) {
            let f = action_f(&p, t.i1).unwrap();
            let expect = 2.0 * PI * (t.winding.0 as f64 * t.i1 + t.winding.1 as f64 * f);
            assert!((expect - t.length).abs() < 1e-9);
        }
        assert!(tori.windows(2).all(|w| w[0].length <= w[1].length));
    }

    #[test]
    fn flows_depend_on_even_part() {
        let a = preset("asym").unwrap();
        let r = a.reflected().unwrap();
        assert!(flows_equivalent(&a, &a, 1e-12).unwrap());
        assert!(flows_equivalent(&a, &r, 1e-10).unwrap());
        let s = preset("sphere").unwrap();
        let e = preset("spheroid(0.8)").unwrap();
        assert!(!flows_equivalent(&s, &e, 1e-6).unwrap());
    }
}
