//! Subprincipal coefficient `g(ν) = H₋₁` on the level set `H₁ = 1`.
//!
//! With `Ê = 1/ν²` and `K(x) = |a'(r−)| + |a'(r+)|` at `a = x^{-1/2}`, let
//! `M_k(Ê) = ∫₁^Ê K(x) x^{k−3/2} (Ê − x)^{-1/2} dx`. Then
//!
//! ```text
//! g(ν) = [ M₃''/3 − M₂' + M₁/4 ] / (4 ν T(ν)),     T = π (F − ν F')
//! ```
//!
//! The moments are evaluated in the chart `x = 1 + σ²`, `σ = S sin φ`,
//! `S = √(Ê − 1)`, where `M = 2 S Q(S)` with `Q` a smooth integral over φ. The
//! `Ê`-derivatives become `S`-derivatives and are carried exactly by jets.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::actions::besse_half_return;
use crate::error::{Error, Result};
use crate::numerics::{GaussLegendre, Jet};
use crate::profile::BesseForm;

const PANEL_NODES: usize = 16;

/// The three constants of the operator `C₁ M₃'' + C₂ M₂' + C₃ M₁`.
pub const RADIAL_CONSTANTS: [f64; 3] = [1.0 / 3.0, -1.0, 0.25];

/// `K̂(σ) = w/f(w) + w/f(−w)` with `w = σ/√(1 + σ²)`, the sum of the two branch
/// slopes at radius `a = 1/√(1 + σ²)`.
pub fn branch_slope_sum(besse: &BesseForm, sigma: Jet) -> Jet {
    let w = sigma / (sigma * sigma + 1.0).sqrt();
    w / besse.f_jet(w) + w / besse.f_jet(-w)
}

/// `Q_k(S) = ∫₀^{π/2} K̂(σ)(1 + σ²)^{k−3/2} sin φ dφ` as a jet in `S`.
fn q_moments(besse: &BesseForm, s: f64, gl: &GaussLegendre) -> [Jet; 3] {
    let mut breaks = vec![0.0];
    let mut b = 0.25;
    while b < s {
        breaks.push((b / s).asin());
        b *= 2.0;
    }
    breaks.push(FRAC_PI_2);
    let mut acc = [Jet::constant(0.0); 3];
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
            let phi = c + h * x;
            let sp = phi.sin();
            let sigma = Jet::new(s * sp, sp, 0.0);
            let khat = branch_slope_sum(besse, sigma);
            let one = sigma * sigma + 1.0;
            let base = khat * (wt * h * sp);
            let inv_sqrt = one.powf(-0.5);
            acc[0] = acc[0] + base * inv_sqrt;
            acc[1] = acc[1] + base * inv_sqrt * one;
            acc[2] = acc[2] + base * inv_sqrt * one * one;
        }
    }
    acc
}

/// `g(ν)` for `0 < ν < 1`.
pub fn subprincipal(besse: &BesseForm, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::input(format!("subprincipal coefficient needs 0 < ν < 1, got {nu}")));
    }
    let gl = GaussLegendre::new(PANEL_NODES);
    let e = 1.0 / (nu * nu);
    let s = (e - 1.0).sqrt();
    let [q1, q2, q3] = q_moments(besse, s, &gl);
    let m1 = 2.0 * s * q1.v;
    let m2p = q2.v / s + q2.d1;
    let m3pp = (q3.d1 / s - q3.v / (s * s) + q3.d2) / (2.0 * s);
    let [c1, c2, c3] = RADIAL_CONSTANTS;
    let t = besse_half_return(besse, nu)?;
    if !(t > 0.0) {
        return Err(Error::numeric("non-positive return time"));
    }
    Ok((c1 * m3pp + c2 * m2p + c3 * m1) / (4.0 * nu * t))
}

/// `g(0)`, the meridian value, from a direct integral over the meridian.
pub fn subprincipal_meridian(besse: &BesseForm, length: f64) -> f64 {
    let gl = GaussLegendre::new(128);
    let integral = gl.integrate(
        |u| {
            let c = u.cos();
            let [f, f1, _] = besse.f3(c);
            let q = besse.q(c);
            -0.5 / f + c * f1 / (2.0 * f * f) + (1.0 + q) / (4.0 * f)
        },
        0.0,
        PI,
    );
    integral / (2.0 * length)
}
