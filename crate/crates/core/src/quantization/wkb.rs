//! One-dimensional WKB for `H = p²/2 + V(x)` with Planck constant `h`.

use crate::error::{Error, Result};
use crate::numerics::{brent, golden_max, singular_quad, SingularPower};

const NODES: usize = 128;
/// Half-width of the window searched for the potential minimum.
const MIN_SEARCH: f64 = 16.0;

fn minimum(v: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    let (x, neg) = golden_max(|x| -v(x), -MIN_SEARCH, MIN_SEARCH, 1e-12);
    if !neg.is_finite() {
        return Err(Error::input("potential is not finite at its minimum"));
    }
    Ok((x, -neg))
}

/// Classical turning points of the well around `xmin` at energy `e`.
fn turning_points(v: &dyn Fn(f64) -> f64, xmin: f64, e: f64) -> Result<(f64, f64)> {
    let outward = |dir: f64| -> Result<f64> {
        let mut step = 0.5;
        for _ in 0..80 {
            let x = xmin + dir * step;
            if v(x) > e {
                let (a, b) = if dir < 0.0 { (x, xmin) } else { (xmin, x) };
                return brent(|y| v(y) - e, a, b, 1e-15);
            }
            step *= 2.0;
        }
        Err(Error::input(format!("no bound region at energy {e}")))
    };
    Ok((outward(-1.0)?, outward(1.0)?))
}

/// Phase-space area `A(E) = ∮ p dx = 2 ∫ √(2(E − V)) dx`.
fn area(v: &dyn Fn(f64) -> f64, xmin: f64, e: f64) -> Result<f64> {
    let (lo, hi) = turning_points(v, xmin, e)?;
    let g = |x: f64| (2.0 * (e - v(x)).max(0.0) / ((hi - x) * (x - lo))).sqrt();
    Ok(2.0 * singular_quad(g, lo, hi, SingularPower::PlusHalf, NODES)?)
}

/// `∫ w(x) (E − V)^{-1/2} dx` over the well.
fn inverse_root_moment(
    v: &dyn Fn(f64) -> f64,
    w: &dyn Fn(f64) -> f64,
    xmin: f64,
    e: f64,
) -> Result<f64> {
    let (lo, hi) = turning_points(v, xmin, e)?;
    let g = |x: f64| w(x) * ((hi - x) * (x - lo) / (e - v(x))).sqrt();
    singular_quad(g, lo, hi, SingularPower::MinusHalf, NODES)
}

/// Energy with `A(E) = 2πh(n + 1/2)`.
pub fn bohr_sommerfeld_1d(v: impl Fn(f64) -> f64, h: f64, n: u32) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::input("h must be positive"));
    }
    let v: &dyn Fn(f64) -> f64 = &v;
    let (xmin, vmin) = minimum(v)?;
    let target = 2.0 * std::f64::consts::PI * h * (n as f64 + 0.5);
    let scale = vmin.abs().max(1.0);
    let below = |e: f64| area(v, xmin, e).map(|a| a < target);
    let mut lo = vmin + scale * 1e-3;
    while !below(lo)? {
        lo = vmin + 0.5 * (lo - vmin);
        if lo - vmin < 1e-14 * scale {
            return Err(Error::numeric("level too close to the potential minimum"));
        }
    }
    let mut hi = vmin + 2.0 * (lo - vmin);
    let mut guard = 0;
    while below(hi)? {
        lo = hi;
        hi = vmin + 2.0 * (hi - vmin);
        guard += 1;
        if guard > 200 {
            return Err(Error::input("no bound state at the requested level"));
        }
    }
    brent(
        |e| area(v, xmin, e).unwrap_or(f64::NAN) - target,
        lo,
        hi,
        1e-15 * scale,
    )
}

/// Second-order coefficient `E⁽²⁾` with `E(h) = E⁽¹⁾ + h² E⁽²⁾ + O(h³)`.
///
/// `E⁽²⁾ = J''(E) / (12√2 T(E))` at `E = E⁽¹⁾`, with `J = ∫ V'² (E − V)^{-1/2}`
/// and `T = dA/dE = √2 ∫ (E − V)^{-1/2}`. `J''` is a central second difference
/// with steps `(E − V_min)/10, /20, /40`, extrapolated twice.
pub fn wkb_correction_1d(v: impl Fn(f64) -> f64, h: f64, n: u32) -> Result<f64> {
    let e = bohr_sommerfeld_1d(&v, h, n)?;
    let v: &dyn Fn(f64) -> f64 = &v;
    let (xmin, vmin) = minimum(v)?;
    let dv = |x: f64| {
        let d = 1e-4 * x.abs().max(1.0);
        (v(x - 2.0 * d) - 8.0 * v(x - d) + 8.0 * v(x + d) - v(x + 2.0 * d)) / (12.0 * d)
    };
    let dv2 = |x: f64| dv(x).powi(2);
    let one = |_: f64| 1.0;
    let j = |e: f64| inverse_root_moment(v, &dv2, xmin, e);
    let step = 0.1 * (e - vmin);
    let je = j(e)?;
    let second = |d: f64| -> Result<f64> { Ok((j(e + d)? - 2.0 * je + j(e - d)?) / (d * d)) };
    let (s1, s2, s4) = (second(step)?, second(0.5 * step)?, second(0.25 * step)?);
    let (r1, r2) = ((4.0 * s2 - s1) / 3.0, (4.0 * s4 - s2) / 3.0);
    let jpp = (16.0 * r2 - r1) / 15.0;
    let t = std::f64::consts::SQRT_2 * inverse_root_moment(v, &one, xmin, e)?;
    Ok(jpp / (12.0 * std::f64::consts::SQRT_2 * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_levels_are_exact() {
        let e = bohr_sommerfeld_1d(|x| 0.5 * x * x, 0.1, 3).unwrap();
        assert!((e - 0.35).abs() < 1e-12, "{e}");
        for (h, n) in [(0.02, 0), (0.3, 5), (1.0, 1)] {
            let e = bohr_sommerfeld_1d(|x| 0.5 * x * x, h, n).unwrap();
            assert!((e - h * (n as f64 + 0.5)).abs() < 1e-12 * e.max(1.0));
        }
    }

    #[test]
    fn quartic_area_residual() {
        let v = |x: f64| x.powi(4);
        let e = bohr_sommerfeld_1d(v, 0.05, 2).unwrap();
        let (xmin, _) = minimum(&v).unwrap();
        let a = area(&v, xmin, e).unwrap();
        assert!((a - 2.0 * std::f64::consts::PI * 0.05 * 2.5).abs() < 1e-12);
        // Closed form: A(E) = c E^{3/4} with c = 2√2 ∫_{-1}^{1} √(1 − y⁴) dy.
        let c_ratio = area(&v, xmin, 2.0 * e).unwrap() / a;
        assert!((c_ratio - 2f64.powf(0.75)).abs() < 1e-12);
    }

    #[test]
    fn harmonic_correction_vanishes() {
        for n in 0..4 {
            let c = wkb_correction_1d(|x| 0.5 * x * x, 0.1, n).unwrap();
            assert!(c.abs() < 1e-8, "{n}: {c}");
        }
    }

    #[test]
    fn anharmonic_correction_matches_diagonalization() {
        let v = |x: f64| 0.5 * x * x + 0.1 * x.powi(4);
        let residual = |h: f64, n: u32| {
            let e1 = bohr_sommerfeld_1d(v, h, n).unwrap();
            let e2 = wkb_correction_1d(v, h, n).unwrap();
            let exact = crate::oracle::schrodinger_eigs_1d(v, h, (-3.0, 3.0), n as usize + 1)
                .unwrap()[n as usize];
            exact - (e1 + h * h * e2)
        };
        for n in 0..3 {
            let (r1, r2) = (residual(0.1, n), residual(0.05, n));
            assert!(r1.abs() / r2.abs() > 6.0, "{n}: {r1} {r2}");
        }
    }
}
