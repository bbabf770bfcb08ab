//! Surfaces of revolution `dr² + a(r)² dθ²` held in Besse form.
//!
//! A simple profile with equator radius 1 can be written as
//! `g = f(cos u)² du² + sin²u dθ²`, where `a = sin u` and `dr/du = f(cos u)`.
//! We store `f(x) = 1 + (1 − x²) q(x)`, so the pole conditions `f(±1) = 1` hold
//! for every `q`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::actions;
use crate::error::{Error, Result};
use crate::numerics::{brent, golden_max, Chebyshev, CubicSpline, Jet, SplineEnd};

pub const DEFAULT_NODES: usize = 256;
pub const PRESETS: &[&str] = &["sphere", "mirror", "asym", "spheroid(c)"];

/// Shape function `q` of a pole-closed Besse form.
#[derive(Debug, Clone, PartialEq)]
pub enum BesseShape {
    /// Monomial coefficients of `q`.
    Polynomial(Vec<f64>),
    /// Chebyshev series of `q` on [-1, 1].
    Chebyshev(Chebyshev),
    /// Ellipsoid of revolution with polar/equatorial axis ratio `c`:
    /// `f(x) = √(c² + (1 − c²) x²)`.
    Spheroid(f64),
}

/// Besse function `f` on [-1, 1] plus a description tag.
#[derive(Debug, Clone, PartialEq)]
pub struct BesseForm {
    pub shape: BesseShape,
    pub tag: String,
    dq: Option<(Chebyshev, Chebyshev)>,
}

impl BesseForm {
    pub fn polynomial(q: Vec<f64>, tag: impl Into<String>) -> Self {
        Self::from_shape(BesseShape::Polynomial(q), tag)
    }

    pub fn chebyshev(q: Chebyshev, tag: impl Into<String>) -> Self {
        Self::from_shape(BesseShape::Chebyshev(q), tag)
    }

    pub fn spheroid(ratio: f64) -> Self {
        Self::from_shape(BesseShape::Spheroid(ratio), format!("spheroid({ratio})"))
    }

    pub fn from_shape(shape: BesseShape, tag: impl Into<String>) -> Self {
        let dq = match &shape {
            BesseShape::Chebyshev(c) => {
                let d = c.derivative();
                let dd = d.derivative();
                Some((d, dd))
            }
            _ => None,
        };
        Self {
            shape,
            tag: tag.into(),
            dq,
        }
    }

    /// Builds the form from monomial coefficients of `f`, which must satisfy `f(±1) = 1`.
    pub fn from_f_coeffs(coeffs: &[f64], tag: impl Into<String>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("Besse coefficients must be finite and nonempty"));
        }
        let f_at = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        if (f_at(1.0) - 1.0).abs() > 1e-9 * scale || (f_at(-1.0) - 1.0).abs() > 1e-9 * scale {
            return Err(Error::input(format!(
                "Besse form must satisfy f(1) = f(-1) = 1 (got {}, {})",
                f_at(1.0),
                f_at(-1.0)
            )));
        }
        // r(x) = f(x) - 1 = (1 - x²) q(x); divide from the top: r_k = q_k - q_{k-2}.
        let mut r = coeffs.to_vec();
        r[0] -= 1.0;
        let deg = r.len() - 1;
        if deg < 2 {
            return Ok(Self::polynomial(Vec::new(), tag));
        }
        let mut q = vec![0.0; deg - 1];
        for k in (2..=deg).rev() {
            let above = q.get(k).copied().unwrap_or(0.0);
            q[k - 2] = above - r[k];
        }
        if (r[0] - q[0]).abs() > 1e-9 * scale || (r[1] - q.get(1).copied().unwrap_or(0.0)).abs() > 1e-9 * scale {
            return Err(Error::input("Besse coefficients are not divisible by 1 - x²"));
        }
        Ok(Self::polynomial(q, tag))
    }

    /// Monomial coefficients of `f`, when the shape is polynomial.
    pub fn f_coeffs(&self) -> Option<Vec<f64>> {
        let BesseShape::Polynomial(q) = &self.shape else {
            return None;
        };
        if q.is_empty() {
            return Some(vec![1.0]);
        }
        let mut c = vec![0.0; q.len() + 2];
        c[0] = 1.0;
        for (k, &qk) in q.iter().enumerate() {
            c[k] += qk;
            c[k + 2] -= qk;
        }
        Some(c)
    }

    /// `q` with its first two derivatives.
    pub fn q3(&self, x: f64) -> [f64; 3] {
        match &self.shape {
            BesseShape::Polynomial(q) => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &c in q.iter().rev() {
                    d2 = d2 * x + 2.0 * d1;
                    d1 = d1 * x + v;
                    v = v * x + c;
                }
                [v, d1, d2]
            }
            BesseShape::Chebyshev(c) => {
                let (d, dd) = self.dq.as_ref().expect("derivative cache");
                [c.eval(x), d.eval(x), dd.eval(x)]
            }
            BesseShape::Spheroid(_) => {
                // q = (f − 1)/(1 − x²) = (c² − 1)/(f + 1), regular at the poles.
                let [f, f1, f2] = self.f3(x);
                let k = self.spheroid_c2() - 1.0;
                let g = f + 1.0;
                [
                    k / g,
                    -k * f1 / (g * g),
                    k * (2.0 * f1 * f1 / (g * g * g) - f2 / (g * g)),
                ]
            }
        }
    }

    fn spheroid_c2(&self) -> f64 {
        match self.shape {
            BesseShape::Spheroid(c) => c * c,
            _ => 1.0,
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        self.q3(x)[0]
    }

    /// `f` with its first two derivatives.
    pub fn f3(&self, x: f64) -> [f64; 3] {
        if let BesseShape::Spheroid(c) = self.shape {
            let c2 = c * c;
            let f = (c2 + (1.0 - c2) * x * x).sqrt();
            let f1 = (1.0 - c2) * x / f;
            let f2 = ((1.0 - c2) - f1 * f1) / f;
            return [f, f1, f2];
        }
        let [q, q1, q2] = self.q3(x);
        let w = 1.0 - x * x;
        [
            1.0 + w * q,
            -2.0 * x * q + w * q1,
            -2.0 * q - 4.0 * x * q1 + w * q2,
        ]
    }

    pub fn f(&self, x: f64) -> f64 {
        self.f3(x)[0]
    }

    pub fn f_jet(&self, x: Jet) -> Jet {
        let [f, f1, f2] = self.f3(x.v);
        x.chain(f, f1, f2)
    }

    /// Minimum of `f` over [-1, 1] on a fine sample.
    pub fn min_f(&self) -> f64 {
        (0..=4000)
            .map(|k| self.f(-1.0 + k as f64 / 2000.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(f(x) + f(−x)) / 2`.
    pub fn even_part(&self) -> Self {
        let tag = format!("even({})", self.tag);
        match &self.shape {
            BesseShape::Polynomial(q) => Self::polynomial(
                q.iter()
                    .enumerate()
                    .map(|(k, &c)| if k % 2 == 0 { c } else { 0.0 })
                    .collect(),
                tag,
            ),
            BesseShape::Chebyshev(c) => {
                let (lo, hi) = c.interval();
                Self::chebyshev(
                    Chebyshev::new(
                        c.coeffs()
                            .iter()
                            .enumerate()
                            .map(|(k, &v)| if k % 2 == 0 { v } else { 0.0 })
                            .collect(),
                        lo,
                        hi,
                    ),
                    tag,
                )
            }
            BesseShape::Spheroid(_) => Self {
                tag,
                ..self.clone()
            },
        }
    }

    /// `f(−x)`, the Besse form of the profile reflected through the equator.
    pub fn reflected(&self) -> Self {
        let tag = format!("reflected({})", self.tag);
        let flip = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
                .collect()
        };
        match &self.shape {
            BesseShape::Polynomial(q) => Self::polynomial(flip(q), tag),
            BesseShape::Chebyshev(c) => {
                let (lo, hi) = c.interval();
                Self::chebyshev(Chebyshev::new(flip(c.coeffs()), lo, hi), tag)
            }
            BesseShape::Spheroid(_) => Self {
                tag,
                ..self.clone()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BesseShape::Spheroid(c) = self.shape {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::input("spheroid axis ratio must be positive"));
            }
        }
        let m = self.min_f();
        if !(m > 0.0) {
            return Err(Error::input(format!(
                "Besse function must be positive on [-1, 1] (min {m:.4e})"
            )));
        }
        for x in [-1.0, 1.0] {
            if (self.f(x) - 1.0).abs() > 1e-10 {
                return Err(Error::input("Besse function must equal 1 at x = ±1"));
            }
        }
        Ok(())
    }
}

/// A meridian profile: length and `a, a', a''` at a meridian distance.
pub trait ProfileCurve {
    fn length(&self) -> f64;
    fn eval(&self, r: f64) -> [f64; 3];

    fn a(&self, r: f64) -> f64 {
        self.eval(r)[0]
    }
}

/// Surface of revolution built from a [`BesseForm`].
#[derive(Debug, Clone)]
pub struct Profile {
    besse: BesseForm,
    r_of_u: Chebyshev,
    length: f64,
    r0: f64,
    nodes: usize,
}

impl Profile {
    /// `r(u) = ∫₀^u f(cos s) ds`, `a(r(u)) = sin u`.
    pub fn from_besse(besse: BesseForm, nodes: usize) -> Result<Self> {
        besse.validate()?;
        if nodes < 8 {
            return Err(Error::input("profile needs at least 8 interpolation nodes"));
        }
        let dr = Chebyshev::interpolate(|s| besse.f(s.cos()), 0.0, PI, nodes);
        let r_of_u = dr.antiderivative();
        let length = r_of_u.eval(PI);
        let r0 = r_of_u.eval(FRAC_PI_2);
        Ok(Self {
            besse,
            r_of_u,
            length,
            r0,
            nodes,
        })
    }

    pub fn besse(&self) -> &BesseForm {
        &self.besse
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Meridian length `L` (pole to pole).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Location of the equator.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `f(0)`, the equatorial value of the Besse function.
    pub fn f0(&self) -> f64 {
        self.besse.f(0.0)
    }

    pub fn r_of_u(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= PI {
            self.length
        } else {
            self.r_of_u.eval(u)
        }
    }

    /// Inverse of [`Profile::r_of_u`] by safeguarded Newton.
    pub fn u_of_r(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.length {
            return PI;
        }
        let (mut lo, mut hi) = (0.0, PI);
        let mut u = PI * r / self.length;
        for _ in 0..100 {
            let g = self.r_of_u.eval(u) - r;
            if g > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let step = g / self.besse.f(u.cos());
            let mut next = u - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() < 1e-15 * (1.0 + u) {
                return next;
            }
            u = next;
        }
        u
    }

    /// The same surface with the poles exchanged.
    pub fn reflected(&self) -> Result<Self> {
        Self::from_besse(self.besse.reflected(), self.nodes)
    }
}

impl ProfileCurve for Profile {
    fn length(&self) -> f64 {
        self.length
    }

    fn eval(&self, r: f64) -> [f64; 3] {
        let u = self.u_of_r(r);
        let (s, c) = u.sin_cos();
        let [f, f1, _] = self.besse.f3(c);
        [s, c / f, -s / (f * f) + s * c * f1 / (f * f * f)]
    }
}

/// A profile known only through samples of `a(r)`, interpolated by a natural spline.
#[derive(Debug, Clone)]
pub struct TableProfile {
    spline: CubicSpline,
    length: f64,
}

impl TableProfile {
    pub fn new(r: &[f64], a: &[f64]) -> Result<Self> {
        if r.first().copied() != Some(0.0) {
            return Err(Error::input("profile table must start at r = 0"));
        }
        let spline = CubicSpline::new(r, a, SplineEnd::NotAKnot)?;
        Ok(Self {
            spline,
            length: r[r.len() - 1],
        })
    }
}

impl ProfileCurve for TableProfile {
    fn length(&self) -> f64 {
        self.length
    }

    fn eval(&self, r: f64) -> [f64; 3] {
        [
            self.spline.eval(r),
            self.spline.deriv(r),
            self.spline.deriv2(r),
        ]
    }
}

fn locate_equator(p: &dyn ProfileCurve) -> Result<(f64, f64)> {
    let l = p.length();
    let (r0, a0) = golden_max(|r| p.a(r), 0.0, l, 1e-12 * l);
    // Polish on a' for a sharper location.
    let h = 1e-3 * l;
    let r0 = brent(|r| p.eval(r)[1], (r0 - h).max(0.0), (r0 + h).min(l), 1e-15).unwrap_or(r0);
    Ok((r0, a0.max(p.a(r0))))
}

/// Besse form of a profile with equator radius 1, sampled at `n` Chebyshev nodes.
pub fn to_besse(p: &dyn ProfileCurve) -> Result<BesseForm> {
    to_besse_with(p, 64)
}

pub fn to_besse_with(p: &dyn ProfileCurve, n: usize) -> Result<BesseForm> {
    let (r0, a0) = locate_equator(p)?;
    if (a0 - 1.0).abs() > 1e-6 {
        return Err(Error::input(format!(
            "equator radius is {a0}, not 1; rescale the profile (r → r/a(r0), a → a/a(r0)) first"
        )));
    }
    let l = p.length();
    let xs = Chebyshev::nodes(n, -1.0, 1.0);
    let mut qs = Vec::with_capacity(n);
    for &x in &xs {
        let target = (1.0 - x * x).sqrt();
        let (lo, hi) = if x > 0.0 { (0.0, r0) } else { (r0, l) };
        let r = brent(|r| p.a(r) - target, lo, hi, 1e-15)?;
        let f = x / p.eval(r)[1];
        qs.push((f - 1.0) / (1.0 - x * x));
    }
    Ok(BesseForm::chebyshev(
        Chebyshev::from_node_values(&qs, -1.0, 1.0),
        "from-profile",
    ))
}

/// Outcome of one check in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// `None` when the check could not be evaluated.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.get(name).and_then(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed == Some(true))
    }

    fn push(&mut self, name: &'static str, passed: Option<bool>, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
}

pub const CHECK_ENDPOINTS: &str = "endpoints";
pub const CHECK_POSITIVE: &str = "positivity";
pub const CHECK_SINGLE_CRITICAL: &str = "single-critical-point";
pub const CHECK_NONDEGENERATE: &str = "nondegenerate-maximum";
pub const CHECK_TWIST: &str = "twist";

/// Shape checks on an arbitrary curve; the twist check is left unevaluated.
pub fn validate_curve(p: &dyn ProfileCurve) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let l = p.length();
    let [a_start, d_start, _] = p.eval(0.0);
    let [a_end, d_end, _] = p.eval(l);
    let end_err = a_start
        .abs()
        .max(a_end.abs())
        .max((d_start - 1.0).abs())
        .max((d_end + 1.0).abs());
    rep.push(
        CHECK_ENDPOINTS,
        Some(end_err < 1e-6),
        format!("max endpoint defect {end_err:.3e}"),
    );
    let samples = 4000;
    let grid: Vec<f64> = (0..=samples).map(|k| l * k as f64 / samples as f64).collect();
    let min_a = grid[1..samples]
        .iter()
        .map(|&r| p.a(r))
        .fold(f64::INFINITY, f64::min);
    rep.push(
        CHECK_POSITIVE,
        Some(min_a > 0.0),
        format!("min interior radius {min_a:.3e}"),
    );
    let slopes: Vec<f64> = grid.iter().map(|&r| p.eval(r)[1]).collect();
    let changes: Vec<usize> = (0..samples)
        .filter(|&k| slopes[k] > 0.0 && slopes[k + 1] <= 0.0 || slopes[k] < 0.0 && slopes[k + 1] >= 0.0)
        .collect();
    let single = changes.len() == 1;
    rep.push(
        CHECK_SINGLE_CRITICAL,
        Some(single),
        format!("{} sign changes of a'", changes.len()),
    );
    if single {
        let k = changes[0];
        let r0 = brent(|r| p.eval(r)[1], grid[k], grid[k + 1], 1e-14).unwrap_or(grid[k]);
        let a2 = p.eval(r0)[2];
        rep.push(
            CHECK_NONDEGENERATE,
            Some(a2 < -1e-8),
            format!("a''(r0) = {a2:.6e} at r0 = {r0:.6}"),
        );
    } else {
        rep.push(CHECK_NONDEGENERATE, None, "no unique critical point".into());
    }
    rep
}

/// Full simple-type check, including the twist condition at the meridian.
pub fn validate_simple(p: &Profile) -> ValidationReport {
    let mut rep = validate_curve(p);
    match actions::twist_alpha(p) {
        Ok(alpha) => rep.push(
            CHECK_TWIST,
            Some(alpha.abs() > TWIST_FLOOR),
            format!("alpha = {alpha:.6e}"),
        ),
        Err(e) => rep.push(CHECK_TWIST, Some(false), e.to_string()),
    }
    rep
}

/// Twist coefficients below this magnitude count as zero.
pub const TWIST_FLOOR: f64 = 1e-6;

/// Preset surfaces: `sphere`, `mirror`, `asym`, `spheroid(c)` with axis ratio `c`.
pub fn preset(name: &str) -> Result<Profile> {
    preset_with(name, DEFAULT_NODES)
}

pub fn preset_besse(name: &str) -> Result<BesseForm> {
    let trimmed = name.trim();
    match trimmed {
        "sphere" => Ok(BesseForm::polynomial(Vec::new(), "sphere")),
        "mirror" => Ok(BesseForm::polynomial(vec![0.7], "mirror")),
        "asym" => Ok(BesseForm::polynomial(vec![0.7, 0.2], "asym")),
        _ => {
            if let Some(arg) = trimmed
                .strip_prefix("spheroid(")
                .and_then(|s| s.strip_suffix(')'))
            {
                let c: f64 = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::input(format!("bad spheroid ratio '{arg}'")))?;
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::input("spheroid ratio must be positive"));
                }
                return Ok(BesseForm::spheroid(c));
            }
            Err(Error::input(format!(
                "unknown preset '{name}'; available: {}",
                PRESETS.join(", ")
            )))
        }
    }
}

pub fn preset_with(name: &str, nodes: usize) -> Result<Profile> {
    Profile::from_besse(preset_besse(name)?, nodes)
}

/// `min(sup|a₁ − a₂|, sup|a₁(r) − a₂(L₂ − r)|) + |L₁ − L₂|`.
pub fn isometry_distance(p1: &dyn ProfileCurve, p2: &dyn ProfileCurve) -> f64 {
    let (l1, l2) = (p1.length(), p2.length());
    let l = l1.min(l2);
    let n = 2000;
    let mut direct: f64 = 0.0;
    let mut flipped: f64 = 0.0;
    for k in 0..=n {
        let r = l * k as f64 / n as f64;
        let a1 = p1.a(r);
        direct = direct.max((a1 - p2.a(r)).abs());
        flipped = flipped.max((a1 - p2.a(l2 - r)).abs());
    }
    direct.min(flipped) + (l1 - l2).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_identity_chart() {
        let p = preset("sphere").unwrap();
        assert!((p.length() - PI).abs() < 1e-14);
        assert!((p.r0() - FRAC_PI_2).abs() < 1e-14);
        for &r in &[0.3, 1.2, 2.9] {
            let [a, d, dd] = p.eval(r);
            assert!((a - r.sin()).abs() < 1e-14);
            assert!((d - r.cos()).abs() < 1e-14);
            assert!((dd + r.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn asym_length_is_closed_form() {
        // f = 1.7 + 0.2x − 0.7x² − 0.2x³; ∫₀^π cos = ∫₀^π cos³ = 0, ∫₀^π cos² = π/2.
        let p = preset("asym").unwrap();
        assert!((p.length() - 1.35 * PI).abs() < 1e-13);
        assert!((p.f0() - 1.7).abs() < 1e-15);
    }

    #[test]
    fn monomial_roundtrip() {
        let b = BesseForm::from_f_coeffs(&[1.7, 0.2, -0.7, -0.2], "t").unwrap();
        assert_eq!(b.shape, BesseShape::Polynomial(vec![0.7, 0.2]));
        assert_eq!(b.f_coeffs().unwrap(), vec![1.7, 0.2, -0.7, -0.2]);
        assert!(BesseForm::from_f_coeffs(&[1.0, 0.1, 0.05], "bad").is_err());
    }

    #[test]
    fn derivative_formulas() {
        let b = preset_besse("asym").unwrap();
        let s = BesseForm::spheroid(0.8);
        for form in [&b, &s] {
            for &x in &[-0.9, -0.2, 0.4, 0.99] {
                let e = 1e-5;
                let [_, f1, f2] = form.f3(x);
                let d1 = (form.f(x + e) - form.f(x - e)) / (2.0 * e);
                let d2 = (form.f(x + e) - 2.0 * form.f(x) + form.f(x - e)) / (e * e);
                assert!((f1 - d1).abs() < 1e-8);
                assert!((f2 - d2).abs() < 1e-4);
                let [q, q1, _] = form.q3(x);
                assert!((1.0 + (1.0 - x * x) * q - form.f(x)).abs() < 1e-13);
                let dq = (form.q(x + e) - form.q(x - e)) / (2.0 * e);
                assert!((q1 - dq).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn curvature_at_equator_gives_f0() {
        let p = preset("asym").unwrap();
        let a2 = p.eval(p.r0())[2];
        assert!((1.0 / (-a2).sqrt() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn to_besse_roundtrip() {
        let p = preset("asym").unwrap();
        let b = to_besse(&p).unwrap();
        let err = (0..=200)
            .map(|k| -1.0 + k as f64 / 100.0)
            .map(|x| (b.f(x) - p.besse().f(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let sphere = to_besse(&preset("sphere").unwrap()).unwrap();
        assert!((0..=20).all(|k| (sphere.f(-1.0 + k as f64 * 0.1) - 1.0).abs() < 1e-9));
    }

    #[test]
    fn to_besse_requires_unit_equator() {
        let r: Vec<f64> = (0..=200).map(|k| PI * k as f64 / 200.0).collect();
        let a: Vec<f64> = r.iter().map(|r| 2.0 * r.sin()).collect();
        let t = TableProfile::new(&r, &a).unwrap();
        let e = to_besse(&t).unwrap_err();
        assert!(e.to_string().contains("rescale"));
    }

    #[test]
    fn mirror_symmetry() {
        let p = preset("mirror").unwrap();
        let l = p.length();
        for &r in &[0.1, 0.7, 1.3] {
            assert!((p.a(r) - p.a(l - r)).abs() < 1e-10);
        }
        let q = preset("asym").unwrap();
        let lq = q.length();
        assert!((q.a(0.7) - q.a(lq - 0.7)).abs() > 1e-3);
    }

    #[test]
    fn spheroid_length_matches_ellipse_arc() {
        // Arc length of the half ellipse (sin t, c cos t) by brute midpoint sum.
        let c: f64 = 0.8;
        let p = preset("spheroid(0.8)").unwrap();
        let n = 200_000;
        let h = PI / n as f64;
        let mut arc = 0.0;
        let (mut x0, mut z0) = (0.0f64, c);
        for k in 1..=n {
            let t = k as f64 * h;
            let (x1, z1) = (t.sin(), c * t.cos());
            arc += ((x1 - x0).powi(2) + (z1 - z0).powi(2)).sqrt();
            x0 = x1;
            z0 = z1;
        }
        assert!((p.length() - arc).abs() < 1e-8);
    }

    #[test]
    fn two_bump_table_fails_single_critical_point() {
        let l = PI;
        let r: Vec<f64> = (0..=400).map(|k| l * k as f64 / 400.0).collect();
        let a: Vec<f64> = r
            .iter()
            .map(|&r| r.sin() * (1.0 - 0.6 * (2.0 * r).sin().powi(2)))
            .collect();
        let t = TableProfile::new(&r, &a).unwrap();
        let rep = validate_curve(&t);
        assert_eq!(rep.passed(CHECK_SINGLE_CRITICAL), Some(false));
    }

    #[test]
    fn unknown_preset_lists_names() {
        let e = preset("nosuch").unwrap_err();
        assert!(e.is_input_error());
        assert!(e.to_string().contains("sphere"));
    }

    #[test]
    fn isometry_distance_cases() {
        let s = preset("sphere").unwrap();
        let m = preset("mirror").unwrap();
        let a = preset("asym").unwrap();
        assert!(isometry_distance(&s, &s) < 1e-14);
        assert!(isometry_distance(&a, &a.reflected().unwrap()) < 1e-10);
        assert!(isometry_distance(&s, &m) > 0.01);
    }
}
