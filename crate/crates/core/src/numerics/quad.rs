use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if n == 1 {
                dp = 1.0;
                x = 0.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// One-shot Gauss–Legendre integral of `f` over `[a, b]` with `n` nodes.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    GaussLegendre::new(n).integrate(f, a, b)
}

/// Exponent applied to the endpoint factor `(hi - x)(x - lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPower {
    MinusHalf,
    PlusHalf,
}

/// `∫ g(x) [(hi - x)(x - lo)]^p dx` for `p = ±1/2`, by the substitution
/// `x = mid + half·cos t` and an `n`-point Gauss–Chebyshev rule.
pub fn singular_quad(
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    power: SingularPower,
    n: usize,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::input(format!("singular_quad: empty interval [{lo}, {hi}]")));
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut s = 0.0;
    for k in 0..n {
        let t = PI * (k as f64 + 0.5) / n as f64;
        let y = t.cos();
        let v = g(mid + half * y);
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "singular_quad: integrand not finite at x = {}",
                mid + half * y
            )));
        }
        s += match power {
            SingularPower::MinusHalf => v,
            SingularPower::PlusHalf => v * (1.0 - y * y),
        };
    }
    let scale = match power {
        SingularPower::MinusHalf => 1.0,
        SingularPower::PlusHalf => half * half,
    };
    Ok(s * PI / n as f64 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(5);
        let v = gl.integrate(|x| x.powi(9) + x.powi(8), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        assert!((gauss_legendre(f64::exp, 0.0, 1.0, 12) - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert!((gauss_legendre(|x| x, 0.0, 2.0, 1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_weights() {
        let a = singular_quad(|_| 1.0, 0.0, 1.0, SingularPower::MinusHalf, 16).unwrap();
        assert!((a - PI).abs() < 1e-14);
        let b = singular_quad(|_| 1.0, 0.0, 1.0, SingularPower::PlusHalf, 16).unwrap();
        assert!((b - PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn singular_quad_is_spectral() {
        // ∫_{-1}^{1} e^x / sqrt(1 - x^2) dx = π I0(1)
        let exact = PI * 1.266_065_877_752_008_4;
        let e4 = (singular_quad(f64::exp, -1.0, 1.0, SingularPower::MinusHalf, 4).unwrap() - exact).abs();
        let e8 = (singular_quad(f64::exp, -1.0, 1.0, SingularPower::MinusHalf, 8).unwrap() - exact).abs();
        assert!(e8 * 4.0 <= e4);
        assert!(e8 < 1e-9);
    }

    #[test]
    fn rejects_bad_interval_and_nan() {
        assert!(singular_quad(|_| 1.0, 1.0, 1.0, SingularPower::MinusHalf, 8).is_err());
        assert!(singular_quad(|_| f64::NAN, 0.0, 1.0, SingularPower::MinusHalf, 8).is_err());
    }
}
