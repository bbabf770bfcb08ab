use crate::error::{Error, Result};

/// End condition for [`CubicSpline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplineEnd {
    Natural,
    NotAKnot,
}

/// Interpolating cubic spline on a strictly increasing grid.
///
/// Outside the grid the end cubics are extended.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup.first().copied().unwrap_or(0.0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

impl CubicSpline {
    pub fn new(x: &[f64], y: &[f64], end: SplineEnd) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::input("spline needs at least two nodes and matching values"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("spline nodes must be strictly increasing"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("spline values must be finite"));
        }
        let m = if n == 2 {
            vec![0.0; 2]
        } else if end == SplineEnd::NotAKnot && n >= 4 {
            Self::not_a_knot_moments(x, y)
        } else {
            Self::natural_moments(x, y)
        };
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    fn natural_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[j] = h0;
            diag[j] = 2.0 * (h0 + h1);
            sup[j] = h1;
            rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m
    }

    fn not_a_knot_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for j in 0..k {
            let i = j + 1;
            sub[j] = h[i - 1];
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            sup[j] = h[i];
            rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        // Eliminate M_0 and M_{n-1} through third-derivative continuity at x_1 and x_{n-2}.
        let (h0, h1) = (h[0], h[1]);
        diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        sup[0] = (h1 * h1 - h0 * h0) / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        if k == 1 {
            // n == 3 is excluded by the caller; keep the branch total.
            diag[0] = 3.0 * (h0 + h1);
        } else {
            diag[k - 1] = (ha + hb) * (hb + 2.0 * ha) / ha;
            sub[k - 1] = (ha * ha - hb * hb) / ha;
        }
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&inner);
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((ha + hb) * m[n - 2] - hb * m[n - 3]) / ha;
        m
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Index of the segment holding `t` (end segments extend outward).
    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    /// Power-basis coefficients of segment `i` in the local variable `t - x[i]`.
    pub fn segment(&self, i: usize) -> [f64; 4] {
        let h = self.x[i + 1] - self.x[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let b = (self.y[i + 1] - self.y[i]) / h - h * (2.0 * m0 + m1) / 6.0;
        [self.y[i], b, 0.5 * m0, (m1 - m0) / (6.0 * h)]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        let c = self.segment(i);
        let s = t - self.x[i];
        c[0] + s * (c[1] + s * (c[2] + s * c[3]))
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        let c = self.segment(i);
        let s = t - self.x[i];
        c[1] + s * (2.0 * c[2] + 3.0 * s * c[3])
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        let i = self.segment_index(t);
        let c = self.segment(i);
        let s = t - self.x[i];
        2.0 * c[2] + 6.0 * s * c[3]
    }

    /// Integral of the spline from the first node to `t`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let k = self.segment_index(t);
        let mut acc = 0.0;
        for i in 0..k {
            acc += poly_integral(&self.segment(i), self.x[i + 1] - self.x[i]);
        }
        acc + poly_integral(&self.segment(k), t - self.x[k])
    }
}

fn poly_integral(c: &[f64; 4], s: f64) -> f64 {
    s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_not_a_knot() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).powf(1.3)).collect();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::new(&x, &y, SplineEnd::NotAKnot).unwrap();
        for &t in &[0.05, 0.4, 1.1, 2.0] {
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
            assert!((s.deriv(t) - (-2.0 + 1.5 * t * t)).abs() < 1e-11);
        }
    }

    #[test]
    fn natural_spline_is_linear_on_linear_data() {
        let x = [0.0, 1.0, 2.5, 3.0];
        let y = [1.0, 3.0, 6.0, 7.0];
        let s = CubicSpline::new(&x, &y, SplineEnd::Natural).unwrap();
        assert!((s.eval(1.7) - 4.4).abs() < 1e-14);
        assert!((s.integral_to(3.0) - 12.0).abs() < 1e-13);
        assert_eq!(s.deriv2(0.0), 0.0);
    }

    #[test]
    fn rejects_unsorted_nodes() {
        assert!(CubicSpline::new(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0], SplineEnd::Natural).is_err());
    }
}
