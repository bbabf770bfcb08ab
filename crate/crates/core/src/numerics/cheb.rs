use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Chebyshev series `Σ c_j T_j(t)` on `[lo, hi]`, with `t` the affine image in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    pub fn new(coeffs: Vec<f64>, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "Chebyshev interval must be nonempty");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { lo, hi, coeffs }
    }

    /// Chebyshev points of the first kind mapped to `[lo, hi]`, in decreasing order.
    pub fn nodes(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * t
            })
            .collect()
    }

    /// Interpolant through values taken at [`Chebyshev::nodes`].
    pub fn from_node_values(values: &[f64], lo: f64, hi: f64) -> Self {
        let n = values.len();
        let mut c = vec![0.0; n];
        for (j, cj) in c.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in values.iter().enumerate() {
                s += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *cj = 2.0 * s / n as f64;
        }
        c[0] *= 0.5;
        Self::new(c, lo, hi)
    }

    pub fn interpolate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let vals: Vec<f64> = Self::nodes(n, lo, hi).into_iter().map(f).collect();
        Self::from_node_values(&vals, lo, hi)
    }

    /// Least-squares fit of degree `degree` to scattered samples.
    pub fn fit(xs: &[f64], ys: &[f64], degree: usize, lo: f64, hi: f64) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < degree + 1 {
            return Err(Error::input(format!(
                "Chebyshev fit of degree {degree} needs at least {} samples",
                degree + 1
            )));
        }
        let basis = |x: f64| {
            let t = (2.0 * x - lo - hi) / (hi - lo);
            chebyshev_basis(t, degree + 1)
        };
        let c = lstsq(xs, ys, degree + 1, basis)?;
        Ok(Self::new(c, lo, hi))
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::new(vec![0.0], self.lo, self.hi);
        }
        let mut d = vec![0.0; n + 1];
        for j in (1..n).rev() {
            d[j - 1] = d[j + 1] + 2.0 * j as f64 * self.coeffs[j];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.hi - self.lo);
        Self::new(d.into_iter().map(|v| v * scale).collect(), self.lo, self.hi)
    }

    /// Antiderivative vanishing at `lo`.
    pub fn antiderivative(&self) -> Self {
        let c = &self.coeffs;
        let n = c.len();
        let mut a = vec![0.0; n + 1];
        let get = |j: usize| if j < n { c[j] } else { 0.0 };
        for (k, ak) in a.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { 2.0 * get(0) } else { get(k - 1) };
            *ak = (prev - get(k + 1)) / (2.0 * k as f64);
        }
        let scale = 0.5 * (self.hi - self.lo);
        for v in a.iter_mut() {
            *v *= scale;
        }
        let mut out = Self::new(a, self.lo, self.hi);
        let at_lo = out.eval(self.lo);
        out.coeffs[0] -= at_lo;
        out
    }

    pub fn integral(&self) -> f64 {
        self.antiderivative().eval(self.hi)
    }

    /// Largest magnitude among the trailing `k` coefficients.
    pub fn tail(&self, k: usize) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(k)..]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn clenshaw(c: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &cj in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + cj;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

pub(crate) fn chebyshev_basis(t: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut p0, mut p1) = (1.0, t);
    for j in 0..n {
        if j == 0 {
            out.push(1.0);
        } else if j == 1 {
            out.push(t);
        } else {
            let p2 = 2.0 * t * p1 - p0;
            out.push(p2);
            p0 = p1;
            p1 = p2;
        }
    }
    out
}

/// Linear least squares `min ‖A c − y‖` with rows `A_i = basis(x_i)`, solved by SVD.
pub(crate) fn lstsq(
    xs: &[f64],
    ys: &[f64],
    ncols: usize,
    basis: impl Fn(f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let mut a = DMatrix::zeros(xs.len(), ncols);
    for (i, &x) in xs.iter().enumerate() {
        for (j, v) in basis(x).into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let y = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let c = svd
        .solve(&y, smax * 1e-13)
        .map_err(|e| Error::numeric(format!("least squares failed: {e}")))?;
    Ok(c.iter().copied().collect())
}
