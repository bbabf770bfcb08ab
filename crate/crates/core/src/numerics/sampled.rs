use super::spline::{CubicSpline, SplineEnd};
use crate::error::{Error, Result};

/// A real function known at grid nodes.
///
/// Values between nodes come from a natural cubic spline, or from cubic Hermite
/// interpolation when derivative samples are supplied.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    derivs: Option<Vec<f64>>,
    spline: CubicSpline,
}

impl SampledFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::new(&nodes, &values, SplineEnd::Natural)?;
        Ok(Self {
            nodes,
            values,
            derivs: None,
            spline,
        })
    }

    pub fn with_derivatives(nodes: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if derivs.len() != nodes.len() || derivs.iter().any(|d| !d.is_finite()) {
            return Err(Error::input("derivative samples must be finite and match the grid"));
        }
        let mut s = Self::new(nodes, values)?;
        s.derivs = Some(derivs);
        Ok(s)
    }

    /// Samples `f` at the given nodes.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> Option<&[f64]> {
        self.derivs.as_deref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    fn hermite(&self, x: f64) -> (f64, f64, f64) {
        let d = self.derivs.as_ref().unwrap();
        let i = self.spline.segment_index(x);
        let h = self.nodes[i + 1] - self.nodes[i];
        let t = (x - self.nodes[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (d[i] * h, d[i + 1] * h);
        let h00 = 2.0 * t.powi(3) - 3.0 * t * t + 1.0;
        let h10 = t.powi(3) - 2.0 * t * t + t;
        let h01 = -2.0 * t.powi(3) + 3.0 * t * t;
        let h11 = t.powi(3) - t * t;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d1 = ((6.0 * t * t - 6.0 * t) * y0
            + (3.0 * t * t - 4.0 * t + 1.0) * m0
            + (-6.0 * t * t + 6.0 * t) * y1
            + (3.0 * t * t - 2.0 * t) * m1)
            / h;
        let d2 = ((12.0 * t - 6.0) * y0
            + (6.0 * t - 4.0) * m0
            + (-12.0 * t + 6.0) * y1
            + (6.0 * t - 2.0) * m1)
            / (h * h);
        (v, d1, d2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.derivs.is_some() {
            self.hermite(x).0
        } else {
            self.spline.eval(x)
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if self.derivs.is_some() {
            self.hermite(x).1
        } else {
            self.spline.deriv(x)
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        if self.derivs.is_some() {
            self.hermite(x).2
        } else {
            self.spline.deriv2(x)
        }
    }

    /// Integral of the natural-spline interpolant over the whole grid.
    pub fn integral(&self) -> f64 {
        self.spline.integral_to(self.domain().1)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Self::new(self.nodes.clone(), values)
    }

    pub fn max_abs_diff(&self, other: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&x, &y)| (y - other(x)).abs())
            .fold(0.0, f64::max)
    }
}
