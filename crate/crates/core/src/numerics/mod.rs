//! Shared numerical kernel.

mod abel;
pub(crate) mod cheb;
mod jet;
mod ode;
mod quad;
mod roots;
mod sampled;
mod spline;

pub use abel::{abel_forward, abel_invert, frac_integral, AbelInversion, FracOrder};
pub use cheb::Chebyshev;
pub use jet::Jet;
pub use ode::{solve_linear_ode2, Analytic, Coefficient, OdeRhs, OdeSolution};
pub use quad::{gauss_legendre, singular_quad, GaussLegendre, SingularPower};
pub use roots::{brent, golden_max};
pub use sampled::SampledFunction;
pub use spline::{CubicSpline, SplineEnd};
