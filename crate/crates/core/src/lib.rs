//! Spectral geometry of analytic surfaces of revolution.
//!
//! The forward direction runs profile → action variables → semiclassical
//! joint spectrum → smoothed wave trace. The inverse direction runs joint
//! spectrum → quantum normal form → Abel and fractional-integral recovery of
//! the two branch slopes → profile. Brute-force oracles (finite volumes,
//! dense diagonalization, geodesic ODEs) back every step.

pub mod actions;
pub mod error;
pub mod inverse;
pub mod io;
pub mod numerics;
pub mod oracle;
pub mod profile;
pub mod quantization;
pub mod wavetrace;

pub use error::{Error, Result};
