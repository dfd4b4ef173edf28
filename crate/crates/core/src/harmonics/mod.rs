//! Band-limited scalar analysis on the unit sphere.
//!
//! [`SphereGrid`] holds the quadrature nodes and precomputed Legendre tables;
//! it is immutable after construction and can be shared across threads.
//! [`HarmonicCoeffs`] stores real, orthonormal spherical-harmonic
//! coefficients.

mod coeffs;
mod grid;
pub mod legendre;

pub use coeffs::{lm_index, lm_of_index, HarmonicCoeffs};
pub use grid::{gauss_legendre, BasisTables, GridDerivatives, SphereGrid};

use crate::linalg3::Vec3;

/// Free-function forms of the coefficient-space operators.
pub fn analysis(grid: &SphereGrid, values: &[f64]) -> crate::Result<HarmonicCoeffs> {
    grid.analysis(values)
}

pub fn synthesis(grid: &SphereGrid, coeffs: &HarmonicCoeffs) -> crate::Result<Vec<f64>> {
    grid.synthesis(coeffs)
}

pub fn laplace_beltrami_apply(coeffs: &HarmonicCoeffs) -> HarmonicCoeffs {
    coeffs.laplace_beltrami_apply()
}

pub fn l1_projection(coeffs: &HarmonicCoeffs) -> (Vec3, HarmonicCoeffs) {
    coeffs.l1_projection()
}

pub fn quadrature_integral(grid: &SphereGrid, values: &[f64]) -> crate::Result<f64> {
    grid.quadrature_integral(values)
}
