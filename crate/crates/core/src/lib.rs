//! Constant-mean-curvature foliations of asymptotically flat initial data.
//!
//! The pipeline: a [`metric::MetricField`] supplies `g` and its derivatives,
//! [`surface`] evaluates the geometry of radial graphs over spheres expanded
//! in real spherical harmonics ([`harmonics`]), [`solver`] builds CMC leaves
//! and foliations, [`spectrum`] studies their Jacobi operators, and
//! [`charges`] computes ADM mass, center of mass and leaf-based analogues.
//! [`runner`] drives all of it from a JSON config.

// index loops mirror tensor notation; `!(a < b)` comparisons also reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod charges;
pub mod error;
pub mod fit;
pub mod harmonics;
pub mod jet;
pub mod linalg3;
pub mod metric;
pub mod runner;
pub mod solver;
pub mod spectrum;
pub mod surface;

pub use error::{Error, Result};
pub use harmonics::{HarmonicCoeffs, SphereGrid};
pub use metric::{MetricFamily, MetricField};
pub use solver::{build_foliation, solve_leaf, LeafResult, SolveConfig, SolveMode};
pub use surface::LeafSurface;
