//! Asymptotically flat metrics on an exterior chart.
//!
//! A [`MetricField`] wraps a [`MetricFamily`] together with its decay rate,
//! the inner radius of the chart and any declared charges. Closed-form
//! families are differentiated exactly with second-order jets; tabulated
//! data uses derivatives of its interpolant unless finite differences are
//! requested.

mod audit;
mod curvature;
mod families;
mod fd;
mod tabulated;

use std::f64::consts::PI;

pub use audit::{decay_audit, DecayAudit, DecayQuantity};
pub use curvature::{connection, curvature, Connection, CurvatureEval, Tensor3, Tensor4, DET_TOL};
pub use families::{HarmonicAsymptotics, MetricFamily, PerturbedRT};
pub use fd::{default_step, finite_difference_derivatives};
pub use tabulated::{encode_binary, TabulatedMetric, GRID_MAGIC};

use crate::error::{Error, Result};
use crate::linalg3::{self, Mat3, Vec3};

/// `dg[k][i][j] = ∂_k g_ij`.
pub type DMetric = [[[f64; 3]; 3]; 3];
/// `d2g[k][l][i][j] = ∂_k ∂_l g_ij`.
pub type D2Metric = [[[[f64; 3]; 3]; 3]; 3];

/// Metric and its first two derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub g: Mat3,
    pub dg: DMetric,
    pub d2g: D2Metric,
}

/// How derivatives of `g` are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Derivatives {
    /// Exact derivatives of the closed form (or of the interpolant).
    Exact,
    /// Fourth-order central differences with an optional fixed step.
    FiniteDifference { step: Option<f64> },
}

/// Extrinsic curvature data carried by a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtrinsicData {
    /// `K = 0`.
    TimeSymmetric,
    /// `K` derived from a momentum tensor `π`.
    Momentum,
    /// No extrinsic data available.
    Absent,
}

/// An asymptotically flat metric with its decay and chart parameters.
#[derive(Clone, Debug)]
pub struct MetricField {
    family: MetricFamily,
    q: f64,
    r_min: f64,
    declared_mass: Option<f64>,
    declared_center: Option<Vec3>,
    rt_flag: bool,
    derivatives: Derivatives,
}

impl MetricField {
    pub fn new(family: MetricFamily) -> Self {
        MetricField {
            q: family.decay_rate(),
            r_min: family.default_r_min(),
            declared_mass: family.mass(),
            declared_center: family.center_of_mass(),
            rt_flag: family.is_rt(),
            derivatives: Derivatives::Exact,
            family,
        }
    }

    pub fn euclidean() -> Self {
        Self::new(MetricFamily::Euclidean)
    }

    pub fn schwarzschild(mass: f64, center: Vec3) -> Self {
        Self::new(MetricFamily::SchwarzschildIsotropic { mass, center })
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        if let MetricFamily::Tabulated(t) = &mut self.family {
            std::sync::Arc::make_mut(t).r_min = r_min;
        }
        self
    }

    pub fn with_derivatives(mut self, d: Derivatives) -> Self {
        self.derivatives = d;
        self
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn declared_mass(&self) -> Option<f64> {
        self.declared_mass
    }

    pub fn declared_center(&self) -> Option<Vec3> {
        self.declared_center
    }

    pub fn rt_flag(&self) -> bool {
        self.rt_flag
    }

    pub fn extrinsic(&self) -> ExtrinsicData {
        match &self.family {
            MetricFamily::HarmonicAsymptotics(ha) if ha.shift.is_some() => ExtrinsicData::Momentum,
            MetricFamily::Tabulated(_) => ExtrinsicData::Absent,
            MetricFamily::PerturbedRT(p) => MetricField::new((*p.base).clone()).extrinsic(),
            _ => ExtrinsicData::TimeSymmetric,
        }
    }

    /// `g_ij(x)` only.
    pub fn metric(&self, x: Vec3) -> Result<Mat3> {
        let c = self.family.components(x)?;
        Ok(unpack(c.map(|j| j.v)))
    }

    pub fn evaluate(&self, x: Vec3) -> Result<MetricSample> {
        match self.derivatives {
            Derivatives::Exact => evaluate_metric(&self.family, x),
            Derivatives::FiniteDifference { step } => {
                let h = step.unwrap_or_else(|| default_step(x));
                let g = self.metric(x)?;
                let (dg, d2g) = finite_difference_derivatives(|y| self.metric(y), x, h, self.r_min)?;
                Ok(MetricSample { g, dg, d2g })
            }
        }
    }

    pub fn connection(&self, x: Vec3) -> Result<Connection> {
        connection(&self.evaluate(x)?, x)
    }

    pub fn curvature(&self, x: Vec3) -> Result<CurvatureEval> {
        curvature(&self.evaluate(x)?, x)
    }

    /// Translates the family (closed-form families only) along with the
    /// declared center.
    pub fn translated(&self, t: Vec3) -> Result<MetricField> {
        let mut out = self.clone();
        out.family = self.family.translated(t)?;
        out.declared_center = self.declared_center.map(|c| linalg3::add(c, t));
        out.r_min = out.family.default_r_min().max(self.r_min);
        Ok(out)
    }
}

fn unpack(c: [f64; 6]) -> Mat3 {
    [[c[0], c[1], c[2]], [c[1], c[3], c[4]], [c[2], c[4], c[5]]]
}

/// `(g, ∂g, ∂²g)` of a family at `x`.
pub fn evaluate_metric(family: &MetricFamily, x: Vec3) -> Result<MetricSample> {
    let c = family.components(x)?;
    let idx = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    let mut s = MetricSample {
        g: [[0.0; 3]; 3],
        dg: [[[0.0; 3]; 3]; 3],
        d2g: [[[[0.0; 3]; 3]; 3]; 3],
    };
    for i in 0..3 {
        for j in 0..3 {
            let jet = &c[idx[i][j]];
            s.g[i][j] = jet.v;
            for k in 0..3 {
                s.dg[k][i][j] = jet.d[k];
                for l in 0..3 {
                    s.d2g[k][l][i][j] = jet.h[k][l];
                }
            }
        }
    }
    Ok(s)
}

/// Christoffel symbols `Γ^k_ij` as `[k][i][j]`.
pub fn evaluate_christoffel(field: &MetricField, x: Vec3) -> Result<Tensor3> {
    Ok(field.connection(x)?.gamma)
}

pub fn evaluate_curvature(field: &MetricField, x: Vec3) -> Result<CurvatureEval> {
    field.curvature(x)
}

/// Momentum tensor `π_ij` and its derivatives `∂_k π_ij`.
fn momentum(field: &MetricField, x: Vec3) -> Result<Option<(Mat3, Tensor3)>> {
    match field.family() {
        MetricFamily::HarmonicAsymptotics(ha) => ha.momentum(x),
        MetricFamily::PerturbedRT(p) => match p.base.as_ref() {
            MetricFamily::HarmonicAsymptotics(ha) => ha.momentum(x),
            _ => Ok(None),
        },
        _ => Ok(None),
    }
}

/// Energy and momentum densities of the constraint equations,
/// `ρ = (R_g − |K|² + (tr K)²)/16π` and `J = div_g π / 8π`.
///
/// Absent extrinsic data counts as `K = 0` for `ρ`; requesting `J` then
/// fails with [`Error::MissingExtrinsicData`].
pub fn constraint_residuals(field: &MetricField, x: Vec3, want_momentum: bool) -> Result<(f64, Option<Vec3>)> {
    let s = field.evaluate(x)?;
    let curv = curvature(&s, x)?;
    let ext = field.extrinsic();
    if want_momentum && ext == ExtrinsicData::Absent {
        return Err(Error::MissingExtrinsicData);
    }
    let Some((pi, dpi)) = momentum(field, x)? else {
        let j = want_momentum.then_some([0.0; 3]);
        return Ok((curv.scalar / (16.0 * PI), j));
    };
    let Connection { ginv, gamma } = connection(&s, x)?;
    let tr_pi: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| ginv[i][j] * pi[i][j])
        .sum();
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = pi[i][j] - 0.5 * tr_pi * s.g[i][j];
        }
    }
    let mut tr_k = 0.0;
    let mut k2 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr_k += ginv[i][j] * k[i][j];
            for a in 0..3 {
                for b in 0..3 {
                    k2 += ginv[i][a] * ginv[j][b] * k[i][j] * k[a][b];
                }
            }
        }
    }
    let rho = (curv.scalar - k2 + tr_k * tr_k) / (16.0 * PI);
    let mut jv = [0.0; 3];
    for (j, out) in jv.iter_mut().enumerate() {
        let mut v = 0.0;
        for i in 0..3 {
            for kk in 0..3 {
                let mut cov = dpi[kk][i][j];
                for l in 0..3 {
                    cov -= gamma[l][kk][i] * pi[l][j] + gamma[l][kk][j] * pi[i][l];
                }
                v += ginv[i][kk] * cov;
            }
        }
        *out = v / (8.0 * PI);
    }
    Ok((rho, want_momentum.then_some(jv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schw() -> MetricField {
        MetricField::schwarzschild(1.0, [0.0; 3])
    }

    #[test]
    fn euclidean_is_flat() {
        let s = evaluate_metric(&MetricFamily::Euclidean, [1.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.g, linalg3::IDENTITY);
        assert!(s.dg.iter().flatten().flatten().all(|v| *v == 0.0));
        let c = evaluate_curvature(&MetricField::euclidean(), [1.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.scalar, 0.0);
        assert_eq!(
            constraint_residuals(&MetricField::euclidean(), [3.0, 0.0, 0.0], true).unwrap(),
            (0.0, Some([0.0; 3]))
        );
    }

    #[test]
    fn conformal_christoffel_identity() {
        let f = schw();
        let x = [3.0, 4.0, 0.0];
        let gam = evaluate_christoffel(&f, x).unwrap();
        let r = 5.0;
        let u = 1.0 + 0.5 / r;
        // ∂_i log u = -(m/2) x_i / (r³ u)
        let dl: Vec<f64> = x.iter().map(|xi| -0.5 * xi / (r * r * r * u)).collect();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let exp = 2.0 * (d(i, k) * dl[j] + d(j, k) * dl[i] - d(i, j) * dl[k]);
                    assert!((gam[k][i][j] - exp).abs() < 1e-14);
                    assert_eq!(gam[k][i][j], gam[k][j][i]);
                }
            }
        }
    }

    #[test]
    fn schwarzschild_is_scalar_flat_with_clean_symmetries() {
        let f = schw();
        for x in [[12.0, 0.0, 0.0], [5.0, -3.0, 1.0], [40.0, 30.0, -60.0]] {
            let c = f.curvature(x).unwrap();
            assert!(c.scalar.abs() < 1e-12);
            assert!(c.symmetry_defect() < 1e-10);
            let (rho, _) = constraint_residuals(&f, x, false).unwrap();
            assert!(rho.abs() < 1e-9);
        }
    }

    #[test]
    fn ricci_decay_exponent() {
        let f = schw();
        let rs = [20.0, 40.0, 80.0];
        let vals: Vec<f64> = rs
            .iter()
            .map(|r| linalg3::frobenius(&f.curvature([*r, 0.0, 0.0]).unwrap().ricci))
            .collect();
        let fit = crate::fit::fit_power_law(&rs, &vals).unwrap();
        assert!((fit.exponent + 3.0).abs() < 0.3, "{fit:?}");
    }

    #[test]
    fn fd_matches_analytic() {
        let f = schw();
        let x = [10.0, 0.0, 0.0];
        let exact = f.evaluate(x).unwrap();
        let err = |h: f64| {
            let (dg, _) = finite_difference_derivatives(|y| f.metric(y), x, h, 4.0).unwrap();
            let mut e = 0.0f64;
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        e = e.max((dg[k][i][j] - exact.dg[k][i][j]).abs());
                    }
                }
            }
            e
        };
        assert!(err(1e-2) < 1e-8);
        let ratio = err(0.4) / err(0.2);
        assert!((8.0..32.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn fd_second_derivatives_and_stencil_guard() {
        let f = schw();
        let x = [6.0, -2.0, 3.0];
        let exact = f.evaluate(x).unwrap();
        let (_, d2g) = finite_difference_derivatives(|y| f.metric(y), x, 1e-2, 4.0).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert!((d2g[k][l][0][0] - exact.d2g[k][l][0][0]).abs() < 1e-7);
            }
        }
        assert!(matches!(
            finite_difference_derivatives(|y| f.metric(y), [4.01, 0.0, 0.0], 1e-2, 4.0),
            Err(Error::StencilOutsideChart(_))
        ));
    }

    #[test]
    fn harmonic_asymptotics_vacuum_with_momentum_constraint() {
        let mut ha = HarmonicAsymptotics::new(1.0, [0.5, 0.0, 0.0]);
        ha.shift = Some([0.2, -0.1, 0.3]);
        let f = MetricField::new(MetricFamily::HarmonicAsymptotics(ha));
        assert_eq!(f.extrinsic(), ExtrinsicData::Momentum);
        let (rho, j) = constraint_residuals(&f, [20.0, 5.0, -3.0], true).unwrap();
        // K is O(r^-2); ρ is quadratic in K
        assert!(rho.abs() < 1e-5);
        assert!(j.unwrap().iter().all(|v| v.is_finite()));
        let ts = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
            1.0,
            [0.5, 0.0, 0.0],
        )));
        for x in [[5.0, 1.0, 0.0], [60.0, -20.0, 70.0]] {
            assert!(constraint_residuals(&ts, x, false).unwrap().0.abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_needs_extrinsic_data_for_momentum() {
        let rows =
            TabulatedMetric::sample_rows(|_| Some([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]), [-2.0; 3], [1.0; 3], [5, 5, 5]);
        let t = TabulatedMetric::from_rows(&rows, 2).unwrap();
        let f = MetricField::new(MetricFamily::Tabulated(std::sync::Arc::new(t)));
        assert!(matches!(
            constraint_residuals(&f, [0.5, 0.5, 0.5], true),
            Err(Error::MissingExtrinsicData)
        ));
        assert_eq!(constraint_residuals(&f, [0.5, 0.5, 0.5], false).unwrap().0, 0.0);
    }

    #[test]
    fn translation_covariance_is_exact() {
        let c = [1.0, 0.5, -0.25];
        let a = evaluate_metric(
            &MetricFamily::SchwarzschildIsotropic { mass: 1.0, center: c },
            [9.0, 2.5, 0.75],
        )
        .unwrap();
        let b = evaluate_metric(
            &MetricFamily::SchwarzschildIsotropic {
                mass: 1.0,
                center: [0.0; 3],
            },
            [8.0, 2.0, 1.0],
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn finite_difference_mode_tracks_exact_mode() {
        let f = schw().with_derivatives(Derivatives::FiniteDifference { step: None });
        let x = [7.0, 3.0, -1.0];
        let a = f.curvature(x).unwrap();
        let b = schw().curvature(x).unwrap();
        assert!((a.ricci[0][0] - b.ricci[0][0]).abs() < 1e-6);
    }
}
