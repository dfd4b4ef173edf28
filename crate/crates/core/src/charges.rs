//! Asymptotic charges: ADM mass from the metric flux and from the Einstein
//! tensor, the Hamiltonian center of mass, Hawking masses of leaves, the
//! geometric center of a foliation, and the mean-curvature/center identity.
//!
//! Limits at infinity are realized by least-squares extrapolation in inverse
//! powers of the radius; the fit residual is always reported.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{extrapolate, Extrapolation};
use crate::harmonics::SphereGrid;
use crate::linalg3::{self, Vec3};
use crate::metric::MetricField;
use crate::surface::{fundamental_forms, LeafSurface, SurfaceGeometry};

/// Band limit of the quadrature used for coordinate-sphere flux integrals.
pub const CHARGE_LMAX: usize = 16;

fn charge_grid() -> SphereGrid {
    SphereGrid::new(CHARGE_LMAX).expect("nonzero band limit")
}

/// `(1/16π) ∮_{|x|=r} Σ (g_ij,i − g_ii,j) x^j/|x| dσ_e`.
pub fn adm_mass_flux(field: &MetricField, r: f64) -> Result<f64> {
    adm_mass_flux_on(field, r, &charge_grid())
}

pub fn adm_mass_flux_on(field: &MetricField, r: f64, grid: &SphereGrid) -> Result<f64> {
    let mut acc = 0.0;
    for (n, w) in grid.weights().iter().enumerate() {
        let om = grid.direction(n);
        let s = field.evaluate(linalg3::scale(om, r))?;
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += (s.dg[i][i][j] - s.dg[j][i][i]) * om[j];
            }
        }
        acc += w * r * r * v;
    }
    Ok(acc / (16.0 * PI))
}

/// `(1/16π) ∮_{|x|=r} (Ric_ij − ½ R g_ij)(−2x^i) x^j/|x| dσ_e`.
pub fn adm_mass_ricci(field: &MetricField, r: f64) -> Result<f64> {
    let grid = charge_grid();
    let mut acc = 0.0;
    for (n, w) in grid.weights().iter().enumerate() {
        let om = grid.direction(n);
        let x = linalg3::scale(om, r);
        let g = field.metric(x)?;
        let c = field.curvature(x)?;
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += (c.ricci[i][j] - 0.5 * c.scalar * g[i][j]) * (-2.0 * x[i]) * om[j];
            }
        }
        acc += w * r * r * v;
    }
    Ok(acc / (16.0 * PI))
}

/// The bracket of the center-of-mass flux at radius `r`, divided by `16π m`.
pub fn center_of_mass(field: &MetricField, r: f64, mass: f64) -> Result<Vec3> {
    if mass.abs() < 1e-10 {
        return Err(Error::ZeroMass(mass));
    }
    let grid = charge_grid();
    let mut acc = [0.0; 3];
    for (n, w) in grid.weights().iter().enumerate() {
        let om = grid.direction(n);
        let x = linalg3::scale(om, r);
        let s = field.evaluate(x)?;
        let mut flux = 0.0;
        let mut tr = 0.0;
        for i in 0..3 {
            tr += s.g[i][i];
            for j in 0..3 {
                flux += (s.dg[i][i][j] - s.dg[j][i][i]) * om[j];
            }
        }
        for a in 0..3 {
            let second: f64 = (0..3).map(|i| s.g[i][a] * om[i]).sum::<f64>() - tr * om[a];
            acc[a] += w * r * r * (x[a] * flux - second);
        }
    }
    Ok(linalg3::scale(acc, 1.0 / (16.0 * PI * mass)))
}

/// Per-radius samples of a charge and their extrapolation to infinity.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeSeries {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub exponents: Vec<f64>,
    pub residual: f64,
}

impl ChargeSeries {
    /// Fits `limit + Σ c_k r^{-e_k}`; needs at least 3 radii.
    pub fn fit(radii: &[f64], values: &[f64], exponents: &[f64]) -> Result<Self> {
        if radii.len() < 3 {
            return Err(Error::InsufficientRadii {
                count: radii.len(),
                ratio: radii.last().unwrap_or(&0.0) / radii.first().unwrap_or(&1.0),
            });
        }
        let exps: Vec<f64> = exponents.iter().cloned().take(radii.len() - 1).collect();
        let Extrapolation { limit, residual, .. } = extrapolate(radii, values, &exps)?;
        Ok(ChargeSeries {
            radii: radii.to_vec(),
            values: values.to_vec(),
            limit,
            exponents: exps,
            residual,
        })
    }
}

fn sample<F>(radii: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    radii.par_iter().map(|r| f(*r)).collect()
}

/// Mass series from the metric flux with decay model `r^{-q}, r^{-2q}`.
pub fn mass_flux_series(field: &MetricField, radii: &[f64]) -> Result<ChargeSeries> {
    let q = field.q();
    let v = sample(radii, |r| adm_mass_flux(field, r))?;
    ChargeSeries::fit(radii, &v, &[q, 2.0 * q])
}

pub fn mass_ricci_series(field: &MetricField, radii: &[f64]) -> Result<ChargeSeries> {
    let q = field.q();
    let v = sample(radii, |r| adm_mass_ricci(field, r))?;
    ChargeSeries::fit(radii, &v, &[q, 2.0 * q])
}

/// Center-of-mass components with decay model `r^{1-2q}, r^{-q}`.
pub fn center_series(field: &MetricField, radii: &[f64], mass: f64) -> Result<[ChargeSeries; 3]> {
    let q = field.q();
    let pts = radii
        .par_iter()
        .map(|r| center_of_mass(field, *r, mass))
        .collect::<Result<Vec<_>>>()?;
    let mut exps = vec![2.0 * q - 1.0, q];
    if exps[0] <= 0.0 {
        exps.remove(0);
    }
    let comp = |a: usize| ChargeSeries::fit(radii, &pts.iter().map(|p| p[a]).collect::<Vec<_>>(), &exps);
    Ok([comp(0)?, comp(1)?, comp(2)?])
}

/// Mass estimate for the center update: declared mass, else the
/// extrapolated flux mass over `r0, 2r0, 4r0`.
pub fn estimate_mass(field: &MetricField, r0: f64) -> Result<f64> {
    if let Some(m) = field.declared_mass() {
        return Ok(m);
    }
    let r0 = r0.max(2.0 * field.r_min()).max(1.0);
    Ok(mass_flux_series(field, &[r0, 2.0 * r0, 4.0 * r0])?.limit)
}

/// `√(|N|/16π) (16π − ∮ H² dσ) / 16π`.
pub fn hawking_mass_from_geometry(leaf: &LeafSurface, geo: &SurfaceGeometry) -> f64 {
    let grid = leaf.grid();
    let area = geo.integrate(grid, |_, _| 1.0);
    let h2 = geo.integrate(grid, |_, n| n.mean_curvature * n.mean_curvature);
    (area / (16.0 * PI)).sqrt() * (16.0 * PI - h2) / (16.0 * PI)
}

pub fn hawking_mass(leaf: &LeafSurface, field: &MetricField) -> Result<f64> {
    let geo = fundamental_forms(leaf, field)?;
    Ok(hawking_mass_from_geometry(leaf, &geo))
}

/// Euclidean area centroid `∮ X dσ_e / ∮ dσ_e` of a leaf.
pub fn leaf_centroid(leaf: &LeafSurface, geo: &SurfaceGeometry) -> Vec3 {
    let grid = leaf.grid();
    let a = geo.integrate_e(grid, |_, _| 1.0);
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = geo.integrate_e(grid, |_, n| n.z[k]) / a;
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricCenter {
    pub radii: Vec<f64>,
    pub centroids: Vec<Vec3>,
    pub limit: Vec3,
    pub exponent: f64,
    pub residual: f64,
}

/// Extrapolates leaf centroids with the model `a + b R^{1−2q}`.
pub fn geometric_center(radii: &[f64], centroids: &[Vec3], q: f64) -> Result<GeometricCenter> {
    if radii.len() < 3 {
        return Err(Error::InsufficientLeaves(radii.len()));
    }
    let e = 2.0 * q - 1.0;
    let mut limit = [0.0; 3];
    let mut residual = 0.0f64;
    for (a, l) in limit.iter_mut().enumerate() {
        let vals: Vec<f64> = centroids.iter().map(|c| c[a]).collect();
        let fit = extrapolate(radii, &vals, &[e])?;
        *l = fit.limit;
        residual = residual.max(fit.residual);
    }
    Ok(GeometricCenter {
        radii: radii.to_vec(),
        centroids: centroids.to_vec(),
        limit,
        exponent: e,
        residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CenterIdentity {
    pub lhs: Vec3,
    pub rhs: Vec3,
    pub gap: f64,
}

/// Compares `∮_{S_R(p)} (x − p)(H − 2/R) dσ_e` with `8π m (p − C)`.
pub fn center_identity_check(
    field: &MetricField,
    p: Vec3,
    r: f64,
    grid: std::sync::Arc<SphereGrid>,
    mass: f64,
    center: Vec3,
) -> Result<CenterIdentity> {
    if mass.abs() < 1e-10 {
        return Err(Error::ZeroMass(mass));
    }
    let leaf = LeafSurface::round(p, r, grid)?;
    let geo = fundamental_forms(&leaf, field)?;
    let g = leaf.grid();
    let mut lhs = [0.0; 3];
    for (a, l) in lhs.iter_mut().enumerate() {
        *l = geo.integrate_e(g, |_, n| (n.z[a] - p[a]) * (n.mean_curvature - 2.0 / r));
    }
    let rhs = linalg3::scale(linalg3::sub(p, center), 8.0 * PI * mass);
    Ok(CenterIdentity {
        lhs,
        rhs,
        gap: linalg3::norm(linalg3::sub(lhs, rhs)),
    })
}

/// Summary of all charges for a field.
#[derive(Clone, Debug, Serialize)]
pub struct Charges {
    pub m_flux: ChargeSeries,
    pub m_ricci: ChargeSeries,
    /// `None` when the mass vanishes.
    pub center: Option<Vec3>,
    pub center_series: Option<[ChargeSeries; 3]>,
}

pub fn compute_charges(field: &MetricField, radii: &[f64]) -> Result<Charges> {
    let m_flux = mass_flux_series(field, radii)?;
    let m_ricci = mass_ricci_series(field, radii)?;
    let m = field.declared_mass().unwrap_or(m_flux.limit);
    let (center, series) = if m.abs() < 1e-10 {
        (None, None)
    } else {
        let s = center_series(field, radii, m)?;
        (Some([s[0].limit, s[1].limit, s[2].limit]), Some(s))
    };
    Ok(Charges {
        m_flux,
        m_ricci,
        center,
        center_series: series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{HarmonicAsymptotics, MetricFamily, PerturbedRT};
    use std::sync::Arc;

    #[test]
    fn flat_charges_vanish() {
        let f = MetricField::euclidean();
        assert_eq!(adm_mass_flux(&f, 10.0).unwrap(), 0.0);
        assert_eq!(adm_mass_ricci(&f, 10.0).unwrap(), 0.0);
        assert!(matches!(center_of_mass(&f, 10.0, 0.0), Err(Error::ZeroMass(_))));
    }

    #[test]
    fn schwarzschild_flux_closed_form() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        for r in [20.0, 100.0] {
            let u: f64 = 1.0 + 0.5 / r;
            assert!((adm_mass_flux(&f, r).unwrap() - u.powi(3)).abs() < 1e-12);
            assert!((adm_mass_ricci(&f, r).unwrap() - u.powi(-2)).abs() < 1e-10);
        }
        let s = mass_ricci_series(&f, &[50.0, 100.0, 200.0]).unwrap();
        assert!((s.limit - 1.0).abs() < 1e-3);
    }

    #[test]
    fn even_perturbation_adds_no_flux() {
        let base = MetricFamily::SchwarzschildIsotropic {
            mass: 1.0,
            center: [0.0; 3],
        };
        let p = MetricField::new(MetricFamily::PerturbedRT(
            PerturbedRT::new(base, 0.3, 0.75, 2, 1).unwrap(),
        ));
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        for r in [10.0, 40.0] {
            assert!((adm_mass_flux(&p, r).unwrap() - adm_mass_flux(&f, r).unwrap()).abs() < 1e-12);
        }
        let c = center_of_mass(&p, 40.0, 1.0).unwrap();
        assert!(linalg3::norm(c) < 1e-12);
    }

    #[test]
    fn hawking_mass_of_schwarzschild_spheres() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let g = Arc::new(SphereGrid::new(8).unwrap());
        for r in [10.0, 20.0, 40.0] {
            let leaf = LeafSurface::round([0.0; 3], r, g.clone()).unwrap();
            assert!((hawking_mass(&leaf, &f).unwrap() - 1.0).abs() < 1e-10);
        }
        let leaf = LeafSurface::round([0.0; 3], 5.0, g).unwrap();
        assert!(hawking_mass(&leaf, &MetricField::euclidean()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn shifted_schwarzschild_center() {
        let f = MetricField::schwarzschild(1.0, [1.0, 0.0, 0.0]);
        let s = center_series(&f, &[50.0, 100.0, 200.0], 1.0).unwrap();
        assert!((s[0].limit - 1.0).abs() < 1e-3);
        assert!(s[1].limit.abs() < 1e-9);
    }

    #[test]
    fn dipole_center_is_d_over_m() {
        let f = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
            2.0,
            [0.5, 0.0, -1.0],
        )));
        let s = center_series(&f, &[50.0, 100.0, 200.0], 2.0).unwrap();
        assert!((s[0].limit - 0.25).abs() < 1e-3);
        assert!((s[2].limit + 0.5).abs() < 1e-3);
    }

    #[test]
    fn centered_identity_vanishes() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let g = Arc::new(SphereGrid::new(8).unwrap());
        let c = center_identity_check(&f, [0.0; 3], 20.0, g, 1.0, [0.0; 3]).unwrap();
        assert!(c.gap < 1e-8);
    }

    #[test]
    fn centroids_extrapolate() {
        let rs = [10.0, 20.0, 40.0];
        let cs: Vec<Vec3> = rs.iter().map(|r| [1.0 + 2.0 / r, 0.0, 0.5]).collect();
        let gc = geometric_center(&rs, &cs, 1.0).unwrap();
        assert!((gc.limit[0] - 1.0).abs() < 1e-12);
        assert!(geometric_center(&rs[..2], &cs[..2], 1.0).is_err());
    }
}
