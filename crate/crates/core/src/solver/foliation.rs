//! Families of leaves: continuation in `R`, nesting and the uniqueness probe.

use rayon::prelude::*;
use serde::Serialize;

use super::{newton_solve, solve_from, solve_leaf, LeafResult, NewtonTarget, SolveConfig};
use crate::charges::{estimate_mass, geometric_center, hawking_mass_from_geometry, leaf_centroid, GeometricCenter};
use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::linalg3::{self, Vec3};
use crate::metric::MetricField;
use crate::surface::{fundamental_forms, surface_distance, LeafSurface};

#[derive(Clone, Debug, Serialize)]
pub struct NestingEntry {
    pub r_inner: f64,
    pub r_outer: f64,
    pub lapse_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafCharges {
    pub radius: f64,
    pub hawking_mass: f64,
    pub centroid: Vec3,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationResult {
    pub leaves: Vec<LeafResult>,
    /// One entry per adjacent pair of solved leaves.
    pub nesting: Vec<NestingEntry>,
    pub charges: Vec<LeafCharges>,
    pub geometric_center: Option<GeometricCenter>,
    /// Radii whose solve failed, with the error text.
    pub failures: Vec<(f64, String)>,
    pub success: bool,
}

impl FoliationResult {
    pub fn lapse_min(&self) -> Option<f64> {
        self.nesting.iter().map(|e| e.lapse_min).reduce(f64::min)
    }
}

/// Minimum over rays from `a`'s center of the radial gap between the leaves.
pub fn nesting_check(a: &LeafSurface, b: &LeafSurface) -> Result<f64> {
    if b.radius < a.radius {
        return Err(Error::InvalidArgument(format!(
            "nesting needs R_a <= R_b (got {} and {})",
            a.radius, b.radius
        )));
    }
    let delta = linalg3::sub(a.center, b.center);
    let dist = linalg3::norm(delta);
    let spacing = b.radius - a.radius;
    if dist > 0.5 * spacing {
        return Err(Error::CenterMismatchTooLarge {
            distance: dist,
            spacing,
        });
    }
    let grid = a.grid();
    let rho_a = grid.synthesis(&a.profile)?;
    let mut lapse = f64::INFINITY;
    for (n, ra) in rho_a.iter().enumerate() {
        let w = grid.direction(n);
        let dw = linalg3::dot(delta, w);
        // solve |p_a + t w − p_b| = R_b + ψ_b(direction from p_b)
        let mut t = b.radial_extent(w);
        for _ in 0..100 {
            let x = linalg3::add(delta, linalg3::scale(w, t));
            let rb = b.radial_extent(x);
            let disc = dw * dw - dist * dist + rb * rb;
            if disc < 0.0 {
                return Err(Error::NonEmbedded("ray misses the outer leaf".into()));
            }
            let next = -dw + disc.sqrt();
            let done = (next - t).abs() <= 1e-14 * t.abs().max(1.0);
            t = next;
            if done {
                break;
            }
        }
        lapse = lapse.min(t - (a.radius + ra));
    }
    Ok(lapse)
}

fn leaf_charges(field: &MetricField, leaf: &LeafResult) -> Result<LeafCharges> {
    let geo = fundamental_forms(&leaf.leaf, field)?;
    Ok(LeafCharges {
        radius: leaf.radius,
        hawking_mass: hawking_mass_from_geometry(&leaf.leaf, &geo),
        centroid: leaf_centroid(&leaf.leaf, &geo),
    })
}

/// Solves the leaves for increasing `radii`. With `warm` each leaf starts
/// from the previous one (profile rescaled by `(R_{k+1}/R_k)^{1−q}`);
/// otherwise leaves are solved independently in parallel.
pub fn build_foliation(
    field: &MetricField,
    radii: &[f64],
    config: &SolveConfig,
    warm: bool,
) -> Result<FoliationResult> {
    config.validate()?;
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    let mut config = config.clone();
    if config.mass_estimate.is_none() {
        config.mass_estimate = Some(estimate_mass(field, radii[0])?);
    }
    let outcomes: Vec<Result<LeafResult>> = if warm {
        let q = field.q();
        let mut out = Vec::with_capacity(radii.len());
        let mut prev: Option<LeafResult> = None;
        for &r in radii {
            let res = match &prev {
                Some(p) => {
                    let scale = (r / p.radius).powf(1.0 - q);
                    LeafSurface::new(p.center, r, p.leaf.profile.scaled(scale), p.leaf.grid_arc().clone())
                        .and_then(|start| solve_from(field, &start, &config))
                        .or_else(|_| solve_leaf(field, r, &config))
                }
                None => solve_leaf(field, r, &config),
            };
            prev = res.as_ref().ok().cloned();
            out.push(res);
        }
        out
    } else {
        radii.par_iter().map(|&r| solve_leaf(field, r, &config)).collect()
    };

    let mut leaves = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in radii.iter().zip(outcomes) {
        match res {
            Ok(l) => leaves.push(l),
            Err(e) => failures.push((*r, e.to_string())),
        }
    }
    let mut nesting = Vec::new();
    for w in leaves.windows(2) {
        let lapse_min = match nesting_check(&w[0].leaf, &w[1].leaf) {
            Ok(v) => v,
            Err(e) => {
                failures.push((w[1].radius, format!("nesting: {e}")));
                f64::NAN
            }
        };
        nesting.push(NestingEntry {
            r_inner: w[0].radius,
            r_outer: w[1].radius,
            lapse_min,
        });
    }
    let charges = leaves
        .iter()
        .map(|l| leaf_charges(field, l))
        .collect::<Result<Vec<_>>>()?;
    let geometric_center = if charges.len() >= 3 {
        let rs: Vec<f64> = charges.iter().map(|c| c.radius).collect();
        let cs: Vec<Vec3> = charges.iter().map(|c| c.centroid).collect();
        Some(geometric_center(&rs, &cs, field.q())?)
    } else {
        None
    };
    let success = failures.is_empty() && nesting.iter().all(|e| e.lapse_min > 0.0);
    Ok(FoliationResult {
        leaves,
        nesting,
        charges,
        geometric_center,
        failures,
        success,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeStart {
    /// Sup norm of the perturbation on the grid.
    pub amplitude: f64,
    pub converged: bool,
    /// Surface-to-surface distance to the reference leaf.
    pub distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub radius: f64,
    pub h_target: f64,
    pub threshold: f64,
    pub starts: Vec<ProbeStart>,
    pub success: bool,
}

/// Runs Newton with the reference leaf's mean curvature from perturbed
/// profiles and checks that every start returns to the same surface.
pub fn uniqueness_probe(
    field: &MetricField,
    reference: &LeafResult,
    perturbations: &[HarmonicCoeffs],
    config: &SolveConfig,
) -> Result<ProbeReport> {
    let r = reference.radius;
    let grid = reference.leaf.grid_arc().clone();
    let limit = 0.1 * r.powf(1.0 - field.q());
    let tol = config.tolerance(r);
    let lam = reference
        .spectrum
        .as_ref()
        .map(|s| s.min_abs_eigenvalue)
        .filter(|v| *v > 0.0)
        .unwrap_or(1.0 / (r * r));
    let threshold = 10.0 * tol / lam;
    let starts: Vec<ProbeStart> = perturbations
        .par_iter()
        .map(|pert| {
            let run = || -> Result<(f64, LeafResult)> {
                let amp = grid
                    .synthesis(&pert.resized(grid.lmax()))?
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                if amp > limit {
                    return Err(Error::InvalidArgument(format!(
                        "perturbation amplitude {amp:.3e} exceeds 0.1 R^(1-q) = {limit:.3e}"
                    )));
                }
                let start = reference
                    .leaf
                    .with_profile(reference.leaf.profile.axpy(1.0, &pert.resized(grid.lmax())))?;
                Ok((
                    amp,
                    newton_solve(field, &start, NewtonTarget::Fixed(reference.h_achieved), config)?,
                ))
            };
            match run() {
                Ok((amplitude, res)) => match surface_distance(&res.leaf, &reference.leaf) {
                    Ok(d) => ProbeStart {
                        amplitude,
                        converged: true,
                        distance: Some(d),
                        error: None,
                    },
                    Err(e) => ProbeStart {
                        amplitude,
                        converged: true,
                        distance: None,
                        error: Some(e.to_string()),
                    },
                },
                Err(e) => ProbeStart {
                    amplitude: pert.max_abs(),
                    converged: false,
                    distance: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let success = starts
        .iter()
        .all(|s| s.converged && s.distance.is_some_and(|d| d <= threshold));
    Ok(ProbeReport {
        radius: r,
        h_target: reference.h_achieved,
        threshold,
        starts,
        success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::SphereGrid;
    use std::sync::Arc;

    #[test]
    fn concentric_spheres_gap() {
        let g = Arc::new(SphereGrid::new(4).unwrap());
        let a = LeafSurface::round([0.0; 3], 10.0, g.clone()).unwrap();
        let b = LeafSurface::round([0.0; 3], 11.0, g.clone()).unwrap();
        assert!((nesting_check(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nesting_check(&a, &a).unwrap(), 0.0);
        let c = LeafSurface::round([0.3, 0.0, 0.0], 11.0, g.clone()).unwrap();
        let gap = nesting_check(&a, &c).unwrap();
        assert!((gap - 0.7).abs() < 1e-12, "{gap}");
        let d = LeafSurface::round([0.6, 0.0, 0.0], 11.0, g).unwrap();
        assert!(matches!(
            nesting_check(&a, &d),
            Err(Error::CenterMismatchTooLarge { .. })
        ));
    }

    #[test]
    fn schwarzschild_foliation_nests() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let cfg = SolveConfig::with_lmax(6);
        let fol = build_foliation(&f, &[10.0, 12.0, 14.0], &cfg, true).unwrap();
        assert!(fol.success);
        for e in &fol.nesting {
            assert!((e.lapse_min - 2.0).abs() < 1e-6);
        }
        let cold = build_foliation(&f, &[10.0, 12.0, 14.0], &cfg, false).unwrap();
        for (a, b) in fol.leaves.iter().zip(&cold.leaves) {
            assert!((a.h_achieved - b.h_achieved).abs() < 1e-12);
        }
        let single = build_foliation(&f, &[10.0], &cfg, true).unwrap();
        assert!(single.nesting.is_empty() && single.geometric_center.is_none());
    }

    #[test]
    fn probe_returns_to_round_leaf() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let cfg = SolveConfig::with_lmax(6);
        let leaf = solve_leaf(&f, 20.0, &cfg).unwrap();
        let perts = vec![
            HarmonicCoeffs::zeros(6),
            HarmonicCoeffs::single(6, 2, 0, 0.05),
            HarmonicCoeffs::single(6, 1, 1, 0.05),
        ];
        let rep = uniqueness_probe(&f, &leaf, &perts, &cfg).unwrap();
        assert!(rep.success, "{rep:?}");
        assert!(rep.starts[0].distance.unwrap() < 1e-12);
        let big = vec![HarmonicCoeffs::single(6, 2, 0, 10.0)];
        let rep = uniqueness_probe(&f, &leaf, &big, &cfg).unwrap();
        assert!(!rep.success && !rep.starts[0].converged);
    }
}
