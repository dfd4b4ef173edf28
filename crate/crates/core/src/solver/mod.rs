//! Construction of CMC leaves.
//!
//! The two-phase scheme starts from the approximate sphere over `S_R(p)`,
//! then alternates a spectral inversion of the flat operator `L₀` on the
//! non-translational modes with a center update driven by the `l = 1` part
//! of the mean-curvature residual. A damped Newton method on the full
//! Jacobi operator serves as an independent cross-check and polish.

mod foliation;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use foliation::{
    build_foliation, nesting_check, uniqueness_probe, FoliationResult, LeafCharges, NestingEntry, ProbeReport,
    ProbeStart,
};

use crate::charges::estimate_mass;
use crate::error::{Error, Result};
use crate::harmonics::{lm_of_index, HarmonicCoeffs, SphereGrid};
use crate::linalg3::{self, Vec3};
use crate::metric::MetricField;
use crate::spectrum::{assemble_jacobi_from_geometry, eigen_solve, SpectrumResult};
use crate::surface::{fundamental_forms, traceless_a_norm, LeafSurface, SurfaceGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    PaperTwoPhase,
    NewtonDirect,
    TwoPhaseThenNewton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Band limit of profiles and quadrature.
    #[serde(rename = "L")]
    pub lmax: usize,
    /// Stopping tolerance on `max |H − H_target|`; `None` means `1e-10 · 2/R`.
    pub tol_residual: Option<f64>,
    pub max_outer: usize,
    pub max_newton: usize,
    pub mode: SolveMode,
    /// Newton step damping in `(0, 1]`.
    pub damping: f64,
    /// Center-update relaxation in `(0, 1]`.
    pub relaxation: f64,
    /// Starting center; defaults to the declared center of mass, else 0.
    pub initial_center: Option<Vec3>,
    /// Mass used by the center update; defaults to the declared mass, else a
    /// flux estimate.
    pub mass_estimate: Option<f64>,
    /// Number of eigenpairs attached to each leaf.
    pub spectrum_count: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            lmax: 24,
            tol_residual: None,
            max_outer: 50,
            max_newton: 25,
            mode: SolveMode::PaperTwoPhase,
            damping: 1.0,
            relaxation: 1.0,
            initial_center: None,
            mass_estimate: None,
            spectrum_count: 4,
        }
    }
}

impl SolveConfig {
    pub fn with_lmax(lmax: usize) -> Self {
        SolveConfig {
            lmax,
            ..Default::default()
        }
    }

    pub fn tolerance(&self, r: f64) -> f64 {
        self.tol_residual.unwrap_or(1e-10 * 2.0 / r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lmax < 2 {
            return Err(Error::InvalidArgument(format!(
                "L must be at least 2 (got {})",
                self.lmax
            )));
        }
        if self.tol_residual.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("tol_residual must be positive".into()));
        }
        if self.max_outer < 1 || self.max_newton < 1 {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping {} outside (0, 1]",
                self.damping
            )));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "relaxation {} outside (0, 1]",
                self.relaxation
            )));
        }
        if self.spectrum_count < 2 {
            return Err(Error::InvalidArgument("spectrum_count must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LeafDiagnostics {
    pub sup_psi: f64,
    /// `sup |ψ(ω) − ψ(−ω)|`.
    pub sup_psi_odd: f64,
    /// `sup |ψ − ψ_{l=0}|`.
    pub sup_psi_nonradial: f64,
    pub sup_traceless_a: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafResult {
    #[serde(skip)]
    pub leaf: LeafSurface,
    pub radius: f64,
    pub center: Vec3,
    pub h_achieved: f64,
    /// `max |H − H_achieved|` over the nodes, from an independent evaluation.
    pub residual: f64,
    pub f_bar: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    pub spectrum: Option<SpectrumResult>,
    pub diagnostics: LeafDiagnostics,
}

/// Obstruction data of the coordinate sphere `S_R(p)`.
#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    /// `A^i = (3/4π) R^{-1+q} ∫ (x^i − p^i) f dσ_e`.
    pub a: Vec3,
    /// Cartesian `l = 1` vector of `f`, so that `f ⊃ b · (x − p)/R`.
    pub b: Vec3,
    pub f_bar: f64,
    /// Coefficients of `f = H_S − 2/R` on the unit sphere.
    #[serde(skip)]
    pub f: HarmonicCoeffs,
}

fn round_sphere_f(field: &MetricField, p: Vec3, r: f64, grid: &Arc<SphereGrid>) -> Result<HarmonicCoeffs> {
    let leaf = LeafSurface::round(p, r, grid.clone())?;
    let h = fundamental_forms(&leaf, field)?.mean_curvature();
    let f: Vec<f64> = h.iter().map(|v| v - 2.0 / r).collect();
    grid.analysis(&f)
}

fn mean_of(c: &HarmonicCoeffs) -> f64 {
    c.get(0, 0) / (4.0 * PI).sqrt()
}

pub fn obstruction_coefficients(field: &MetricField, p: Vec3, r: f64, grid: &Arc<SphereGrid>) -> Result<Obstruction> {
    let f = round_sphere_f(field, p, r, grid)?;
    let (b, _) = f.l1_projection();
    let a = linalg3::scale(b, r.powf(2.0 + field.q()));
    Ok(Obstruction {
        a,
        b,
        f_bar: mean_of(&f),
        f,
    })
}

/// `L₀` eigenvalue `(l(l+1) − 2)/R²` of degree `l`.
fn l0_eigen(l: usize, r: f64) -> f64 {
    ((l * (l + 1)) as f64 - 2.0) / (r * r)
}

/// The approximate sphere: the graph over `S_R(p)` of the solution
/// `φ ⊥ 𝔎` of `L₀ φ = −(f − R^{-3-q} A·(x − p) − f̄)`, which flattens the
/// mean curvature to `2/R + f̄` up to higher order.
pub fn approximate_sphere(field: &MetricField, p: Vec3, r: f64, config: &SolveConfig) -> Result<LeafSurface> {
    config.validate()?;
    let grid = Arc::new(SphereGrid::new(config.lmax)?);
    approximate_sphere_on(field, p, r, grid)
}

fn approximate_sphere_on(field: &MetricField, p: Vec3, r: f64, grid: Arc<SphereGrid>) -> Result<LeafSurface> {
    let ob = obstruction_coefficients(field, p, r, &grid)?;
    let lin = linalg3::scale(ob.a, r.powf(-2.0 - field.q()));
    // source evaluated on the nodes and re-analyzed, so that quadrature
    // inadequacy shows up in its l = 1 part
    let f_nodes = grid.synthesis(&ob.f)?;
    let src: Vec<f64> = f_nodes
        .iter()
        .enumerate()
        .map(|(n, v)| v - linalg3::dot(lin, grid.direction(n)) - ob.f_bar)
        .collect();
    let src = grid.analysis(&src)?;
    let l1 = (-1..=1).fold(0.0f64, |a, m| a.max(src.get(1, m).abs()));
    if l1 > 1e-8 {
        return Err(Error::ObstructionNotCleared(l1));
    }
    let mut phi = HarmonicCoeffs::zeros(grid.lmax());
    for (k, v) in src.as_slice().iter().enumerate() {
        let (l, _) = lm_of_index(k);
        if l != 1 {
            phi.as_mut_slice()[k] = -v / l0_eigen(l, r);
        }
    }
    LeafSurface::new(p, r, phi, grid)
}

/// `p − κ R³ b / (6 m)`: moves the center toward the point where the
/// `l = 1` residual `b = 6m (p − C)/R³` vanishes.
pub fn center_update(p: Vec3, r: f64, b: Vec3, mass: f64, relaxation: f64) -> Result<Vec3> {
    if linalg3::norm(b) == 0.0 {
        return Ok(p);
    }
    if mass.abs() < 1e-10 {
        return Err(Error::ZeroMass(mass));
    }
    Ok(linalg3::sub(
        p,
        linalg3::scale(b, relaxation * r.powi(3) / (6.0 * mass)),
    ))
}

fn diagnostics(leaf: &LeafSurface, geo: &SurfaceGeometry) -> Result<LeafDiagnostics> {
    let grid = leaf.grid();
    let sup = |c: &HarmonicCoeffs| -> Result<f64> { Ok(grid.synthesis(c)?.iter().fold(0.0f64, |a, v| a.max(v.abs()))) };
    let mut nonradial = leaf.profile.clone();
    nonradial.set(0, 0, 0.0);
    Ok(LeafDiagnostics {
        sup_psi: sup(&leaf.profile)?,
        sup_psi_odd: sup(&leaf.profile.odd_part())?,
        sup_psi_nonradial: sup(&nonradial)?,
        sup_traceless_a: traceless_a_norm(geo),
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    field: &MetricField,
    leaf: LeafSurface,
    h_target: f64,
    f_bar: f64,
    iterations: usize,
    newton_iterations: usize,
    converged: bool,
    spectrum_count: usize,
) -> Result<LeafResult> {
    // independent re-evaluation for the residual certificate
    let geo = fundamental_forms(&leaf, field)?;
    let residual = geo
        .nodes
        .iter()
        .fold(0.0f64, |a, n| a.max((n.mean_curvature - h_target).abs()));
    let spectrum = if converged {
        Some(eigen_solve(
            &assemble_jacobi_from_geometry(&leaf, &geo)?,
            spectrum_count,
        )?)
    } else {
        None
    };
    Ok(LeafResult {
        radius: leaf.radius,
        center: leaf.center,
        h_achieved: h_target,
        residual,
        f_bar,
        iterations,
        newton_iterations,
        converged,
        spectrum,
        diagnostics: diagnostics(&leaf, &geo)?,
        leaf,
    })
}

/// Mean-curvature target `2/R + f̄(p)`.
fn averaged_target(field: &MetricField, p: Vec3, r: f64, grid: &Arc<SphereGrid>) -> Result<(f64, f64)> {
    let f_bar = mean_of(&round_sphere_f(field, p, r, grid)?);
    Ok((2.0 / r + f_bar, f_bar))
}

/// Outer fixed-point loop starting from `start` (usually the approximate sphere).
pub fn fixed_point_iterate(
    field: &MetricField,
    start: &LeafSurface,
    mass: f64,
    config: &SolveConfig,
) -> Result<LeafResult> {
    config.validate()?;
    let r = start.radius;
    let tol = config.tolerance(r);
    let grid = start.grid_arc().clone();
    let mut leaf = start.clone();
    let mut best: Option<(f64, LeafSurface, f64, f64)> = None;
    for it in 0..=config.max_outer {
        let (h_t, f_bar) = averaged_target(field, leaf.center, r, &grid)?;
        let h = fundamental_forms(&leaf, field)?.mean_curvature();
        let res: Vec<f64> = h.iter().map(|v| v - h_t).collect();
        let max_res = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let coeffs = grid.analysis(&res)?;
        let (b, rest) = coeffs.l1_projection();
        if best.as_ref().is_none_or(|(m, ..)| max_res < *m) {
            best = Some((max_res, leaf.clone(), h_t, f_bar));
        }
        if max_res <= tol && linalg3::norm(b) <= tol {
            return finish(field, leaf, h_t, f_bar, it, 0, true, config.spectrum_count);
        }
        if it == config.max_outer {
            break;
        }
        let mut psi = leaf.profile.clone();
        for (k, v) in rest.as_slice().iter().enumerate() {
            let (l, _) = lm_of_index(k);
            if l != 1 {
                psi.as_mut_slice()[k] -= v / l0_eigen(l, r);
            }
        }
        let p = if linalg3::norm(b) > tol {
            center_update(leaf.center, r, b, mass, config.relaxation)?
        } else {
            leaf.center
        };
        leaf = LeafSurface::new(p, r, psi, grid.clone())?;
        let sup = grid
            .synthesis(&leaf.profile)?
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if sup > 0.3 * r {
            return Err(Error::NonEmbedded(format!(
                "profile left the graph regime (sup|ψ| = {sup:.3e} > 0.3 R)"
            )));
        }
    }
    let (max_res, leaf, h_t, f_bar) = best.expect("at least one iterate");
    let best = finish(
        field,
        leaf,
        h_t,
        f_bar,
        config.max_outer,
        0,
        false,
        config.spectrum_count,
    )?;
    Err(Error::MaxIterations {
        iterations: config.max_outer,
        residual: max_res,
        best: Box::new(best),
    })
}

/// Which mean curvature Newton's method aims for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NewtonTarget {
    /// `2/R + f̄(p)` at the current center.
    Averaged,
    Fixed(f64),
}

struct NewtonState {
    geo: SurfaceGeometry,
    h_target: f64,
    f_bar: f64,
    /// Weak residuals `∫ Y_b (H − H_target) dσ`.
    weak: DVector<f64>,
    max_res: f64,
}

fn newton_state(field: &MetricField, leaf: &LeafSurface, target: NewtonTarget) -> Result<NewtonState> {
    let grid = leaf.grid_arc();
    let (h_target, f_bar) = match target {
        NewtonTarget::Averaged => averaged_target(field, leaf.center, leaf.radius, grid)?,
        NewtonTarget::Fixed(h) => (h, h - 2.0 / leaf.radius),
    };
    let geo = fundamental_forms(leaf, field)?;
    let res: Vec<f64> = geo.nodes.iter().map(|n| n.mean_curvature - h_target).collect();
    let max_res = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let weighted: Vec<f64> = res
        .iter()
        .zip(&geo.nodes)
        .zip(grid.weights())
        .map(|((r, n), w)| r * n.area_density * w)
        .collect();
    let t = grid.basis_tables(grid.lmax())?;
    let weak = t.y.transpose() * DVector::from_vec(weighted);
    Ok(NewtonState {
        geo,
        h_target,
        f_bar,
        weak,
        max_res,
    })
}

/// Moves any `l = 1` content of the profile into the center.
fn absorb_translation(leaf: &LeafSurface) -> Result<LeafSurface> {
    let (b, rest) = leaf.profile.l1_projection();
    LeafSurface::new(linalg3::add(leaf.center, b), leaf.radius, rest, leaf.grid_arc().clone())
}

/// Damped Newton iteration on the profile modes `l ≠ 1` and the center.
pub fn newton_solve(
    field: &MetricField,
    initial: &LeafSurface,
    target: NewtonTarget,
    config: &SolveConfig,
) -> Result<LeafResult> {
    config.validate()?;
    let r = initial.radius;
    let tol = config.tolerance(r);
    let grid = initial.grid_arc().clone();
    let lmax = grid.lmax();
    let nb = (lmax + 1) * (lmax + 1);
    let tables = grid.basis_tables(lmax)?;
    // unknown slots: profile coefficients with l ≠ 1, then the center
    let free: Vec<usize> = (0..nb).filter(|k| lm_of_index(*k).0 != 1).collect();

    let mut leaf = absorb_translation(initial)?;
    let mut st = newton_state(field, &leaf, target)?;
    let mut best = (st.max_res, leaf.clone(), st.h_target, st.f_bar);
    for it in 0..=config.max_newton {
        if st.max_res <= tol {
            return finish(field, leaf, st.h_target, st.f_bar, 0, it, true, config.spectrum_count);
        }
        if it == config.max_newton {
            break;
        }
        let mut jac = DMatrix::zeros(nb, nb);
        // profile block: weak form of the Jacobi operator applied to s·Y_k
        let speed: Vec<f64> = st.geo.nodes.iter().map(|n| n.speed).collect();
        let ds = grid.synthesis_with_derivatives(&grid.analysis(&speed)?)?;
        let nn = grid.n_nodes();
        let mut a_tt = DMatrix::zeros(nn, nb);
        let mut a_pp = DMatrix::zeros(nn, nb);
        let mut a_v = DMatrix::zeros(nn, nb);
        for (n, g) in st.geo.nodes.iter().enumerate() {
            let w = grid.weights()[n] * g.area_density;
            let [itt, itp, ipp] = g.first_form_inv;
            let s = g.speed;
            let v = g.a_norm2 + g.ricci_normal;
            for k in 0..nb {
                let y = tables.y[(n, k)];
                // components of ∇(s Y_k) in the coordinate basis
                let dt = s * tables.y_t[(n, k)] + y * ds.f_t[n];
                let dp = s * tables.y_p[(n, k)] + y * ds.f_p[n];
                a_tt[(n, k)] = w * (itt * dt + itp * dp);
                a_pp[(n, k)] = w * (itp * dt + ipp * dp);
                a_v[(n, k)] = w * v * s * y;
            }
        }
        let kmat = tables.y_t.transpose() * &a_tt + tables.y_p.transpose() * &a_pp - tables.y.transpose() * &a_v;
        for (c, &k) in free.iter().enumerate() {
            jac.set_column(c, &kmat.column(k));
        }
        // center block by central differences
        let hp = 1e-4 * r;
        for a in 0..3 {
            let mut pp = leaf.center;
            let mut pm = leaf.center;
            pp[a] += hp;
            pm[a] -= hp;
            let fp = newton_state(field, &leaf.with_center(pp), target)?.weak;
            let fm = newton_state(field, &leaf.with_center(pm), target)?.weak;
            jac.set_column(free.len() + a, &((fp - fm) / (2.0 * hp)));
        }
        let step = newton_step(jac, &st.weak, free.len())?;
        // damped step with backtracking on the weak residual
        let mut lambda = config.damping;
        let norm0 = st.weak.norm();
        let mut accepted = None;
        for _ in 0..8 {
            let mut psi = leaf.profile.clone();
            for (c, &k) in free.iter().enumerate() {
                psi.as_mut_slice()[k] += lambda * step[c];
            }
            let p = linalg3::add(
                leaf.center,
                linalg3::scale([step[free.len()], step[free.len() + 1], step[free.len() + 2]], lambda),
            );
            let trial = LeafSurface::new(p, r, psi, grid.clone())?;
            match newton_state(field, &trial, target) {
                Ok(s) if s.weak.norm() < norm0 || lambda < 1e-2 => {
                    accepted = Some((trial, s));
                    break;
                }
                Ok(_) | Err(Error::NonEmbedded(_)) => lambda *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((trial, s)) = accepted else {
            break;
        };
        leaf = trial;
        st = s;
        if st.max_res < best.0 {
            best = (st.max_res, leaf.clone(), st.h_target, st.f_bar);
        }
    }
    let (max_res, leaf, h_t, f_bar) = best;
    let best = finish(
        field,
        leaf,
        h_t,
        f_bar,
        0,
        config.max_newton,
        false,
        config.spectrum_count,
    )?;
    Err(Error::MaxIterations {
        iterations: config.max_newton,
        residual: max_res,
        best: Box::new(best),
    })
}

/// Solves `J δ = −F`. Translation symmetries (flat regions) leave the
/// center columns numerically zero; the minimum-norm least-squares step is
/// used then.
fn newton_step(jac: DMatrix<f64>, weak: &DVector<f64>, n_profile: usize) -> Result<DVector<f64>> {
    let scale = jac.amax();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::SingularJacobian);
    }
    let degenerate = (0..3).any(|a| jac.column(n_profile + a).amax() < 1e-9 * scale);
    let rhs = -weak;
    let step = if degenerate {
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        svd.solve(&rhs, 1e-10 * smax).map_err(|_| Error::SingularJacobian)?
    } else {
        jac.lu().solve(&rhs).ok_or(Error::SingularJacobian)?
    };
    if step.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJacobian);
    }
    Ok(step)
}

fn initial_center(field: &MetricField, config: &SolveConfig) -> Vec3 {
    config.initial_center.or(field.declared_center()).unwrap_or([0.0; 3])
}

/// Solves the leaf of parameter `R` per the configured mode.
pub fn solve_leaf(field: &MetricField, r: f64, config: &SolveConfig) -> Result<LeafResult> {
    config.validate()?;
    if r <= field.r_min() {
        return Err(Error::InvalidArgument(format!(
            "R = {r} is not outside the chart radius r_min = {}",
            field.r_min()
        )));
    }
    let grid = Arc::new(SphereGrid::new(config.lmax)?);
    let p0 = initial_center(field, config);
    let start = approximate_sphere_on(field, p0, r, grid)?;
    solve_from(field, &start, config)
}

/// Solves starting from a given candidate (warm starts, probes).
pub fn solve_from(field: &MetricField, start: &LeafSurface, config: &SolveConfig) -> Result<LeafResult> {
    let mass = match config.mass_estimate {
        Some(m) => m,
        None => estimate_mass(field, start.radius)?,
    };
    match config.mode {
        SolveMode::NewtonDirect => newton_solve(field, start, NewtonTarget::Averaged, config),
        SolveMode::PaperTwoPhase => fixed_point_iterate(field, start, mass, config),
        SolveMode::TwoPhaseThenNewton => {
            let fp = fixed_point_iterate(field, start, mass, config)?;
            let iters = fp.iterations;
            let mut polished = newton_solve(field, &fp.leaf, NewtonTarget::Averaged, config)?;
            polished.iterations = iters;
            Ok(polished)
        }
    }
}

/// Finds the leaf whose target mean curvature `2/R + f̄` equals `h`, by
/// secant iteration on `R`.
pub fn solve_leaf_for_mean_curvature(field: &MetricField, h: f64, config: &SolveConfig) -> Result<LeafResult> {
    config.validate()?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target mean curvature must be positive (got {h})"
        )));
    }
    let grid = Arc::new(SphereGrid::new(config.lmax)?);
    let mut p = initial_center(field, config);
    let mut r = 2.0 / h;
    for _ in 0..10 {
        let g = |r: f64| -> Result<f64> { Ok(averaged_target(field, p, r, &grid)?.0 - h) };
        let (mut r0, mut r1) = (r, r * 1.01);
        let (mut g0, mut g1) = (g(r0)?, g(r1)?);
        for _ in 0..60 {
            if g1 == g0 || g1.abs() <= 1e-15 * h {
                break;
            }
            let r2 = r1 - g1 * (r1 - r0) / (g1 - g0);
            r0 = r1;
            g0 = g1;
            r1 = r2;
            g1 = g(r1)?;
        }
        r = r1;
        let mut cfg = config.clone();
        cfg.initial_center = Some(p);
        let leaf = solve_leaf(field, r, &cfg)?;
        if (leaf.h_achieved - h).abs() <= config.tolerance(r) {
            return Ok(leaf);
        }
        p = leaf.center;
    }
    Err(Error::InvalidArgument(format!("could not match mean curvature {h}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schw(c: Vec3) -> MetricField {
        MetricField::schwarzschild(1.0, c)
    }

    #[test]
    fn euclidean_converges_immediately() {
        let f = MetricField::euclidean();
        let cfg = SolveConfig {
            mass_estimate: Some(0.0),
            ..SolveConfig::with_lmax(6)
        };
        let res = solve_leaf(&f, 5.0, &cfg).unwrap();
        assert_eq!(res.iterations, 0);
        assert!(res.leaf.profile.max_abs() < 1e-14);
        assert!((res.h_achieved - 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_with_obstruction() {
        let b = [1e-3, 0.0, 0.0];
        assert!(matches!(
            center_update([0.0; 3], 10.0, b, 0.0, 1.0),
            Err(Error::ZeroMass(_))
        ));
        assert_eq!(
            center_update([1.0, 2.0, 3.0], 10.0, [0.0; 3], 0.0, 1.0).unwrap(),
            [1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn centered_schwarzschild_leaf_is_round() {
        let cfg = SolveConfig::with_lmax(10);
        let res = solve_leaf(&schw([0.0; 3]), 10.0, &cfg).unwrap();
        let exact = 0.2 * 0.95 / 1.05f64.powi(3);
        assert!((res.h_achieved - exact).abs() < 1e-9 * exact);
        assert!(res.diagnostics.sup_psi_nonradial < 1e-8);
        assert!(linalg3::norm(res.center) < 1e-8);
        let s = res.spectrum.unwrap();
        assert!(s.eta0 < 0.0 && s.mu0 > 0.0);
    }

    #[test]
    fn approximate_sphere_of_centered_schwarzschild_is_trivial() {
        let leaf = approximate_sphere(&schw([0.0; 3]), [0.0; 3], 20.0, &SolveConfig::with_lmax(8)).unwrap();
        assert!(leaf.profile.max_abs() < 1e-10);
    }

    #[test]
    fn center_iteration_finds_shifted_center() {
        let cfg = SolveConfig {
            initial_center: Some([0.0; 3]),
            ..SolveConfig::with_lmax(10)
        };
        let res = solve_leaf(&schw([1.0, 0.0, 0.0]), 12.0, &cfg).unwrap();
        assert!(
            linalg3::norm(linalg3::sub(res.center, [1.0, 0.0, 0.0])) < 1e-6,
            "{:?}",
            res.center
        );
    }

    #[test]
    fn newton_polish_is_quick() {
        let f = schw([0.0; 3]);
        let cfg = SolveConfig::with_lmax(8);
        let fp = solve_leaf(&f, 10.0, &cfg).unwrap();
        let nt = newton_solve(&f, &fp.leaf, NewtonTarget::Averaged, &cfg).unwrap();
        assert!(nt.newton_iterations <= 3);
        let d = fp.leaf.profile.axpy(-1.0, &nt.leaf.profile).max_abs();
        assert!(d < 1e-8);
    }

    #[test]
    fn prescribed_mean_curvature() {
        let f = schw([0.0; 3]);
        let cfg = SolveConfig::with_lmax(6);
        let res = solve_leaf_for_mean_curvature(&f, 0.1, &cfg).unwrap();
        assert!((res.h_achieved - 0.1).abs() < 1e-10);
    }
}
