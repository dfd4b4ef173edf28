//! Leaves as radial graphs `p + (R + ψ(ω)) ω` over round spheres, and their
//! extrinsic geometry under a [`MetricField`].
//!
//! Radial graphs describe the same near-round surfaces as normal graphs over
//! `S_R(p)`; the profile therefore differs from a normal-graph profile by a
//! reparametrization of order `|h| |ψ|`.
//!
//! Area densities are stored relative to `sin θ dθ dφ`, so that quadrature
//! with the grid weights integrates against the induced measures directly.

mod io;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use io::{read_leaf_binary, write_leaf_binary, write_leaf_csv, LEAF_MAGIC};

use crate::error::{Error, Result};
use crate::harmonics::{HarmonicCoeffs, SphereGrid};
use crate::linalg3::{self, Vec3};
use crate::metric::{connection, curvature, MetricField};

/// A leaf candidate: center, radius and radial profile.
#[derive(Clone, Debug)]
pub struct LeafSurface {
    pub center: Vec3,
    pub radius: f64,
    pub profile: HarmonicCoeffs,
    grid: Arc<SphereGrid>,
}

impl LeafSurface {
    pub fn new(center: Vec3, radius: f64, profile: HarmonicCoeffs, grid: Arc<SphereGrid>) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive (got {radius})"
            )));
        }
        if profile.lmax() > grid.lmax() {
            return Err(Error::BandLimitMismatch {
                coeffs: profile.lmax(),
                grid: grid.lmax(),
            });
        }
        Ok(LeafSurface {
            center,
            radius,
            profile: profile.resized(grid.lmax()),
            grid,
        })
    }

    /// The coordinate sphere `S_R(p)`.
    pub fn round(center: Vec3, radius: f64, grid: Arc<SphereGrid>) -> Result<Self> {
        let lmax = grid.lmax();
        Self::new(center, radius, HarmonicCoeffs::zeros(lmax), grid)
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn with_profile(&self, profile: HarmonicCoeffs) -> Result<Self> {
        Self::new(self.center, self.radius, profile, self.grid.clone())
    }

    pub fn with_center(&self, center: Vec3) -> Self {
        LeafSurface { center, ..self.clone() }
    }

    /// Radial distance from the center along direction `dir`.
    pub fn radial_extent(&self, dir: Vec3) -> f64 {
        self.radius + self.profile.evaluate(dir)
    }
}

/// Embedding positions and their angular derivatives per node.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub z: Vec<Vec3>,
    pub z_t: Vec<Vec3>,
    pub z_p: Vec<Vec3>,
    pub z_tt: Vec<Vec3>,
    pub z_tp: Vec<Vec3>,
    pub z_pp: Vec<Vec3>,
    /// `R + ψ` at the nodes.
    pub rho: Vec<f64>,
}

pub fn embed(leaf: &LeafSurface) -> Result<Embedding> {
    let grid = leaf.grid();
    let d = grid.synthesis_with_derivatives(&leaf.profile)?;
    let r = leaf.radius;
    let min_psi = d.f.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_abs = d.f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r + min_psi <= 0.0 {
        return Err(Error::NonEmbedded(format!("R + min ψ = {} <= 0", r + min_psi)));
    }
    if max_abs > 0.5 * r {
        return Err(Error::NonEmbedded(format!("sup|ψ|/R = {} exceeds 0.5", max_abs / r)));
    }
    let nn = grid.n_nodes();
    let mut e = Embedding {
        z: Vec::with_capacity(nn),
        z_t: Vec::with_capacity(nn),
        z_p: Vec::with_capacity(nn),
        z_tt: Vec::with_capacity(nn),
        z_tp: Vec::with_capacity(nn),
        z_pp: Vec::with_capacity(nn),
        rho: Vec::with_capacity(nn),
    };
    let comb = |terms: &[(f64, Vec3)]| -> Vec3 {
        let mut out = [0.0; 3];
        for (c, v) in terms {
            for i in 0..3 {
                out[i] += c * v[i];
            }
        }
        out
    };
    for n in 0..nn {
        let (t, p) = grid.angles(n);
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        let w = [st * cp, st * sp, ct];
        let w_t = [ct * cp, ct * sp, -st];
        let w_p = [-st * sp, st * cp, 0.0];
        let w_tt = [-w[0], -w[1], -w[2]];
        let w_tp = [-ct * sp, ct * cp, 0.0];
        let w_pp = [-st * cp, -st * sp, 0.0];
        let rho = r + d.f[n];
        e.z.push(linalg3::add(leaf.center, linalg3::scale(w, rho)));
        e.z_t.push(comb(&[(d.f_t[n], w), (rho, w_t)]));
        e.z_p.push(comb(&[(d.f_p[n], w), (rho, w_p)]));
        e.z_tt.push(comb(&[(d.f_tt[n], w), (2.0 * d.f_t[n], w_t), (rho, w_tt)]));
        e.z_tp
            .push(comb(&[(d.f_tp[n], w), (d.f_t[n], w_p), (d.f_p[n], w_t), (rho, w_tp)]));
        e.z_pp.push(comb(&[(d.f_pp[n], w), (2.0 * d.f_p[n], w_p), (rho, w_pp)]));
        e.rho.push(rho);
    }
    Ok(e)
}

/// Extrinsic geometry at one node.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NodeGeometry {
    pub z: Vec3,
    pub z_t: Vec3,
    pub z_p: Vec3,
    /// Contravariant `g`-unit outward normal.
    pub normal: Vec3,
    /// Covariant unit normal `ν_i = g_ij ν^j`.
    pub normal_covector: Vec3,
    /// First fundamental form `(γ_θθ, γ_θφ, γ_φφ)`.
    pub first_form: [f64; 3],
    /// Inverse first form `(γ^θθ, γ^θφ, γ^φφ)`.
    pub first_form_inv: [f64; 3],
    /// Second fundamental form `(A_θθ, A_θφ, A_φφ)`.
    pub second_form: [f64; 3],
    pub mean_curvature: f64,
    /// `|A|²` with respect to the first form.
    pub a_norm2: f64,
    /// `|Å|² = |A|² − H²/2`.
    pub traceless_a2: f64,
    /// `Ric(ν, ν)`.
    pub ricci_normal: f64,
    /// `g`-induced area density relative to `sin θ dθ dφ`.
    pub area_density: f64,
    /// Euclidean area density relative to `sin θ dθ dφ`.
    pub area_density_e: f64,
    /// Normal component `g(ω, ν)` of the radial direction.
    pub speed: f64,
}

#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub nodes: Vec<NodeGeometry>,
}

impl SurfaceGeometry {
    pub fn mean_curvature(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mean_curvature).collect()
    }

    pub fn area_density(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.area_density).collect()
    }

    pub fn area_density_e(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.area_density_e).collect()
    }

    /// `∫ f dσ_g` by grid quadrature.
    pub fn integrate(&self, grid: &SphereGrid, f: impl Fn(usize, &NodeGeometry) -> f64) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .zip(grid.weights())
            .map(|((n, g), w)| w * g.area_density * f(n, g))
            .sum()
    }

    /// `∫ f dσ_e` by grid quadrature.
    pub fn integrate_e(&self, grid: &SphereGrid, f: impl Fn(usize, &NodeGeometry) -> f64) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .zip(grid.weights())
            .map(|((n, g), w)| w * g.area_density_e * f(n, g))
            .sum()
    }
}

fn node_geometry(field: &MetricField, leaf: &LeafSurface, e: &Embedding, n: usize) -> Result<NodeGeometry> {
    let grid = leaf.grid();
    let (theta, _) = grid.angles(n);
    let sin_t = theta.sin();
    let z = e.z[n];
    let zt = e.z_t[n];
    let zp = e.z_p[n];
    let sample = field.evaluate(z)?;
    let conn = connection(&sample, z)?;
    let g = &sample.g;
    let ginv = &conn.ginv;
    let gtt = linalg3::bilinear(g, zt, zt);
    let gtp = linalg3::bilinear(g, zt, zp);
    let gpp = linalg3::bilinear(g, zp, zp);
    let det = gtt * gpp - gtp * gtp;
    let r = leaf.radius;
    if det / (sin_t * sin_t) < 1e-12 * r.powi(4) {
        return Err(Error::DegenerateFirstForm { node: n, det });
    }
    let inv = [gpp / det, -gtp / det, gtt / det];

    let mut ncov = linalg3::cross(zt, zp);
    if linalg3::dot(ncov, linalg3::sub(z, leaf.center)) < 0.0 {
        ncov = linalg3::scale(ncov, -1.0);
    }
    let nup = linalg3::mat_vec(ginv, ncov);
    let nnorm = linalg3::dot(ncov, nup).sqrt();
    let nu_cov = linalg3::scale(ncov, 1.0 / nnorm);
    let nu = linalg3::scale(nup, 1.0 / nnorm);

    let gam = &conn.gamma;
    let second = |zab: Vec3, za: Vec3, zb: Vec3| -> f64 {
        let mut v = 0.0;
        for k in 0..3 {
            let mut acc = zab[k];
            for i in 0..3 {
                for j in 0..3 {
                    acc += gam[k][i][j] * za[i] * zb[j];
                }
            }
            v += nu_cov[k] * acc;
        }
        -v
    };
    let a = [
        second(e.z_tt[n], zt, zt),
        second(e.z_tp[n], zt, zp),
        second(e.z_pp[n], zp, zp),
    ];
    let h = inv[0] * a[0] + 2.0 * inv[1] * a[1] + inv[2] * a[2];
    // |A|² = tr((γ⁻¹A)²)
    let m00 = inv[0] * a[0] + inv[1] * a[1];
    let m01 = inv[0] * a[1] + inv[1] * a[2];
    let m10 = inv[1] * a[0] + inv[2] * a[1];
    let m11 = inv[1] * a[1] + inv[2] * a[2];
    let a2 = m00 * m00 + 2.0 * m01 * m10 + m11 * m11;

    let ric = curvature(&sample, z)?.ricci;
    let ricci_normal = linalg3::bilinear(&ric, nu, nu);

    let et = linalg3::dot(zt, zt);
    let ep = linalg3::dot(zp, zp);
    let etp = linalg3::dot(zt, zp);
    let omega = grid.direction(n);
    Ok(NodeGeometry {
        z,
        z_t: zt,
        z_p: zp,
        normal: nu,
        normal_covector: nu_cov,
        first_form: [gtt, gtp, gpp],
        first_form_inv: inv,
        second_form: a,
        mean_curvature: h,
        a_norm2: a2,
        traceless_a2: a2 - 0.5 * h * h,
        ricci_normal,
        area_density: det.sqrt() / sin_t,
        area_density_e: (et * ep - etp * etp).sqrt() / sin_t,
        speed: linalg3::dot(nu_cov, omega),
    })
}

/// Full extrinsic geometry of a leaf, computed node-parallel.
pub fn fundamental_forms(leaf: &LeafSurface, field: &MetricField) -> Result<SurfaceGeometry> {
    let e = embed(leaf)?;
    let nodes = (0..leaf.grid().n_nodes())
        .into_par_iter()
        .map(|n| node_geometry(field, leaf, &e, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGeometry { nodes })
}

pub fn mean_curvature_field(leaf: &LeafSurface, field: &MetricField) -> Result<Vec<f64>> {
    Ok(fundamental_forms(leaf, field)?.mean_curvature())
}

/// `(|N|_g, |N|_e)`.
pub fn area(leaf: &LeafSurface, field: &MetricField) -> Result<(f64, f64)> {
    let geo = fundamental_forms(leaf, field)?;
    let grid = leaf.grid();
    Ok((geo.integrate(grid, |_, _| 1.0), geo.integrate_e(grid, |_, _| 1.0)))
}

/// Sup over nodes of `|Å|`.
pub fn traceless_a_norm(geo: &SurfaceGeometry) -> f64 {
    geo.nodes
        .iter()
        .fold(0.0f64, |a, n| a.max(n.traceless_a2.max(0.0).sqrt()))
}

/// The explicit expansion of the mean curvature of `S_R(p)` in powers of
/// `h = g − δ`, without its remainder term.
pub fn mc_expansion_eval(field: &MetricField, p: Vec3, r: f64, grid: &SphereGrid) -> Result<Vec<f64>> {
    (0..grid.n_nodes())
        .map(|n| {
            let w = grid.direction(n);
            let x = linalg3::add(p, linalg3::scale(w, r));
            let s = field.evaluate(x)?;
            let mut v = 2.0 / r;
            let mut tr_h = 0.0;
            for i in 0..3 {
                tr_h += s.g[i][i] - 1.0;
                v += 0.5 * (0..3).map(|j| s.dg[j][i][i] * w[j]).sum::<f64>();
                for j in 0..3 {
                    let hij = s.g[i][j] - if i == j { 1.0 } else { 0.0 };
                    v += 2.0 * hij * w[i] * w[j] / r;
                    v -= s.dg[i][i][j] * w[j];
                    for k in 0..3 {
                        v += 0.5 * s.dg[k][i][j] * w[i] * w[j] * w[k];
                    }
                }
            }
            Ok(v - tr_h / r)
        })
        .collect()
}

/// Sup over both leaves of the radial gap to the other leaf, measured along
/// rays from the other leaf's center: a parametrization-independent distance.
pub fn surface_distance(a: &LeafSurface, b: &LeafSurface) -> Result<f64> {
    let one_way = |s: &LeafSurface, t: &LeafSurface| -> Result<f64> {
        let e = embed(s)?;
        Ok(e.z
            .iter()
            .map(|z| {
                let d = linalg3::sub(*z, t.center);
                (linalg3::norm(d) - t.radial_extent(d)).abs()
            })
            .fold(0.0, f64::max))
    };
    Ok(one_way(a, b)?.max(one_way(b, a)?))
}
