//! Galerkin discretization of the Jacobi operator
//! `L = −Δ − (|A|² + Ric(ν, ν))` on a leaf, the flat reference operator
//! `L₀ = −Δ_e − 2/R²`, and their low spectrum.
//!
//! Matrices live in the real harmonic basis of the leaf's band limit and are
//! integrated with the leaf's grid against the induced area measure.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::{lm_of_index, HarmonicCoeffs, SphereGrid};
use crate::linalg3;
use crate::metric::MetricField;
use crate::surface::{fundamental_forms, LeafSurface, SurfaceGeometry};

/// Weak form `⟨∇φ_a, ∇φ_b⟩ + ⟨−Vφ_a, φ_b⟩` and Gram matrix of the basis.
#[derive(Clone, Debug)]
pub struct JacobiMatrix {
    /// Gradient part.
    pub stiffness: DMatrix<f64>,
    /// `−∫ V φ_a φ_b`.
    pub potential: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// `∫ φ_b dσ`; mean-zero functions are its orthogonal complement.
    pub constraint: DVector<f64>,
    pub lmax: usize,
}

impl JacobiMatrix {
    /// The symmetric bilinear form of the operator.
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.stiffness + &self.potential
    }

    /// `M⁻¹ K`: the operator acting on coefficient vectors.
    pub fn operator(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::EigSolverFailure("mass matrix is not positive definite".into()))?;
        Ok(chol.solve(&self.matrix()))
    }

    /// `‖K − Kᵀ‖_max / ‖K‖_max`.
    pub fn symmetry_defect(&self) -> f64 {
        let k = self.matrix();
        let scale = k.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&k - k.transpose()).amax() / scale
    }
}

fn scaled_rows(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

/// Assembles the Jacobi form on precomputed geometry.
pub fn assemble_jacobi_from_geometry(leaf: &LeafSurface, geo: &SurfaceGeometry) -> Result<JacobiMatrix> {
    let grid = leaf.grid();
    let lmax = leaf.profile.lmax();
    let t = grid.basis_tables(lmax)?;
    let w: Vec<f64> = grid
        .weights()
        .iter()
        .zip(&geo.nodes)
        .map(|(w, n)| w * n.area_density)
        .collect();
    let pick = |f: &dyn Fn(&crate::surface::NodeGeometry) -> f64| -> Vec<f64> {
        geo.nodes.iter().zip(&w).map(|(n, w)| w * f(n)).collect()
    };
    let wtt = pick(&|n| n.first_form_inv[0]);
    let wtp = pick(&|n| n.first_form_inv[1]);
    let wpp = pick(&|n| n.first_form_inv[2]);
    let wv = pick(&|n| n.a_norm2 + n.ricci_normal);

    let cross = t.y_t.transpose() * scaled_rows(&t.y_p, &wtp);
    let mut stiffness = t.y_t.transpose() * scaled_rows(&t.y_t, &wtt) + t.y_p.transpose() * scaled_rows(&t.y_p, &wpp);
    stiffness += &cross + cross.transpose();
    let potential = -(t.y.transpose() * scaled_rows(&t.y, &wv));
    let mass = t.y.transpose() * scaled_rows(&t.y, &w);
    let constraint = t.y.transpose() * DVector::from_vec(w);
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    Ok(JacobiMatrix {
        stiffness: sym(stiffness),
        potential: sym(potential),
        mass: sym(mass),
        constraint,
        lmax,
    })
}

pub fn assemble_jacobi(leaf: &LeafSurface, field: &MetricField) -> Result<JacobiMatrix> {
    let geo = fundamental_forms(leaf, field)?;
    assemble_jacobi_from_geometry(leaf, &geo)
}

/// `L₀` on the round Euclidean sphere of radius `R`.
pub fn assemble_l0(r: f64, grid: &SphereGrid) -> JacobiMatrix {
    let lmax = grid.lmax();
    let n = (lmax + 1) * (lmax + 1);
    let stiffness = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let (l, _) = lm_of_index(i);
            (l * (l + 1)) as f64
        } else {
            0.0
        }
    });
    let mut constraint = DVector::zeros(n);
    constraint[0] = (4.0 * std::f64::consts::PI).sqrt() * r * r;
    JacobiMatrix {
        stiffness,
        potential: DMatrix::identity(n, n) * -2.0,
        mass: DMatrix::identity(n, n) * (r * r),
        constraint,
        lmax,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub eta0: f64,
    pub eta1: f64,
    pub mu0: f64,
    /// Lowest requested eigenvalues in increasing order.
    pub eigenvalues: Vec<f64>,
    pub eigenfields: Vec<HarmonicCoeffs>,
    /// Smallest eigenvalue magnitude: the reciprocal of `‖L⁻¹‖`.
    pub min_abs_eigenvalue: f64,
}

/// Eigen-decomposition of `K v = λ M v`, sorted ascending.
fn generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigSolverFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigSolverFailure("singular Cholesky factor".into()))?;
    let c = &linv * k * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::EigSolverFailure("symmetric eigensolver did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigSolverFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = linv.transpose() * eig.eigenvectors.select_columns(&order);
    Ok((vals, vecs))
}

/// Orthonormal basis of the complement of `c` (Householder reflection).
fn complement_basis(c: &DVector<f64>) -> DMatrix<f64> {
    let n = c.len();
    let norm = c.norm();
    let mut v = c.clone() / norm;
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += s;
    let vn2 = v.norm_squared();
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vn2);
    h.columns(1, n - 1).into_owned()
}

/// Lowest `k` eigenpairs of the generalized problem, plus `μ₀` over
/// functions of zero mean.
pub fn eigen_solve(jm: &JacobiMatrix, k: usize) -> Result<SpectrumResult> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 eigenpairs (got {k})")));
    }
    let kmat = jm.matrix();
    let (vals, vecs) = generalized_eigen(&kmat, &jm.mass)?;
    let q = complement_basis(&jm.constraint);
    let kq = q.transpose() * &kmat * &q;
    let mq = q.transpose() * &jm.mass * &q;
    let (cvals, _) = generalized_eigen(&kq, &mq)?;
    let k = k.min(vals.len());
    let eigenfields = (0..k)
        .map(|j| HarmonicCoeffs::from_vec(jm.lmax, vecs.column(j).iter().cloned().collect()).expect("basis size"))
        .collect();
    Ok(SpectrumResult {
        eta0: vals[0],
        eta1: vals[1],
        mu0: cvals[0],
        min_abs_eigenvalue: vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs())),
        eigenvalues: vals[..k].to_vec(),
        eigenfields,
    })
}

/// Nodal values of `L f` through the Galerkin projection of `f`.
pub fn apply_jacobi(leaf: &LeafSurface, geo: &SurfaceGeometry, jm: &JacobiMatrix, f: &[f64]) -> Result<Vec<f64>> {
    let grid = leaf.grid();
    let t = grid.basis_tables(jm.lmax)?;
    let wf: Vec<f64> = grid
        .weights()
        .iter()
        .zip(&geo.nodes)
        .zip(f)
        .map(|((w, n), v)| w * n.area_density * v)
        .collect();
    let rhs = t.y.transpose() * DVector::from_vec(wf);
    let chol = jm
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigSolverFailure("mass matrix is not positive definite".into()))?;
    let a = chol.solve(&rhs);
    let la = chol.solve(&(jm.matrix() * a));
    Ok((t.y * la).iter().cloned().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct FrechetReport {
    pub eps: Vec<f64>,
    /// Max-norm deviation of each central difference from the linearization.
    pub deviations: Vec<f64>,
    /// Consecutive deviation ratios (≈ 4 for halved steps).
    pub ratios: Vec<f64>,
    /// Deviation of the Richardson-extrapolated difference quotient.
    pub extrapolated: f64,
}

/// Compares central differences of the mean curvature along the radial
/// variation `v` with the linearization: the Jacobi operator applied to the
/// normal speed `g(ω, ν) v`, plus the transport of `H` by the tangential part
/// of the variation.
pub fn frechet_check(
    leaf: &LeafSurface,
    field: &MetricField,
    direction: &HarmonicCoeffs,
    eps: &[f64],
) -> Result<FrechetReport> {
    if eps.len() < 2 {
        return Err(Error::InvalidArgument(
            "Fréchet check needs at least two step sizes".into(),
        ));
    }
    let grid = leaf.grid();
    let geo = fundamental_forms(leaf, field)?;
    let jm = assemble_jacobi_from_geometry(leaf, &geo)?;
    let v = grid.synthesis(&direction.resized(grid.lmax()))?;
    let normal: Vec<f64> = geo.nodes.iter().zip(&v).map(|(n, v)| n.speed * v).collect();
    let mut lin = apply_jacobi(leaf, &geo, &jm, &normal)?;

    let h0 = geo.mean_curvature();
    let hd = grid.synthesis_with_derivatives(&grid.analysis(&h0)?)?;
    for (k, n) in geo.nodes.iter().enumerate() {
        let omega = grid.direction(k);
        let g = field.metric(n.z)?;
        let b = [linalg3::bilinear(&g, omega, n.z_t), linalg3::bilinear(&g, omega, n.z_p)];
        let inv = n.first_form_inv;
        let xt = inv[0] * b[0] + inv[1] * b[1];
        let xp = inv[1] * b[0] + inv[2] * b[1];
        lin[k] += v[k] * (xt * hd.f_t[k] + xp * hd.f_p[k]);
    }

    let quotients = eps
        .iter()
        .map(|&e| {
            let plus = leaf.with_profile(leaf.profile.axpy(e, direction))?;
            let minus = leaf.with_profile(leaf.profile.axpy(-e, direction))?;
            let hp = fundamental_forms(&plus, field)?.mean_curvature();
            let hm = fundamental_forms(&minus, field)?.mean_curvature();
            Ok(hp
                .iter()
                .zip(&hm)
                .map(|(a, b)| (a - b) / (2.0 * e))
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let dev = |q: &[f64]| q.iter().zip(&lin).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let deviations: Vec<f64> = quotients.iter().map(|q| dev(q)).collect();
    let ratios = deviations.windows(2).map(|w| w[0] / w[1]).collect();
    let n = eps.len();
    let (e1, e2) = (eps[n - 2], eps[n - 1]);
    let r = (e1 / e2).powi(2);
    let rich: Vec<f64> = quotients[n - 1]
        .iter()
        .zip(&quotients[n - 2])
        .map(|(fine, coarse)| (r * fine - coarse) / (r - 1.0))
        .collect();
    Ok(FrechetReport {
        eps: eps.to_vec(),
        deviations,
        ratios,
        extrapolated: dev(&rich),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn round(r: f64, l: usize) -> LeafSurface {
        LeafSurface::round([0.0; 3], r, Arc::new(SphereGrid::new(l).unwrap())).unwrap()
    }

    #[test]
    fn l0_spectrum() {
        let g = SphereGrid::new(4).unwrap();
        let op = assemble_l0(1.0, &g).operator().unwrap();
        assert_eq!(op[(0, 0)], -2.0);
        for k in 1..4 {
            assert_eq!(op[(k, k)], 0.0);
        }
        assert_eq!(op[(4, 4)], 4.0);
    }

    #[test]
    fn euclidean_jacobi_equals_l0() {
        let leaf = round(3.0, 8);
        let jm = assemble_jacobi(&leaf, &MetricField::euclidean()).unwrap();
        let a = jm.operator().unwrap();
        let b = assemble_l0(3.0, leaf.grid()).operator().unwrap();
        assert!((&a - &b).amax() < 1e-10);
        // potential is exactly -2/R² times the mass matrix
        assert!((&jm.potential + &jm.mass * (2.0 / 9.0)).amax() < 1e-12);
        assert!(jm.symmetry_defect() < 1e-12);
    }

    #[test]
    fn euclidean_spectrum_r2() {
        let leaf = round(2.0, 6);
        let s = eigen_solve(&assemble_jacobi(&leaf, &MetricField::euclidean()).unwrap(), 4).unwrap();
        assert!((s.eta0 + 0.5).abs() < 1e-12);
        assert!(s.eta1.abs() < 1e-12);
        assert!(s.mu0.abs() < 1e-12);
        assert!(s.eta0 <= s.mu0 && s.eta0 <= s.eta1);
    }

    #[test]
    fn frechet_on_flat_sphere() {
        let leaf = round(1.0, 8);
        let v = HarmonicCoeffs::single(8, 2, 0, 1.0);
        let rep = frechet_check(&leaf, &MetricField::euclidean(), &v, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert!(rep.extrapolated < 1e-8, "{rep:?}");
        for r in &rep.ratios {
            assert!((3.0..5.0).contains(r), "{rep:?}");
        }
    }

    #[test]
    fn constrained_minimum_sits_between() {
        let leaf = round(10.0, 8);
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let jm = assemble_jacobi(&leaf, &f).unwrap();
        assert!(jm.symmetry_defect() < 1e-9);
        let s = eigen_solve(&jm, 3).unwrap();
        assert!(s.eta0 < 0.0 && 0.0 < s.mu0 && s.mu0 <= s.eta1 + 1e-15);
    }
}
