use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use nalgebra::DMatrix;

use super::coeffs::{lm_index, HarmonicCoeffs};
use super::legendre::{legendre_with_derivatives, packed, packed_len};
use crate::error::{Error, Result};
use crate::linalg3::Vec3;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes descending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Field values and angular derivatives on the grid nodes.
#[derive(Clone, Debug)]
pub struct GridDerivatives {
    pub f: Vec<f64>,
    pub f_t: Vec<f64>,
    pub f_p: Vec<f64>,
    pub f_tt: Vec<f64>,
    pub f_tp: Vec<f64>,
    pub f_pp: Vec<f64>,
}

/// Values of every basis harmonic and its angular gradient at every node,
/// as `n_nodes x n_basis` matrices.
pub struct BasisTables {
    pub y: DMatrix<f64>,
    pub y_t: DMatrix<f64>,
    pub y_p: DMatrix<f64>,
}

/// Gauss–Legendre (in cos θ) × equispaced (in φ) quadrature grid on the unit
/// sphere. Exact for band-limited products up to degree `2L + 1`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    lmax: usize,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    theta_weights: Vec<f64>,
    weights: Vec<f64>,
    // per θ row, packed (l, m >= 0)
    p: Vec<f64>,
    dp: Vec<f64>,
    d2p: Vec<f64>,
    // per m, per φ column; √2 folded in for m > 0
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl SphereGrid {
    pub fn new(lmax: usize) -> Result<Self> {
        if lmax == 0 {
            return Err(Error::InvalidArgument("band limit must be at least 1".into()));
        }
        let n_theta = lmax + 1;
        let n_phi = 2 * lmax + 2;
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;

        let np = packed_len(lmax);
        let mut p = Vec::with_capacity(n_theta * np);
        let mut dp = Vec::with_capacity(n_theta * np);
        let mut d2p = Vec::with_capacity(n_theta * np);
        for &t in &theta {
            let (a, b, c) = legendre_with_derivatives(lmax, t);
            p.extend(a);
            dp.extend(b);
            d2p.extend(c);
        }
        let mut cos_m = vec![0.0; (lmax + 1) * n_phi];
        let mut sin_m = vec![0.0; (lmax + 1) * n_phi];
        for m in 0..=lmax {
            let f = if m == 0 { 1.0 } else { SQRT_2 };
            for (j, &ph) in phi.iter().enumerate() {
                cos_m[m * n_phi + j] = f * (m as f64 * ph).cos();
                sin_m[m * n_phi + j] = if m == 0 { 0.0 } else { f * (m as f64 * ph).sin() };
            }
        }
        let weights = (0..n_theta)
            .flat_map(|i| std::iter::repeat_n(w[i] * dphi, n_phi))
            .collect();
        Ok(SphereGrid {
            lmax,
            n_theta,
            n_phi,
            theta,
            phi,
            theta_weights: w,
            weights,
            p,
            dp,
            d2p,
            cos_m,
            sin_m,
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn n_nodes(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn n_basis(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    /// Quadrature weights `w_ij`, summing to 4π.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(θ, φ)` of node `n`.
    pub fn angles(&self, n: usize) -> (f64, f64) {
        (self.theta[n / self.n_phi], self.phi[n % self.n_phi])
    }

    /// Unit vector of node `n`.
    pub fn direction(&self, n: usize) -> Vec3 {
        let (t, p) = self.angles(n);
        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
    }

    pub fn directions(&self) -> Vec<Vec3> {
        (0..self.n_nodes()).map(|n| self.direction(n)).collect()
    }

    fn p_row(&self, i: usize) -> &[f64] {
        let np = packed_len(self.lmax);
        &self.p[i * np..(i + 1) * np]
    }

    fn check_finite(values: &[f64]) -> Result<()> {
        match values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFiniteInput(k)),
            None => Ok(()),
        }
    }

    /// `Σ w_ij f_ij ≈ ∫_{S²} f dσ`.
    pub fn quadrature_integral(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Self::check_finite(values)?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_nodes() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                self.n_nodes()
            )));
        }
        Ok(())
    }

    /// Projects nodal values onto the real harmonics up to the grid band limit.
    pub fn analysis(&self, values: &[f64]) -> Result<HarmonicCoeffs> {
        self.check_len(values)?;
        Self::check_finite(values)?;
        let l = self.lmax;
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut out = HarmonicCoeffs::zeros(l);
        let coeffs = out.as_mut_slice();
        let mut fc = vec![0.0; l + 1];
        let mut fs = vec![0.0; l + 1];
        for i in 0..self.n_theta {
            let row = &values[i * self.n_phi..(i + 1) * self.n_phi];
            for m in 0..=l {
                let cm = &self.cos_m[m * self.n_phi..(m + 1) * self.n_phi];
                let sm = &self.sin_m[m * self.n_phi..(m + 1) * self.n_phi];
                fc[m] = row.iter().zip(cm).map(|(a, b)| a * b).sum::<f64>() * dphi;
                fs[m] = row.iter().zip(sm).map(|(a, b)| a * b).sum::<f64>() * dphi;
            }
            let w = self.theta_weights[i];
            let p = self.p_row(i);
            for ll in 0..=l {
                for m in 0..=ll {
                    let pw = w * p[packed(ll, m)];
                    coeffs[lm_index(ll, m as i64)] += pw * fc[m];
                    if m > 0 {
                        coeffs[lm_index(ll, -(m as i64))] += pw * fs[m];
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_band(&self, coeffs: &HarmonicCoeffs) -> Result<()> {
        if coeffs.lmax() > self.lmax {
            return Err(Error::BandLimitMismatch {
                coeffs: coeffs.lmax(),
                grid: self.lmax,
            });
        }
        Ok(())
    }

    /// Nodal values of `Σ a_lm Y_lm`.
    pub fn synthesis(&self, coeffs: &HarmonicCoeffs) -> Result<Vec<f64>> {
        Ok(self.synthesize(coeffs, false)?.f)
    }

    /// Nodal values together with first and second angular derivatives,
    /// computed exactly in coefficient space.
    pub fn synthesis_with_derivatives(&self, coeffs: &HarmonicCoeffs) -> Result<GridDerivatives> {
        self.synthesize(coeffs, true)
    }

    fn synthesize(&self, coeffs: &HarmonicCoeffs, derivs: bool) -> Result<GridDerivatives> {
        self.check_band(coeffs)?;
        let lc = coeffs.lmax();
        let nn = self.n_nodes();
        let np = packed_len(self.lmax);
        let mut out = GridDerivatives {
            f: vec![0.0; nn],
            f_t: vec![0.0; if derivs { nn } else { 0 }],
            f_p: vec![0.0; if derivs { nn } else { 0 }],
            f_tt: vec![0.0; if derivs { nn } else { 0 }],
            f_tp: vec![0.0; if derivs { nn } else { 0 }],
            f_pp: vec![0.0; if derivs { nn } else { 0 }],
        };
        // [C, S] for value, θ-derivative, second θ-derivative
        let mut acc = vec![[0.0f64; 6]; lc + 1];
        for i in 0..self.n_theta {
            let p = &self.p[i * np..(i + 1) * np];
            let dp = &self.dp[i * np..(i + 1) * np];
            let d2p = &self.d2p[i * np..(i + 1) * np];
            for (m, a) in acc.iter_mut().enumerate() {
                *a = [0.0; 6];
                for l in m..=lc {
                    let k = packed(l, m);
                    let c = coeffs.get(l, m as i64);
                    let s = if m > 0 { coeffs.get(l, -(m as i64)) } else { 0.0 };
                    a[0] += c * p[k];
                    a[1] += s * p[k];
                    if derivs {
                        a[2] += c * dp[k];
                        a[3] += s * dp[k];
                        a[4] += c * d2p[k];
                        a[5] += s * d2p[k];
                    }
                }
            }
            for j in 0..self.n_phi {
                let n = i * self.n_phi + j;
                let mut v = [0.0; 6];
                for (m, a) in acc.iter().enumerate() {
                    let cm = self.cos_m[m * self.n_phi + j];
                    let sm = self.sin_m[m * self.n_phi + j];
                    let mf = m as f64;
                    v[0] += a[0] * cm + a[1] * sm;
                    if derivs {
                        v[1] += a[2] * cm + a[3] * sm;
                        v[2] += mf * (a[1] * cm - a[0] * sm);
                        v[3] += a[4] * cm + a[5] * sm;
                        v[4] += mf * (a[3] * cm - a[2] * sm);
                        v[5] -= mf * mf * (a[0] * cm + a[1] * sm);
                    }
                }
                out.f[n] = v[0];
                if derivs {
                    out.f_t[n] = v[1];
                    out.f_p[n] = v[2];
                    out.f_tt[n] = v[3];
                    out.f_tp[n] = v[4];
                    out.f_pp[n] = v[5];
                }
            }
        }
        Ok(out)
    }

    /// Basis values and angular gradients for all harmonics up to `lmax`.
    pub fn basis_tables(&self, lmax: usize) -> Result<BasisTables> {
        if lmax > self.lmax {
            return Err(Error::BandLimitMismatch {
                coeffs: lmax,
                grid: self.lmax,
            });
        }
        let nb = (lmax + 1) * (lmax + 1);
        let nn = self.n_nodes();
        let np = packed_len(self.lmax);
        let mut y = DMatrix::zeros(nn, nb);
        let mut y_t = DMatrix::zeros(nn, nb);
        let mut y_p = DMatrix::zeros(nn, nb);
        for i in 0..self.n_theta {
            let p = &self.p[i * np..(i + 1) * np];
            let dp = &self.dp[i * np..(i + 1) * np];
            for j in 0..self.n_phi {
                let n = i * self.n_phi + j;
                for l in 0..=lmax {
                    for m in -(l as i64)..=(l as i64) {
                        let am = m.unsigned_abs() as usize;
                        let k = packed(l, am);
                        let (t, dt) = if m >= 0 {
                            (
                                self.cos_m[am * self.n_phi + j],
                                -(am as f64) * self.sin_m[am * self.n_phi + j],
                            )
                        } else {
                            (
                                self.sin_m[am * self.n_phi + j],
                                am as f64 * self.cos_m[am * self.n_phi + j],
                            )
                        };
                        let b = lm_index(l, m);
                        y[(n, b)] = p[k] * t;
                        y_t[(n, b)] = dp[k] * t;
                        y_p[(n, b)] = p[k] * dt;
                    }
                }
            }
        }
        Ok(BasisTables { y, y_t, y_p })
    }

    /// Writes `theta,phi,x,y,z,value` rows for debugging and plotting.
    pub fn write_field_csv<W: Write>(&self, mut out: W, values: &[f64]) -> Result<()> {
        self.check_len(values)?;
        writeln!(out, "# cmcfol-schema-version: 1 sphere-field")?;
        writeln!(out, "theta,phi,x,y,z,value")?;
        for (n, v) in values.iter().enumerate() {
            let (t, p) = self.angles(n);
            let d = self.direction(n);
            writeln!(
                out,
                "{t:.17e},{p:.17e},{:.17e},{:.17e},{:.17e},{v:.17e}",
                d[0], d[1], d[2]
            )?;
        }
        Ok(())
    }
}
