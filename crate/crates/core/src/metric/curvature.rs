use serde::Serialize;

use super::MetricSample;
use crate::error::{Error, Result};
use crate::linalg3::{self, Mat3, Vec3};

pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

/// Determinant threshold below which the metric counts as degenerate.
pub const DET_TOL: f64 = 1e-12;

/// Inverse metric and Christoffel symbols `gamma[k][i][j] = Γ^k_ij`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub ginv: Mat3,
    pub gamma: Tensor3,
}

pub fn connection(s: &MetricSample, x: Vec3) -> Result<Connection> {
    let (ginv, det) = linalg3::inverse(&s.g, DET_TOL).ok_or(Error::DegenerateMetric {
        point: x,
        det: linalg3::det(&s.g),
    })?;
    debug_assert!(det.abs() >= DET_TOL);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut v = 0.0;
                for l in 0..3 {
                    v += ginv[k][l] * (s.dg[i][l][j] + s.dg[j][l][i] - s.dg[l][i][j]);
                }
                gamma[k][i][j] = 0.5 * v;
                gamma[k][j][i] = 0.5 * v;
            }
        }
    }
    Ok(Connection { ginv, gamma })
}

/// Riemann, Ricci and scalar curvature at a point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureEval {
    pub point: Vec3,
    /// All indices down: `R_ijkl`.
    pub riemann: Tensor4,
    pub ricci: Mat3,
    pub scalar: f64,
}

impl CurvatureEval {
    /// Largest violation of the Riemann symmetries, relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.riemann;
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        scale = scale.max(r[i][j][k][l].abs());
                        defect = defect
                            .max((r[i][j][k][l] + r[j][i][k][l]).abs())
                            .max((r[i][j][k][l] + r[i][j][l][k]).abs())
                            .max((r[i][j][k][l] - r[k][l][i][j]).abs());
                    }
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

pub fn curvature(s: &MetricSample, x: Vec3) -> Result<CurvatureEval> {
    let Connection { ginv, gamma } = connection(s, x)?;
    // ∂_m g^{kl} = -g^{ka} ∂_m g_ab g^{bl}
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for m in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        v -= ginv[k][a] * s.dg[m][a][b] * ginv[b][l];
                    }
                }
                dginv[m][k][l] = v;
            }
        }
    }
    // dgamma[m][k][i][j] = ∂_m Γ^k_ij
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for m in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    let mut v = 0.0;
                    for l in 0..3 {
                        let c = s.dg[i][l][j] + s.dg[j][l][i] - s.dg[l][i][j];
                        let dc = s.d2g[m][i][l][j] + s.d2g[m][j][l][i] - s.d2g[m][l][i][j];
                        v += dginv[m][k][l] * c + ginv[k][l] * dc;
                    }
                    dgamma[m][k][i][j] = 0.5 * v;
                    dgamma[m][k][j][i] = 0.5 * v;
                }
            }
        }
    }
    // R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut v = dgamma[k][i][l][j] - dgamma[l][i][k][j];
                    for m in 0..3 {
                        v += gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j];
                    }
                    up[i][j][k][l] = v;
                }
            }
        }
    }
    let mut riemann = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    riemann[i][j][k][l] = (0..3).map(|m| s.g[i][m] * up[m][j][k][l]).sum();
                }
            }
        }
    }
    let mut ricci = [[0.0; 3]; 3];
    for j in 0..3 {
        for l in 0..3 {
            ricci[j][l] = (0..3).map(|i| up[i][j][i][l]).sum();
        }
    }
    // symmetrize away assembly round-off
    for j in 0..3 {
        for l in j + 1..3 {
            let a = 0.5 * (ricci[j][l] + ricci[l][j]);
            ricci[j][l] = a;
            ricci[l][j] = a;
        }
    }
    let mut scalar = 0.0;
    for j in 0..3 {
        for l in 0..3 {
            scalar += ginv[j][l] * ricci[j][l];
        }
    }
    Ok(CurvatureEval {
        point: x,
        riemann,
        ricci,
        scalar,
    })
}
