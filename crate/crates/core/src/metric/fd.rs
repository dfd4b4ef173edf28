use crate::error::{Error, Result};
use crate::linalg3::{self, Mat3, Vec3};

use super::{D2Metric, DMetric};

/// Default step `max(1e-3, 1e-4 |x|)`.
pub fn default_step(x: Vec3) -> f64 {
    (1e-4 * linalg3::norm(x)).max(1e-3)
}

const C1: [(i32, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const C2: [(i32, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];

/// Fourth-order central differences of a metric sampler.
///
/// Every stencil point must satisfy `|x| >= r_min`.
pub fn finite_difference_derivatives<F>(sampler: F, x: Vec3, h: f64, r_min: f64) -> Result<(DMetric, D2Metric)>
where
    F: Fn(Vec3) -> Result<Mat3>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive (got {h})")));
    }
    let at = |o: [i32; 3]| -> Result<Mat3> {
        let p = [x[0] + o[0] as f64 * h, x[1] + o[1] as f64 * h, x[2] + o[2] as f64 * h];
        if linalg3::norm(p) < r_min {
            return Err(Error::StencilOutsideChart(p));
        }
        sampler(p)
    };
    let unit = |k: usize, s: i32| {
        let mut o = [0; 3];
        o[k] = s;
        o
    };
    let mut dg = [[[0.0; 3]; 3]; 3];
    let mut d2g = [[[[0.0; 3]; 3]; 3]; 3];
    let g0 = at([0; 3])?;
    for k in 0..3 {
        let mut axis = [[[0.0; 3]; 3]; 5];
        for (s, slot) in (-2..=2).zip(axis.iter_mut()) {
            *slot = if s == 0 { g0 } else { at(unit(k, s))? };
        }
        for i in 0..3 {
            for j in 0..3 {
                dg[k][i][j] = C1.iter().map(|(s, c)| c * axis[(s + 2) as usize][i][j]).sum::<f64>() / (12.0 * h);
                d2g[k][k][i][j] =
                    C2.iter().map(|(s, c)| c * axis[(s + 2) as usize][i][j]).sum::<f64>() / (12.0 * h * h);
            }
        }
    }
    for k in 0..3 {
        for l in k + 1..3 {
            let mut acc = [[0.0; 3]; 3];
            for (a, ca) in C1 {
                for (b, cb) in C1 {
                    let mut o = [0; 3];
                    o[k] = a;
                    o[l] = b;
                    let g = at(o)?;
                    for i in 0..3 {
                        for j in 0..3 {
                            acc[i][j] += ca * cb * g[i][j];
                        }
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let v = acc[i][j] / (144.0 * h * h);
                    d2g[k][l][i][j] = v;
                    d2g[l][k][i][j] = v;
                }
            }
        }
    }
    Ok((dg, d2g))
}
