use serde::Serialize;

use super::{constraint_residuals, MetricField, MetricSample};
use crate::error::{Error, Result};
use crate::fit::{fit_power_law, PowerFit};
use crate::harmonics::SphereGrid;
use crate::linalg3::{self, Vec3};

/// Sup-norm samples of one quantity and their log-log fit.
#[derive(Clone, Debug, Serialize)]
pub struct DecayQuantity {
    pub name: String,
    pub sups: Vec<f64>,
    /// `None` when some sample vanished (log-log fit undefined).
    pub fit: Option<PowerFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayAudit {
    pub radii: Vec<f64>,
    pub quantities: Vec<DecayQuantity>,
    pub identically_flat: bool,
    /// The energy density decays slower than `|x|^{-2-2q}`.
    pub rho_decay_inconsistent: bool,
    pub notes: Vec<String>,
}

impl DecayAudit {
    pub fn get(&self, name: &str) -> Option<&DecayQuantity> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

fn h_norm(s: &MetricSample) -> f64 {
    let mut v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            v += (s.g[i][j] - d).powi(2);
        }
    }
    v.sqrt()
}

fn dh_norm(s: &MetricSample, t: Option<&MetricSample>) -> f64 {
    s.dg.iter()
        .flatten()
        .flatten()
        .enumerate()
        .map(|(n, v)| {
            let w = t.map_or(0.0, |t| t.dg[n / 9][(n / 3) % 3][n % 3]);
            (v + w).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn d2h_norm(s: &MetricSample) -> f64 {
    s.d2g
        .iter()
        .flatten()
        .flatten()
        .flatten()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

fn odd_h(s: &MetricSample, t: &MetricSample) -> f64 {
    let mut v = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            v += (s.g[i][j] - t.g[i][j]).powi(2);
        }
    }
    v.sqrt()
}

/// Empirical decay rates of `h = g − δ`, its derivatives, its odd parts and
/// the energy density, sampled as sups over spheres of the given radii.
pub fn decay_audit(field: &MetricField, radii: &[f64]) -> Result<DecayAudit> {
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let ratio = if rmin > 0.0 { rmax / rmin } else { 0.0 };
    if radii.len() < 3 || ratio < 4.0 {
        return Err(Error::InsufficientRadii {
            count: radii.len(),
            ratio,
        });
    }
    let grid = SphereGrid::new(8)?;
    let dirs = grid.directions();
    let names = ["h", "dh", "d2h", "h_odd", "dh_odd", "rho"];
    let mut sups = vec![Vec::with_capacity(radii.len()); names.len()];
    for &r in radii {
        let mut m = [0.0f64; 6];
        for w in &dirs {
            let x: Vec3 = linalg3::scale(*w, r);
            let xm = linalg3::scale(x, -1.0);
            let s = field.evaluate(x)?;
            let t = field.evaluate(xm)?;
            let rho = constraint_residuals(field, x, false)?.0;
            let vals = [
                h_norm(&s),
                dh_norm(&s, None),
                d2h_norm(&s),
                odd_h(&s, &t),
                dh_norm(&s, Some(&t)),
                rho.abs(),
            ];
            for (a, v) in m.iter_mut().zip(vals) {
                *a = a.max(v);
            }
        }
        for (k, v) in m.iter().enumerate() {
            sups[k].push(*v);
        }
    }
    let quantities: Vec<DecayQuantity> = names
        .iter()
        .zip(sups)
        .map(|(n, s)| DecayQuantity {
            name: n.to_string(),
            fit: if s.iter().all(|v| *v > 0.0) {
                fit_power_law(radii, &s).ok()
            } else {
                None
            },
            sups: s,
        })
        .collect();
    let identically_flat = quantities[..3].iter().all(|q| q.sups.iter().all(|v| *v == 0.0));
    let mut notes = Vec::new();
    if identically_flat {
        notes.push("identically flat".to_string());
    }
    let q = field.q();
    // ρ below round-off is treated as vanishing
    let rho_q = &quantities[5];
    let rho_scale = quantities[2].sups.iter().cloned().fold(0.0, f64::max);
    let rho_vanishes = rho_q.sups.iter().all(|v| *v <= 1e-9 * rho_scale.max(1e-300));
    let rho_decay_inconsistent = !rho_vanishes && rho_q.fit.is_some_and(|f| f.exponent > -(2.0 + 2.0 * q) + 0.25);
    if rho_decay_inconsistent {
        notes.push(format!(
            "energy density decays like r^{:.2}, slower than the r^{:.2} required for decay rate q = {q}",
            rho_q.fit.map_or(f64::NAN, |f| f.exponent),
            -(2.0 + 2.0 * q)
        ));
    }
    if !field.rt_flag() {
        notes.push("family is not declared parity-compatible".to_string());
    }
    Ok(DecayAudit {
        radii: radii.to_vec(),
        quantities,
        identically_flat,
        rho_decay_inconsistent,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{HarmonicAsymptotics, MetricFamily, PerturbedRT};

    #[test]
    fn euclidean_is_identically_flat() {
        let a = decay_audit(&MetricField::euclidean(), &[10.0, 20.0, 40.0]).unwrap();
        assert!(a.identically_flat);
        assert!(a.get("h").unwrap().fit.is_none());
    }

    #[test]
    fn schwarzschild_h_slope() {
        let f = MetricField::schwarzschild(1.0, [0.0; 3]);
        let a = decay_audit(&f, &[20.0, 40.0, 80.0, 160.0]).unwrap();
        let e = a.get("h").unwrap().fit.unwrap().exponent;
        assert!((e + 1.0).abs() < 0.1, "{e}");
        assert!(!a.rho_decay_inconsistent);
    }

    #[test]
    fn dipole_odd_part_slope() {
        let f = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
            1.0,
            [0.5, 0.0, 0.0],
        )));
        let a = decay_audit(&f, &[20.0, 40.0, 80.0, 160.0]).unwrap();
        let e = a.get("h_odd").unwrap().fit.unwrap().exponent;
        assert!((e + 2.0).abs() < 0.2, "{e}");
    }

    #[test]
    fn slow_perturbation_is_flagged() {
        let base = MetricFamily::SchwarzschildIsotropic {
            mass: 1.0,
            center: [0.0; 3],
        };
        let p = PerturbedRT::new(base, 0.5, 0.75, 2, 0).unwrap();
        let f = MetricField::new(MetricFamily::PerturbedRT(p));
        assert_eq!(f.q(), 0.75);
        let a = decay_audit(&f, &[20.0, 40.0, 80.0]).unwrap();
        assert!(a.rho_decay_inconsistent);
    }

    #[test]
    fn rejects_short_radius_lists() {
        let f = MetricField::euclidean();
        assert!(matches!(
            decay_audit(&f, &[10.0, 20.0]),
            Err(Error::InsufficientRadii { .. })
        ));
        assert!(matches!(
            decay_audit(&f, &[10.0, 20.0, 30.0]),
            Err(Error::InsufficientRadii { .. })
        ));
    }
}
