use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tabulated::TabulatedMetric;
use crate::error::{Error, Result};
use crate::harmonics::legendre::solid_harmonic;
use crate::jet::{self, Jet};
use crate::linalg3::{self, Mat3, Vec3};

/// Conformally flat data `g = u⁴ δ` with
/// `u = 1 + m/(2r) + d·y/(2r³) + Q_ij y^i y^j/(2r⁵)`, `y = x − center`,
/// and optional momentum `π = u² 𝓛_δ X` with `X = b / r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAsymptotics {
    pub mass: f64,
    #[serde(default)]
    pub dipole: Vec3,
    /// Symmetric trace-free quadrupole moment.
    #[serde(default)]
    pub quadrupole: Mat3,
    #[serde(default)]
    pub center: Vec3,
    /// Coefficient vector `b` of the shift `X = b / r`.
    #[serde(default)]
    pub shift: Option<Vec3>,
}

impl HarmonicAsymptotics {
    pub fn new(mass: f64, dipole: Vec3) -> Self {
        HarmonicAsymptotics {
            mass,
            dipole,
            quadrupole: [[0.0; 3]; 3],
            center: [0.0; 3],
            shift: None,
        }
    }

    pub fn conformal_u(&self, x: Vec3) -> Result<Jet> {
        let y = offset_jets(x, self.center)?;
        let r = jet::norm(&y);
        let inv_r = r.recip();
        let inv_r3 = inv_r.powi(3);
        let mut u = 1.0 + inv_r * (0.5 * self.mass);
        let dy = y[0] * self.dipole[0] + y[1] * self.dipole[1] + y[2] * self.dipole[2];
        u = u + dy * inv_r3 * 0.5;
        if self.quadrupole.iter().flatten().any(|q| *q != 0.0) {
            let inv_r5 = inv_r.powi(5);
            let mut qyy = Jet::ZERO;
            for i in 0..3 {
                for j in 0..3 {
                    qyy = qyy + y[i] * y[j] * self.quadrupole[i][j];
                }
            }
            u = u + qyy * inv_r5 * 0.5;
        }
        Ok(u)
    }

    /// Declared center of mass `center + d / m`.
    pub fn center_of_mass(&self) -> Option<Vec3> {
        (self.mass != 0.0).then(|| linalg3::add(self.center, linalg3::scale(self.dipole, 1.0 / self.mass)))
    }

    /// `π_ij` and `∂_k π_ij` at `x`, when a shift is present.
    pub fn momentum(&self, x: Vec3) -> Result<Option<(Mat3, [Mat3; 3])>> {
        let Some(b) = self.shift else {
            return Ok(None);
        };
        let y = offset_jets(x, self.center)?;
        let inv_r = jet::norm(&y).recip();
        let xs: [Jet; 3] = [inv_r * b[0], inv_r * b[1], inv_r * b[2]];
        let u = self.conformal_u(x)?;
        let u2 = u * u;
        let div = xs[0].d[0] + xs[1].d[1] + xs[2].d[2];
        let mut s = [[0.0; 3]; 3];
        let mut ds = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = xs[i].d[j] + xs[j].d[i] - if i == j { div } else { 0.0 };
                for k in 0..3 {
                    let ddiv = xs[0].h[0][k] + xs[1].h[1][k] + xs[2].h[2][k];
                    ds[k][i][j] = xs[i].h[j][k] + xs[j].h[i][k] - if i == j { ddiv } else { 0.0 };
                }
            }
        }
        let mut pi = [[0.0; 3]; 3];
        let mut dpi = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                pi[i][j] = u2.v * s[i][j];
                for k in 0..3 {
                    dpi[k][i][j] = u2.d[k] * s[i][j] + u2.v * ds[k][i][j];
                }
            }
        }
        Ok(Some((pi, dpi)))
    }
}

/// Conformal perturbation `a |x|^{-q'} Y_lm(x/|x|) δ_ij` (even `l >= 2`)
/// added to a base family.
#[derive(Clone, Debug)]
pub struct PerturbedRT {
    pub base: Box<MetricFamily>,
    pub amplitude: f64,
    pub decay: f64,
    pub degree: usize,
    pub order: i64,
}

impl PerturbedRT {
    pub fn new(base: MetricFamily, amplitude: f64, decay: f64, degree: usize, order: i64) -> Result<Self> {
        if degree < 2 || !degree.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "perturbation degree must be even and >= 2 (got {degree})"
            )));
        }
        if order.unsigned_abs() as usize > degree {
            return Err(Error::InvalidArgument(format!(
                "|m| = {} exceeds l = {degree}",
                order.abs()
            )));
        }
        if !(decay > 0.5 && decay <= 1.0) {
            return Err(Error::InvalidArgument(format!("decay q' = {decay} outside (1/2, 1]")));
        }
        Ok(PerturbedRT {
            base: Box::new(base),
            amplitude,
            decay,
            degree,
            order,
        })
    }

    /// The scalar perturbation `a r^{-q'} Y_lm`.
    pub fn perturbation(&self, x: Vec3) -> Result<Jet> {
        let xs = offset_jets(x, [0.0; 3])?;
        let r = jet::norm(&xs);
        let s = solid_harmonic(self.degree, self.order, &xs);
        Ok(s * r.powf(-self.decay - self.degree as f64) * self.amplitude)
    }
}

/// The metric families available to the solver.
#[derive(Clone, Debug)]
pub enum MetricFamily {
    Euclidean,
    SchwarzschildIsotropic { mass: f64, center: Vec3 },
    HarmonicAsymptotics(HarmonicAsymptotics),
    PerturbedRT(PerturbedRT),
    Tabulated(Arc<TabulatedMetric>),
}

fn offset_jets(x: Vec3, c: Vec3) -> Result<[Jet; 3]> {
    let y = linalg3::sub(x, c);
    if linalg3::norm(y) < 1e-12 {
        return Err(Error::SingularPoint(x));
    }
    Ok(Jet::coords(y))
}

impl MetricFamily {
    /// Conformal factor `φ` with `g = φ δ`, if the family is conformally flat.
    pub fn conformal_factor(&self, x: Vec3) -> Result<Option<Jet>> {
        Ok(match self {
            MetricFamily::Euclidean => Some(Jet::constant(1.0)),
            MetricFamily::SchwarzschildIsotropic { mass, center } => {
                let y = offset_jets(x, *center)?;
                let u = 1.0 + jet::norm(&y).recip() * (0.5 * mass);
                Some(u.powi(4))
            }
            MetricFamily::HarmonicAsymptotics(ha) => Some(ha.conformal_u(x)?.powi(4)),
            MetricFamily::PerturbedRT(p) => match p.base.conformal_factor(x)? {
                Some(phi) => Some(phi + p.perturbation(x)?),
                None => None,
            },
            MetricFamily::Tabulated(_) => None,
        })
    }

    /// The six independent components `(11, 12, 13, 22, 23, 33)` as jets.
    pub fn components(&self, x: Vec3) -> Result<[Jet; 6]> {
        if let Some(phi) = self.conformal_factor(x)? {
            return Ok([phi, Jet::ZERO, Jet::ZERO, phi, Jet::ZERO, phi]);
        }
        match self {
            MetricFamily::Tabulated(t) => t.components(x),
            MetricFamily::PerturbedRT(p) => {
                let mut c = p.base.components(x)?;
                let f = p.perturbation(x)?;
                c[0] = c[0] + f;
                c[3] = c[3] + f;
                c[5] = c[5] + f;
                Ok(c)
            }
            _ => unreachable!("closed-form families are conformally flat"),
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            MetricFamily::Euclidean => Some(0.0),
            MetricFamily::SchwarzschildIsotropic { mass, .. } => Some(*mass),
            MetricFamily::HarmonicAsymptotics(ha) => Some(ha.mass),
            MetricFamily::PerturbedRT(p) => p.base.mass(),
            MetricFamily::Tabulated(t) => t.declared_mass,
        }
    }

    pub fn center_of_mass(&self) -> Option<Vec3> {
        match self {
            MetricFamily::Euclidean => None,
            MetricFamily::SchwarzschildIsotropic { center, .. } => Some(*center),
            MetricFamily::HarmonicAsymptotics(ha) => ha.center_of_mass(),
            MetricFamily::PerturbedRT(p) => p.base.center_of_mass(),
            MetricFamily::Tabulated(t) => t.declared_center,
        }
    }

    pub fn decay_rate(&self) -> f64 {
        match self {
            MetricFamily::PerturbedRT(p) => p.decay.min(p.base.decay_rate()),
            MetricFamily::Tabulated(t) => t.q,
            _ => 1.0,
        }
    }

    pub fn default_r_min(&self) -> f64 {
        match self {
            MetricFamily::Euclidean => 0.0,
            MetricFamily::SchwarzschildIsotropic { mass, center } => 4.0 * mass.abs() + linalg3::norm(*center),
            MetricFamily::HarmonicAsymptotics(ha) => {
                4.0 * ha.mass.abs() + linalg3::norm(ha.center) + linalg3::norm(ha.dipole).sqrt()
            }
            MetricFamily::PerturbedRT(p) => p.base.default_r_min().max(1.0),
            MetricFamily::Tabulated(t) => t.r_min,
        }
    }

    /// Whether the family is built to satisfy the even/odd (RT) conditions.
    pub fn is_rt(&self) -> bool {
        match self {
            MetricFamily::PerturbedRT(p) => p.base.is_rt(),
            MetricFamily::Tabulated(t) => t.rt_flag,
            _ => true,
        }
    }

    /// Shifts the origin of every closed-form center by `t`.
    pub fn translated(&self, t: Vec3) -> Result<MetricFamily> {
        Ok(match self {
            MetricFamily::Euclidean => MetricFamily::Euclidean,
            MetricFamily::SchwarzschildIsotropic { mass, center } => MetricFamily::SchwarzschildIsotropic {
                mass: *mass,
                center: linalg3::add(*center, t),
            },
            MetricFamily::HarmonicAsymptotics(ha) => {
                let mut ha = ha.clone();
                ha.center = linalg3::add(ha.center, t);
                MetricFamily::HarmonicAsymptotics(ha)
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "translation is only defined for centered closed-form families".into(),
                ))
            }
        })
    }
}
