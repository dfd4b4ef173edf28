//! Run configuration: JSON with unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::linalg3::{Mat3, Vec3};
use crate::metric::{Derivatives, HarmonicAsymptotics, MetricFamily, MetricField, PerturbedRT, TabulatedMetric};
use crate::solver::SolveConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Foliate,
    Charges,
    Spectrum,
    Audit,
    Probe,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Solve,
        Command::Foliate,
        Command::Charges,
        Command::Spectrum,
        Command::Audit,
        Command::Probe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Foliate => "foliate",
            Command::Charges => "charges",
            Command::Spectrum => "spectrum",
            Command::Audit => "audit",
            Command::Probe => "probe",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{s}`")))
    }
}

fn default_order() -> usize {
    4
}

/// Metric family as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    Schwarzschild {
        mass: f64,
        #[serde(default)]
        center: Vec3,
    },
    Harmonic {
        mass: f64,
        #[serde(default)]
        dipole: Vec3,
        #[serde(default)]
        quadrupole: Mat3,
        #[serde(default)]
        center: Vec3,
        #[serde(default)]
        shift: Option<Vec3>,
    },
    PerturbedRt {
        base: Box<MetricSpec>,
        amplitude: f64,
        /// Decay rate `q'` of the perturbation.
        q: f64,
        degree: usize,
        #[serde(default)]
        order: i64,
    },
    Tabulated {
        /// CSV or binary grid; relative paths resolve against the config file.
        path: PathBuf,
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default)]
        q: Option<f64>,
        #[serde(default)]
        mass: Option<f64>,
        #[serde(default)]
        center: Option<Vec3>,
        #[serde(default)]
        rt: bool,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Exact,
    FiniteDifference,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChartConfig {
    pub r_min: Option<f64>,
    pub derivatives: DerivativeMode,
    pub fd_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationTerm {
    pub l: usize,
    pub m: i64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// One entry per start; each start is a sum of real harmonics.
    pub starts: Vec<Vec<PerturbationTerm>>,
}

/// Tolerances for comparing alternative definitions of the same charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossTolerances {
    pub mass: f64,
    pub center: f64,
}

impl Default for CrossTolerances {
    fn default() -> Self {
        CrossTolerances {
            mass: 1e-3,
            center: 1e-2,
        }
    }
}

/// Expected values checked in assertion mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    pub mass: Option<f64>,
    pub mass_tol: Option<f64>,
    pub center: Option<Vec3>,
    pub center_tol: Option<f64>,
    pub h_achieved: Option<f64>,
    /// Relative tolerance on `h_achieved`.
    pub h_rel_tol: Option<f64>,
    pub nested: Option<bool>,
    pub strictly_stable: Option<bool>,
    pub identically_flat: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must match the command given on the command line.
    #[serde(default)]
    pub command: Option<Command>,
    pub metric: MetricSpec,
    #[serde(default)]
    pub chart: ChartConfig,
    /// Leaf parameter for `solve`, `spectrum` and `probe`.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Alternative to `radius` for `solve`: prescribed mean curvature.
    #[serde(default)]
    pub mean_curvature: Option<f64>,
    /// Leaf parameters for `foliate`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// `false` solves the leaves independently in parallel.
    #[serde(default = "default_true")]
    pub warm_start: bool,
    /// Sphere radii for `charges`.
    #[serde(default)]
    pub charge_radii: Option<Vec<f64>>,
    /// Sample radii for `audit`.
    #[serde(default)]
    pub audit_radii: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub tolerances: CrossTolerances,
    #[serde(default)]
    pub expect: Expectations,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_CHARGE_RADII: [f64; 4] = [25.0, 50.0, 100.0, 200.0];
pub const DEFAULT_AUDIT_RADII: [f64; 4] = [20.0, 40.0, 80.0, 160.0];

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config_str(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn check_radii(path: &str, radii: &[f64], increasing: bool) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::schema(path, "must not be empty"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::schema(
            path,
            format!("radii must be positive and finite (got {r})"),
        ));
    }
    if increasing && radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::schema(path, "radii must be strictly increasing"));
    }
    Ok(())
}

fn check_q(path: &str, q: f64) -> Result<()> {
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::schema(path, format!("decay rate q = {q} outside (1/2, 1]")));
    }
    Ok(())
}

fn validate_metric(spec: &MetricSpec, path: &str) -> Result<()> {
    match spec {
        MetricSpec::Euclidean => Ok(()),
        MetricSpec::Schwarzschild { mass, .. } | MetricSpec::Harmonic { mass, .. } => {
            if !mass.is_finite() {
                return Err(Error::schema(format!("{path}.mass"), "must be finite"));
            }
            Ok(())
        }
        MetricSpec::PerturbedRt {
            base, q, degree, order, ..
        } => {
            check_q(&format!("{path}.q"), *q)?;
            if *degree < 2 || degree % 2 != 0 {
                return Err(Error::schema(format!("{path}.degree"), "must be even and at least 2"));
            }
            if order.unsigned_abs() as usize > *degree {
                return Err(Error::schema(format!("{path}.order"), "|order| exceeds degree"));
            }
            validate_metric(base, &format!("{path}.base"))
        }
        MetricSpec::Tabulated { order, q, .. } => {
            if let Some(q) = q {
                check_q(&format!("{path}.q"), *q)?;
            }
            if *order == 0 || *order > 8 {
                return Err(Error::schema(
                    format!("{path}.order"),
                    "interpolation order must be in 1..=8",
                ));
            }
            Ok(())
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        validate_metric(&self.metric, "metric")?;
        if let Some(r) = self.chart.r_min {
            if !(r >= 0.0) {
                return Err(Error::schema("chart.r_min", "must be non-negative"));
            }
        }
        if let Some(h) = self.chart.fd_step {
            if !(h > 0.0) {
                return Err(Error::schema("chart.fd_step", "must be positive"));
            }
        }
        if let Some(r) = self.radius {
            check_radii("radius", &[r], false)?;
        }
        if let Some(h) = self.mean_curvature {
            if !(h > 0.0) {
                return Err(Error::schema("mean_curvature", "must be positive"));
            }
        }
        if let Some(r) = &self.radii {
            check_radii("radii", r, true)?;
        }
        if let Some(r) = &self.charge_radii {
            check_radii("charge_radii", r, true)?;
        }
        if let Some(r) = &self.audit_radii {
            check_radii("audit_radii", r, true)?;
        }
        self.solver.validate().map_err(|e| {
            Error::schema(
                "solver",
                e.to_string().trim_start_matches("invalid argument: ").to_string(),
            )
        })?;
        for (i, start) in self.probe.starts.iter().enumerate() {
            for (j, t) in start.iter().enumerate() {
                if t.m.unsigned_abs() as usize > t.l || t.l > self.solver.lmax {
                    return Err(Error::schema(
                        format!("probe.starts[{i}][{j}]"),
                        format!("need |m| <= l <= L (got l = {}, m = {})", t.l, t.m),
                    ));
                }
            }
        }
        if !(self.tolerances.mass > 0.0 && self.tolerances.center > 0.0) {
            return Err(Error::schema("tolerances", "must be positive"));
        }
        Ok(())
    }

    fn family(&self, spec: &MetricSpec) -> Result<MetricFamily> {
        Ok(match spec {
            MetricSpec::Euclidean => MetricFamily::Euclidean,
            MetricSpec::Schwarzschild { mass, center } => MetricFamily::SchwarzschildIsotropic {
                mass: *mass,
                center: *center,
            },
            MetricSpec::Harmonic {
                mass,
                dipole,
                quadrupole,
                center,
                shift,
            } => MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics {
                mass: *mass,
                dipole: *dipole,
                quadrupole: *quadrupole,
                center: *center,
                shift: *shift,
            }),
            MetricSpec::PerturbedRt {
                base,
                amplitude,
                q,
                degree,
                order,
            } => MetricFamily::PerturbedRT(PerturbedRT::new(self.family(base)?, *amplitude, *q, *degree, *order)?),
            MetricSpec::Tabulated {
                path,
                order,
                q,
                mass,
                center,
                rt,
            } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    self.base_dir.join(path)
                };
                let mut t = TabulatedMetric::load(&full, *order)?;
                if let Some(q) = q {
                    t.q = *q;
                }
                t.declared_mass = *mass;
                t.declared_center = *center;
                t.rt_flag = *rt;
                MetricFamily::Tabulated(Arc::new(t))
            }
        })
    }

    pub fn metric_field(&self) -> Result<MetricField> {
        let mut field = MetricField::new(self.family(&self.metric)?);
        if let Some(r) = self.chart.r_min {
            field = field.with_r_min(r);
        }
        if self.chart.derivatives == DerivativeMode::FiniteDifference {
            field = field.with_derivatives(Derivatives::FiniteDifference {
                step: self.chart.fd_step,
            });
        }
        Ok(field)
    }

    pub fn perturbations(&self) -> Vec<HarmonicCoeffs> {
        self.probe
            .starts
            .iter()
            .map(|terms| {
                let mut c = HarmonicCoeffs::zeros(self.solver.lmax);
                for t in terms {
                    c.set(t.l, t.m, c.get(t.l, t.m) + t.amplitude);
                }
                c
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            parse_config_str(r#"{"metric": {"family": "schwarzschild", "mass": 1.0}, "radii": [10, 20]}"#).unwrap();
        assert_eq!(cfg.solver.lmax, 24);
        assert_eq!(cfg.solver.max_outer, 50);
        assert!((cfg.solver.tolerance(10.0) - 2e-11).abs() < 1e-25);
        assert!(cfg.warm_start);
    }

    #[test]
    fn unknown_key_names_path() {
        let err = parse_config_str(r#"{"metric": {"family": "euclidean"}, "lapse_mode": 1}"#).unwrap_err();
        match err {
            Error::SchemaError { message, .. } => assert!(message.contains("lapse_mode"), "{message}"),
            e => panic!("{e}"),
        }
        let err = parse_config_str(r#"{"metric": {"family": "euclidean"}, "solver": {"L": 8, "tol": 1}}"#).unwrap_err();
        match err {
            Error::SchemaError { path, .. } => assert_eq!(path, "solver.tol"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn q_range_is_enforced() {
        let text = r#"{"metric": {"family": "perturbed_rt", "base": {"family": "schwarzschild", "mass": 1},
            "amplitude": 0.1, "q": 0.4, "degree": 2}}"#;
        match parse_config_str(text).unwrap_err() {
            Error::SchemaError { path, .. } => assert_eq!(path, "metric.q"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn command_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("lapse".parse::<Command>().is_err());
    }
}
