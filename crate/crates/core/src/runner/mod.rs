//! Command orchestration and data export.
//!
//! Every CSV file starts with `# cmcfol-schema-version: 1 <kind>`; JSON
//! summaries carry `schema_version` and `kind` as their first keys. Wall
//! clock time appears only in `report.json`.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{
    parse_config, parse_config_str, ChartConfig, Command, CrossTolerances, DerivativeMode, Expectations, MetricSpec,
    PerturbationTerm, ProbeConfig, RunConfig, DEFAULT_AUDIT_RADII, DEFAULT_CHARGE_RADII,
};

use crate::charges::{compute_charges, hawking_mass_from_geometry, Charges};
use crate::error::{Error, Result};
use crate::linalg3::{self, Vec3};
use crate::metric::{decay_audit, MetricField};
use crate::solver::{
    build_foliation, solve_leaf, solve_leaf_for_mean_curvature, uniqueness_probe, FoliationResult, LeafDiagnostics,
    LeafResult,
};
use crate::spectrum::assemble_jacobi_from_geometry;
use crate::surface::{fundamental_forms, write_leaf_binary, write_leaf_csv};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub command: Command,
    /// Overrides the config's `out`; falls back to `cmcfol-out`.
    pub out_dir: Option<PathBuf>,
    pub assert: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertionOutcome {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub software_version: &'static str,
    pub command: Command,
    pub status: &'static str,
    pub exit_code: i32,
    pub error: Option<String>,
    pub outputs: Vec<String>,
    pub assertions: Vec<AssertionOutcome>,
    pub wall_seconds: f64,
    pub config: RunConfig,
}

/// Exit status for an error escaping a command.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::SchemaError { .. }
        | Error::FileNotFound(_)
        | Error::InvalidArgument(_)
        | Error::Json(_)
        | Error::Format(_)
        | Error::Io(_)
        | Error::NonFiniteInput(_)
        | Error::InsufficientRadii { .. }
        | Error::InsufficientLeaves(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

#[derive(Serialize)]
struct Doc<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    status: &'a str,
    #[serde(flatten)]
    body: T,
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn csv(&mut self, name: &str, kind: &str, columns: &[&str]) -> Result<BufWriter<File>> {
        let mut w = self.create(name)?;
        writeln!(w, "# cmcfol-schema-version: {SCHEMA_VERSION} {kind}")?;
        writeln!(w, "{}", columns.join(","))?;
        Ok(w)
    }

    fn json<T: Serialize>(&mut self, name: &str, kind: &str, failed: bool, body: T) -> Result<()> {
        let mut w = self.create(name)?;
        let doc = Doc {
            schema_version: SCHEMA_VERSION,
            kind,
            status: if failed { "failed" } else { "ok" },
            body,
        };
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Default)]
struct Checks {
    enabled: bool,
    list: Vec<AssertionOutcome>,
}

impl Checks {
    fn abs(&mut self, name: &str, expected: f64, actual: f64, tol: f64) {
        if self.enabled {
            self.list.push(AssertionOutcome {
                name: name.into(),
                expected,
                actual,
                tolerance: tol,
                passed: (actual - expected).abs() <= tol,
            });
        }
    }

    fn flag(&mut self, name: &str, expected: bool, actual: bool) {
        if self.enabled {
            self.list.push(AssertionOutcome {
                name: name.into(),
                expected: expected as u8 as f64,
                actual: actual as u8 as f64,
                tolerance: 0.0,
                passed: expected == actual,
            });
        }
    }

    fn vec(&mut self, name: &str, expected: Vec3, actual: Vec3, tol: f64) {
        let d = linalg3::norm(linalg3::sub(expected, actual));
        self.abs(name, 0.0, d, tol);
    }
}

/// Per-leaf summary written to JSON.
#[derive(Clone, Debug, Serialize)]
pub struct LeafRecord {
    pub radius: f64,
    pub center: Vec3,
    pub h_achieved: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub f_bar: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub converged: bool,
    pub eta0: Option<f64>,
    pub eta1: Option<f64>,
    pub mu0: Option<f64>,
    pub eigenvalues: Vec<f64>,
    pub hawking_mass: f64,
    pub diagnostics: LeafDiagnostics,
}

impl LeafRecord {
    pub fn new(field: &MetricField, leaf: &LeafResult, tolerance: f64) -> Result<Self> {
        let geo = fundamental_forms(&leaf.leaf, field)?;
        let s = leaf.spectrum.as_ref();
        Ok(LeafRecord {
            radius: leaf.radius,
            center: leaf.center,
            h_achieved: leaf.h_achieved,
            residual: leaf.residual,
            tolerance,
            f_bar: leaf.f_bar,
            iterations: leaf.iterations,
            newton_iterations: leaf.newton_iterations,
            converged: leaf.converged,
            eta0: s.map(|s| s.eta0),
            eta1: s.map(|s| s.eta1),
            mu0: s.map(|s| s.mu0),
            eigenvalues: s.map(|s| s.eigenvalues.clone()).unwrap_or_default(),
            hawking_mass: hawking_mass_from_geometry(&leaf.leaf, &geo),
            diagnostics: leaf.diagnostics.clone(),
        })
    }

    fn stable(&self) -> bool {
        self.mu0.is_some_and(|m| m > 0.0)
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    field: MetricField,
    out: Output,
    checks: Checks,
}

/// `Ok(true)` when the command ran but the numerics failed (exit 2).
type Outcome = Result<bool>;

fn need<T: Copy>(v: Option<T>, name: &str, cmd: Command) -> Result<T> {
    v.ok_or_else(|| Error::schema(name, format!("required by `{cmd}`")))
}

fn solve_single(ctx: &Ctx) -> Result<LeafResult> {
    match (ctx.cfg.radius, ctx.cfg.mean_curvature) {
        (Some(r), None) => solve_leaf(&ctx.field, r, &ctx.cfg.solver),
        (None, Some(h)) => solve_leaf_for_mean_curvature(&ctx.field, h, &ctx.cfg.solver),
        (Some(_), Some(_)) => Err(Error::schema("mean_curvature", "give either radius or mean_curvature")),
        (None, None) => Err(Error::schema("radius", "required")),
    }
}

/// Splits a solver error carrying a best iterate from other errors.
fn leaf_or_best(res: Result<LeafResult>) -> Result<(LeafResult, Option<String>)> {
    match res {
        Ok(l) => Ok((l, None)),
        Err(Error::MaxIterations {
            best,
            iterations,
            residual,
        }) => {
            let msg = Error::MaxIterations {
                best: best.clone(),
                iterations,
                residual,
            }
            .to_string();
            Ok((*best, Some(msg)))
        }
        Err(e) => Err(e),
    }
}

fn leaf_checks(ctx: &mut Ctx, rec: &LeafRecord) {
    let e = &ctx.cfg.expect;
    if let Some(h) = e.h_achieved {
        let tol = e.h_rel_tol.unwrap_or(1e-9) * h.abs();
        ctx.checks.abs("h_achieved", h, rec.h_achieved, tol);
    }
    if let Some(s) = e.strictly_stable {
        ctx.checks.flag("strictly_stable", s, rec.stable());
    }
    if let Some(c) = e.center {
        ctx.checks.vec(
            "leaf_center",
            c,
            rec.center,
            e.center_tol.unwrap_or(ctx.cfg.tolerances.center),
        );
    }
}

#[derive(Serialize)]
struct SolveBody<'a> {
    leaf: &'a LeafRecord,
    error: Option<String>,
}

fn cmd_solve(ctx: &mut Ctx) -> Outcome {
    let (leaf, err) = leaf_or_best(solve_single(ctx))?;
    let tol = ctx.cfg.solver.tolerance(leaf.radius);
    let rec = LeafRecord::new(&ctx.field, &leaf, tol)?;
    let geo = fundamental_forms(&leaf.leaf, &ctx.field)?;
    let mut w = ctx.out.create("leaf.csv")?;
    write_leaf_csv(&mut w, &leaf.leaf, &geo)?;
    w.flush()?;
    let mut w = ctx.out.create("leaf.bin")?;
    write_leaf_binary(&mut w, &leaf.leaf)?;
    w.flush()?;
    let failed = err.is_some();
    ctx.out
        .json("leaf.json", "leaf", failed, SolveBody { leaf: &rec, error: err })?;
    leaf_checks(ctx, &rec);
    if let Some(m) = ctx.cfg.expect.mass {
        let tol = ctx.cfg.expect.mass_tol.unwrap_or(ctx.cfg.tolerances.mass);
        ctx.checks.abs("hawking_mass", m, rec.hawking_mass, tol);
    }
    Ok(failed)
}

#[derive(Serialize)]
struct FoliationBody<'a> {
    success: bool,
    warm_start: bool,
    lapse_min: Option<f64>,
    leaves: Vec<LeafRecord>,
    nesting: &'a [crate::solver::NestingEntry],
    geometric_center: Option<&'a crate::charges::GeometricCenter>,
    center_of_mass: Option<Vec3>,
    failures: &'a [(f64, String)],
}

fn cmd_foliate(ctx: &mut Ctx) -> Outcome {
    let radii = ctx
        .cfg
        .radii
        .clone()
        .ok_or_else(|| Error::schema("radii", "required by `foliate`"))?;
    let fol: FoliationResult = build_foliation(&ctx.field, &radii, &ctx.cfg.solver, ctx.cfg.warm_start)?;
    let records = fol
        .leaves
        .iter()
        .map(|l| LeafRecord::new(&ctx.field, l, ctx.cfg.solver.tolerance(l.radius)))
        .collect::<Result<Vec<_>>>()?;
    let mut w = ctx.out.csv(
        "foliation.csv",
        "foliation",
        &[
            "radius",
            "center_x",
            "center_y",
            "center_z",
            "h_achieved",
            "residual",
            "iterations",
            "eta0",
            "eta1",
            "mu0",
            "hawking_mass",
            "centroid_x",
            "centroid_y",
            "centroid_z",
            "sup_psi",
            "sup_psi_odd",
            "sup_traceless_a",
            "lapse_min_to_next",
        ],
    )?;
    for (rec, ch) in records.iter().zip(&fol.charges) {
        let lapse = fol
            .nesting
            .iter()
            .find(|e| e.r_inner == rec.radius)
            .map_or(f64::NAN, |e| e.lapse_min);
        writeln!(
            w,
            "{}",
            row(&[
                rec.radius,
                rec.center[0],
                rec.center[1],
                rec.center[2],
                rec.h_achieved,
                rec.residual,
                rec.iterations as f64,
                rec.eta0.unwrap_or(f64::NAN),
                rec.eta1.unwrap_or(f64::NAN),
                rec.mu0.unwrap_or(f64::NAN),
                rec.hawking_mass,
                ch.centroid[0],
                ch.centroid[1],
                ch.centroid[2],
                rec.diagnostics.sup_psi,
                rec.diagnostics.sup_psi_odd,
                rec.diagnostics.sup_traceless_a,
                lapse,
            ])
        )?;
    }
    w.flush()?;
    let mass = ctx.field.declared_mass();
    let center_of_mass = match (fol.geometric_center.as_ref(), mass) {
        (Some(_), Some(m)) if m.abs() > 1e-10 => compute_charges(&ctx.field, &DEFAULT_CHARGE_RADII)?.center,
        _ => None,
    };
    let failed = !fol.success;
    ctx.out.json(
        "foliation.json",
        "foliation",
        failed,
        FoliationBody {
            success: fol.success,
            warm_start: ctx.cfg.warm_start,
            lapse_min: fol.lapse_min(),
            leaves: records.clone(),
            nesting: &fol.nesting,
            geometric_center: fol.geometric_center.as_ref(),
            center_of_mass,
            failures: &fol.failures,
        },
    )?;
    let e = ctx.cfg.expect.clone();
    if let Some(n) = e.nested {
        ctx.checks
            .flag("nested", n, fol.nesting.iter().all(|x| x.lapse_min > 0.0));
    }
    if let Some(s) = e.strictly_stable {
        ctx.checks
            .flag("strictly_stable", s, records.iter().all(LeafRecord::stable));
    }
    if let Some(m) = e.mass {
        if let Some(last) = records.last() {
            let tol = e.mass_tol.unwrap_or(ctx.cfg.tolerances.mass);
            ctx.checks.abs("hawking_mass_outer", m, last.hawking_mass, tol);
        }
    }
    if let Some(gc) = &fol.geometric_center {
        let tol = e.center_tol.unwrap_or(ctx.cfg.tolerances.center);
        if let Some(c) = e.center {
            ctx.checks.vec("geometric_center", c, gc.limit, tol);
        }
        if let Some(c) = center_of_mass {
            ctx.checks.vec(
                "geometric_center_vs_center_of_mass",
                c,
                gc.limit,
                ctx.cfg.tolerances.center,
            );
        }
    }
    Ok(failed)
}

#[derive(Serialize)]
struct ChargesBody<'a> {
    radii: &'a [f64],
    charges: &'a Charges,
    mass_cross_gap: f64,
    mass_cross_ok: bool,
}

fn cmd_charges(ctx: &mut Ctx) -> Outcome {
    let radii = ctx.cfg.charge_radii.clone().unwrap_or(DEFAULT_CHARGE_RADII.to_vec());
    let ch = compute_charges(&ctx.field, &radii)?;
    let mut w = ctx.out.csv(
        "charges.csv",
        "charges",
        &["radius", "m_flux", "m_ricci", "center_x", "center_y", "center_z"],
    )?;
    for (i, r) in radii.iter().enumerate() {
        let c = |a: usize| ch.center_series.as_ref().map_or(f64::NAN, |s| s[a].values[i]);
        writeln!(
            w,
            "{}",
            row(&[*r, ch.m_flux.values[i], ch.m_ricci.values[i], c(0), c(1), c(2)])
        )?;
    }
    w.flush()?;
    let gap = (ch.m_flux.limit - ch.m_ricci.limit).abs();
    let tol = ctx.cfg.tolerances.mass;
    ctx.out.json(
        "charges.json",
        "charges",
        false,
        ChargesBody {
            radii: &radii,
            charges: &ch,
            mass_cross_gap: gap,
            mass_cross_ok: gap <= tol,
        },
    )?;
    let e = ctx.cfg.expect.clone();
    ctx.checks.abs("mass_cross_definition", 0.0, gap, tol);
    if let Some(m) = e.mass {
        let t = e.mass_tol.unwrap_or(tol);
        ctx.checks.abs("m_flux", m, ch.m_flux.limit, t);
        ctx.checks.abs("m_ricci", m, ch.m_ricci.limit, t);
    }
    if let (Some(c), Some(got)) = (e.center, ch.center) {
        ctx.checks.vec(
            "center_of_mass",
            c,
            got,
            e.center_tol.unwrap_or(ctx.cfg.tolerances.center),
        );
    }
    Ok(false)
}

#[derive(Serialize)]
struct SpectrumBody<'a> {
    leaf: &'a LeafRecord,
    eigenvalues: &'a [f64],
    symmetry_defect: f64,
    /// `μ₀ R³ / (6m)` when the mass is known.
    mu0_normalized: Option<f64>,
    error: Option<String>,
}

fn cmd_spectrum(ctx: &mut Ctx) -> Outcome {
    let (leaf, err) = leaf_or_best(solve_single(ctx))?;
    let geo = fundamental_forms(&leaf.leaf, &ctx.field)?;
    let jm = assemble_jacobi_from_geometry(&leaf.leaf, &geo)?;
    let spec = crate::spectrum::eigen_solve(&jm, ctx.cfg.solver.spectrum_count)?;
    let mut leaf = leaf;
    leaf.spectrum = Some(spec.clone());
    let rec = LeafRecord::new(&ctx.field, &leaf, ctx.cfg.solver.tolerance(leaf.radius))?;
    let mut w = ctx.out.csv("spectrum.csv", "spectrum", &["index", "eigenvalue"])?;
    for (i, v) in spec.eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()?;
    let mass = ctx.field.declared_mass().filter(|m| m.abs() > 1e-10);
    let failed = err.is_some();
    ctx.out.json(
        "spectrum.json",
        "spectrum",
        failed,
        SpectrumBody {
            leaf: &rec,
            eigenvalues: &spec.eigenvalues,
            symmetry_defect: jm.symmetry_defect(),
            mu0_normalized: mass.map(|m| spec.mu0 * leaf.radius.powi(3) / (6.0 * m)),
            error: err,
        },
    )?;
    leaf_checks(ctx, &rec);
    Ok(failed)
}

fn cmd_audit(ctx: &mut Ctx) -> Outcome {
    let radii = ctx.cfg.audit_radii.clone().unwrap_or(DEFAULT_AUDIT_RADII.to_vec());
    let audit = decay_audit(&ctx.field, &radii)?;
    let mut w = ctx
        .out
        .csv("audit.csv", "decay_audit", &["quantity", "radius", "sup"])?;
    for q in &audit.quantities {
        for (r, s) in radii.iter().zip(&q.sups) {
            writeln!(w, "{},{r},{s}", q.name)?;
        }
    }
    w.flush()?;
    ctx.out.json("audit.json", "decay_audit", false, &audit)?;
    if let Some(f) = ctx.cfg.expect.identically_flat {
        ctx.checks.flag("identically_flat", f, audit.identically_flat);
    }
    Ok(false)
}

#[derive(Serialize)]
struct ProbeBody<'a> {
    reference: &'a LeafRecord,
    report: &'a crate::solver::ProbeReport,
}

fn cmd_probe(ctx: &mut Ctx) -> Outcome {
    let r = need(ctx.cfg.radius, "radius", Command::Probe)?;
    let reference = solve_leaf(&ctx.field, r, &ctx.cfg.solver)?;
    let rec = LeafRecord::new(&ctx.field, &reference, ctx.cfg.solver.tolerance(r))?;
    let report = uniqueness_probe(&ctx.field, &reference, &ctx.cfg.perturbations(), &ctx.cfg.solver)?;
    let mut w = ctx
        .out
        .csv("probe.csv", "probe", &["start", "amplitude", "converged", "distance"])?;
    for (i, s) in report.starts.iter().enumerate() {
        writeln!(
            w,
            "{i},{},{},{}",
            s.amplitude,
            s.converged as u8,
            s.distance.unwrap_or(f64::NAN)
        )?;
    }
    w.flush()?;
    let failed = !report.success;
    ctx.out.json(
        "probe.json",
        "probe",
        failed,
        ProbeBody {
            reference: &rec,
            report: &report,
        },
    )?;
    Ok(failed)
}

fn dispatch(ctx: &mut Ctx, cmd: Command) -> Outcome {
    match cmd {
        Command::Solve => cmd_solve(ctx),
        Command::Foliate => cmd_foliate(ctx),
        Command::Charges => cmd_charges(ctx),
        Command::Spectrum => cmd_spectrum(ctx),
        Command::Audit => cmd_audit(ctx),
        Command::Probe => cmd_probe(ctx),
    }
}

fn out_dir(cfg: &RunConfig, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| {
            cfg.out.as_ref().map(|o| {
                if o.is_absolute() {
                    o.clone()
                } else {
                    cfg.base_dir.join(o)
                }
            })
        })
        .unwrap_or_else(|| PathBuf::from("cmcfol-out"))
}

/// Runs one command and writes its artifacts plus `report.json`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> RunReport {
    let start = Instant::now();
    let dir = out_dir(cfg, opts);
    let mut files = Vec::new();
    let mut assertions = Vec::new();
    let result: Result<bool> = (|| {
        if let Some(c) = cfg.command {
            if c != opts.command {
                return Err(Error::schema(
                    "command",
                    format!("config is for `{c}`, not `{}`", opts.command),
                ));
            }
        }
        fs::create_dir_all(&dir)?;
        let mut ctx = Ctx {
            cfg,
            field: cfg.metric_field()?,
            out: Output {
                dir: dir.clone(),
                files: Vec::new(),
            },
            checks: Checks {
                enabled: opts.assert,
                list: Vec::new(),
            },
        };
        let res = dispatch(&mut ctx, opts.command);
        files = ctx.out.files;
        assertions = ctx.checks.list;
        res
    })();
    let (status, exit_code, error) = match result {
        Ok(true) => ("failed", EXIT_SOLVER, Some("solver did not converge".to_string())),
        Ok(false) if assertions.iter().any(|a| !a.passed) => ("assertion_failed", EXIT_ASSERTION, None),
        Ok(false) => ("ok", EXIT_OK, None),
        Err(e) => ("failed", exit_code_for(&e), Some(e.to_string())),
    };
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        kind: "report",
        software_version: env!("CARGO_PKG_VERSION"),
        command: opts.command,
        status,
        exit_code,
        error,
        outputs: files,
        assertions,
        wall_seconds: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    if let Err(e) = write_report(&dir, &report) {
        if report.exit_code == EXIT_OK {
            report.exit_code = EXIT_USAGE;
            report.status = "failed";
        }
        report.error.get_or_insert(format!("could not write report: {e}"));
    }
    report
}

fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
