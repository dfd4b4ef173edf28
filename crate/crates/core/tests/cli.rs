use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cmcfol(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cmcfol"));
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![cmd, "--config", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = cmcfol(&args, &[]);
    eprintln!("{}", String::from_utf8_lossy(&o.stderr));
    o.status.code().unwrap()
}

const FOLIATE: &str = r#"{
  "metric": {"family": "schwarzschild", "mass": 1.0},
  "radii": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
  "solver": {"L": 8},
  "expect": {"nested": true, "strictly_stable": true}
}"#;

#[test]
fn foliate_schwarzschild_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fol.json", FOLIATE);
    let out = dir.path().join("a");
    assert_eq!(run("foliate", &cfg, &out, &["--assert"]), 0);
    let csv = fs::read_to_string(out.join("foliation.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# cmcfol-schema-version: 1"));
    assert!(lines.next().unwrap().starts_with("radius,"));
    assert_eq!(lines.count(), 10);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("foliation.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["success"], true);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["exit_code"], 0);
    assert_eq!(report["config"]["solver"]["L"], 8);
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = FOLIATE.replace("\"solver\"", "\"warm_start\": false, \"solver\"");
    let cfg = write_config(dir.path(), "fol.json", &text);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |o: &Path| {
        vec![
            "foliate".to_string(),
            "--config".into(),
            cfg.clone(),
            "--out".into(),
            o.to_str().unwrap().into(),
        ]
    };
    let run_with = |o: &Path, threads: &str| {
        let v = args(o);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        cmcfol(&refs, &[("CMCFOL_THREADS", threads)]).status.code().unwrap()
    };
    assert_eq!(run_with(&a, "1"), 0);
    assert_eq!(run_with(&b, "4"), 0);
    for f in ["foliation.csv", "foliation.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"metric": {"family": "euclidean"}, "lapse_mode": "x"}"#,
    );
    let o = cmcfol(&["solve", "--config", &bad], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lapse_mode"));
    let q = write_config(
        dir.path(),
        "q.json",
        r#"{"metric": {"family": "perturbed_rt", "base": {"family": "euclidean"}, "amplitude": 1, "q": 1.5, "degree": 2}}"#,
    );
    let o = cmcfol(&["audit", "--config", &q], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric.q"));
    assert_eq!(
        cmcfol(&["solve", "--config", "/nonexistent/x.json"], &[]).status.code(),
        Some(1)
    );
    assert_eq!(cmcfol(&["lapse", "--config", &bad], &[]).status.code(), Some(1));
    let ok = write_config(dir.path(), "ok.json", r#"{"metric": {"family": "euclidean"}}"#);
    assert_eq!(
        cmcfol(
            &["audit", "--config", &ok, "--out", out.to_str().unwrap()],
            &[("CMCFOL_THREADS", "zero")]
        )
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn euclidean_charges_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"metric": {"family": "euclidean"}, "expect": {"mass": 0, "identically_flat": true}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run("charges", &cfg, &out, &["--assert"]), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("charges.json")).unwrap()).unwrap();
    assert_eq!(json["charges"]["m_flux"]["limit"], 0.0);
    assert_eq!(json["charges"]["m_ricci"]["limit"], 0.0);
    assert!(json["charges"]["center"].is_null());
    assert_eq!(run("audit", &cfg, &out, &["--assert"]), 0);
    let csv = fs::read_to_string(out.join("audit.csv")).unwrap();
    assert!(csv.starts_with("# cmcfol-schema-version: 1"));
}

#[test]
fn probe_with_oversized_perturbation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"metric": {"family": "schwarzschild", "mass": 1.0}, "radius": 20, "solver": {"L": 6},
            "probe": {"starts": [[{"l": 2, "m": 0, "amplitude": 0.05}], [{"l": 2, "m": 0, "amplitude": 50.0}]]}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run("probe", &cfg, &out, &[]), 2);
    let csv = fs::read_to_string(out.join("probe.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].split(',').nth(2) == Some("1"));
    assert!(rows[1].split(',').nth(2) == Some("0"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("probe.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "failed");
}

#[test]
fn solve_spectrum_and_failed_assertion() {
    let dir = tempfile::tempdir().unwrap();
    // closed-form H of the centered R = 10 sphere, evaluated here
    let a: f64 = 0.05;
    let h = 0.2 * (1.0 - a) / (1.0 + a).powi(3);
    let cfg = write_config(
        dir.path(),
        "s.json",
        &format!(
            r#"{{"metric": {{"family": "schwarzschild", "mass": 1.0}}, "radius": 10, "solver": {{"L": 8}},
                "expect": {{"h_achieved": {h}, "strictly_stable": true}}}}"#
        ),
    );
    let out = dir.path().join("o");
    assert_eq!(run("solve", &cfg, &out, &["--assert"]), 0);
    for f in ["leaf.csv", "leaf.json", "leaf.bin", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(run("spectrum", &cfg, &out, &["--assert"]), 0);
    let wrong = write_config(
        dir.path(),
        "w.json",
        r#"{"metric": {"family": "schwarzschild", "mass": 1.0}, "radius": 10, "solver": {"L": 8},
            "expect": {"h_achieved": 0.3}}"#,
    );
    assert_eq!(run("solve", &wrong, &out, &["--assert"]), 3);
    assert_eq!(run("solve", &wrong, &out, &[]), 0);
}

#[test]
fn tabulated_grid_from_file() {
    use cmcfol::metric::TabulatedMetric;
    let dir = tempfile::tempdir().unwrap();
    let rows = TabulatedMetric::sample_rows(
        |x| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r < 1.0 {
                return None;
            }
            let u = (1.0 + 0.5 / r).powi(4);
            Some([u, 0.0, 0.0, u, 0.0, u])
        },
        [-41.0; 3],
        [2.0; 3],
        [41; 3],
    );
    let mut csv = String::from("x,y,z,g11,g12,g13,g22,g23,g33\n");
    for r in &rows {
        csv.push_str(&r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    fs::write(dir.path().join("grid.csv"), csv).unwrap();
    let cfg = write_config(
        dir.path(),
        "t.json",
        r#"{"metric": {"family": "tabulated", "path": "grid.csv", "order": 4, "mass": 1.0},
            "chart": {"r_min": 6}, "audit_radii": [8, 14, 20, 32]}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(run("audit", &cfg, &out, &[]), 0);
}
