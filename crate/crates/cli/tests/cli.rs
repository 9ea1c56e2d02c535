use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbl")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn close(s: &Value, x: f64, tol: f64) -> bool {
    (s.as_str().unwrap().parse::<f64>().unwrap() - x).abs() <= tol
}

#[test]
fn classify_shipped_configs() {
    // (a, b) separations against T (sqrt p1 + sqrt p2)^2 = 2.
    let cases = [("large.json", "large", 2.0 / 3.4, 1.4), ("small.json", "small", 0.8 / 1.4, 0.24), ("critical.json", "critical", 2.0 / 3.0, 1.0)];
    for (file, regime, t_crit, temp_crit) in cases {
        let out = hbl(&["classify", "--config", &config(file)]);
        assert_eq!(out.status.code(), Some(0), "{file}");
        let doc = stdout_json(&out);
        assert_eq!(doc["regime"], regime, "{file}");
        assert!(close(&doc["t_crit"], t_crit, 1e-15), "{file}");
        assert!(close(&doc["T_crit"], temp_crit, 1e-15), "{file}");
    }
}

#[test]
fn artifact_embeds_config_and_version() {
    let doc = stdout_json(&hbl(&["classify", "--config", &config("large.json")]));
    assert_eq!(doc["schema"], "hbl-artifact/1");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["input"]["b"][0], "0.7");
    assert_eq!(doc["config"]["resolved"]["precision"], 256);
    let b1 = doc["config"]["resolved"]["b"][0].as_str().unwrap();
    assert!(b1.starts_with("6.99999999999999999999999999999"), "{b1}");
}

#[test]
fn identities_all_pass() {
    let out = hbl(&["identities", "--n", "2,2", "--m", "2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["all_pass"], true);
    let list = doc["identities"].as_array().unwrap();
    assert!(!list.is_empty());
    assert!(list.iter().all(|r| r["pass"] == true));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = hbl(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(hbl(&[]).status.code(), Some(64));
}

#[test]
fn help_exits_zero() {
    let out = hbl(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["classify", "geometry", "coefficients", "identities", "density", "painleve", "scaling", "spectral", "phase-diagram"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_schema = dir.path().join("bad.json");
    std::fs::write(&bad_schema, r#"{"schema":"hbl-config/0","a":[1,-1],"b":[1,-1],"p":[0.5,0.5]}"#).unwrap();
    let reversed = dir.path().join("reversed.json");
    std::fs::write(&reversed, r#"{"schema":"hbl-config/1","a":[-1,1],"b":[1,-1],"p":[0.5,0.5]}"#).unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["classify".into(), "--config".into(), bad_schema.display().to_string()],
        vec!["classify".into(), "--config".into(), reversed.display().to_string()],
        vec!["classify".into(), "--config".into(), "/nonexistent/c.json".into()],
        vec!["geometry".into(), "--t".into(), "1.5".into()],
        vec!["coefficients".into(), "--n".into(), "1,2,3".into()],
        vec!["classify".into(), "--precision".into(), "lots".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = hbl(&refs);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = hbl(&["classify", "--config", &bad_schema.display().to_string()]);
    assert_eq!(stderr_json(&out)["error"]["code"], "config");
}

#[test]
fn wrong_regime_exits_two() {
    let out = hbl(&["density", "--config", &config("small.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["code"], "wrong_regime");
    // The double-scaling study needs critical separation.
    let out = hbl(&["scaling", "--config", &config("large.json"), "--L", "1", "--n-list", "8,12"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hbl(&["scaling", "--config", &config("critical.json"), "--L", "-9"]);
    assert_eq!(out.status.code(), Some(2));
}

fn run_into(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let d = dir.display().to_string();
    all.push("--out");
    all.push(&d);
    hbl(&all)
}

#[test]
fn artifacts_are_byte_identical() {
    for args in [vec!["coefficients", "--n", "2,1", "--m", "1,2"], vec!["phase-diagram"], vec!["geometry", "--t", "0.25"]] {
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let o1 = run_into(d1.path(), &args);
        let o2 = run_into(d2.path(), &args);
        assert_eq!(o1.status.code(), Some(0), "{args:?}");
        assert_eq!(o1.stdout, o2.stdout);
        let mut names: Vec<_> = std::fs::read_dir(d1.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in names {
            let a = std::fs::read(d1.path().join(&name)).unwrap();
            let b = std::fs::read(d2.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name:?}");
        }
    }
}

#[test]
fn csv_tables_are_lf_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["geometry", "--config", &config("large.json")]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("geometry.json")).unwrap()).unwrap();
    assert_eq!(doc, stdout_json(&out));
    let text = std::fs::read_to_string(dir.path().join("geometry.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("group,x,density"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 202);
    // Each semicircle has mass p_j = 1/2; trapezoid over 101 nodes.
    for g in [1.0, 2.0] {
        let pts: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == g).collect();
        let mass: f64 = pts.windows(2).map(|w| 0.5 * (w[1][1] - w[0][1]) * (w[0][2] + w[1][2])).sum();
        assert!((mass - 0.5).abs() < 2e-3, "group {g}: {mass}");
    }
}

#[test]
fn coefficients_match_identities_run() {
    let c = stdout_json(&hbl(&["coefficients", "--n", "2,2", "--m", "2,2"]));
    let products = c["products"].as_object().unwrap();
    assert_eq!(products.len(), 6);
    // Large separation at t = 1/2: cross-group products are tiny and c12c21 < 0.
    let c12 = products["c12c21"].as_str().unwrap().parse::<f64>().unwrap();
    assert!(c12 < 0.0);
    assert_eq!(c["h"].as_array().unwrap().len(), 4);
}

#[test]
fn painleve_reports_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["painleve"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert!(close(&doc["q0"], 0.36706155154807, 1e-12));
    assert!(close(&doc["q_prime0"], -0.2953721054475501, 1e-12));
    let text = std::fs::read_to_string(dir.path().join("painleve.csv")).unwrap();
    assert!(text.starts_with("s,q,q_prime,u\n"));
    assert_eq!(hbl(&["painleve", "--t", "0.5"]).status.code(), Some(2));
}

#[test]
fn spectral_branches_match_fractions() {
    let out = hbl(&["spectral", "--n", "2,2", "--m", "2,2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["branches"].as_array().unwrap().len(), 4);
    assert!(doc["max_deviation"].as_str().unwrap().parse::<f64>().unwrap() < 1e-10);
}

#[test]
fn phase_diagram_raster_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["phase-diagram", "--config", &config("critical.json")]);
    assert_eq!(out.status.code(), Some(0));
    let boundary = std::fs::read_to_string(dir.path().join("phase_boundary.csv")).unwrap();
    // At critical separation the boundary touches T = 1 only at t = 2/3.
    let min = boundary.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert!((1.0 - 1e-12..1.01).contains(&min), "{min}");
    let raster = std::fs::read_to_string(dir.path().join("phase_raster.csv")).unwrap();
    for line in raster.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let margin: f64 = f[3].parse().unwrap();
        assert_eq!(f[2] == "separated", margin >= 0.0, "{line}");
    }
}

#[test]
fn density_follows_semicircles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["density", "--config", &config("large.json"), "--n", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["split"], serde_json::json!([4, 4]));
    let text = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 121);
    // Total mass of the density is one.
    let x: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let d: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let mass: f64 = (1..x.len()).map(|i| 0.5 * (x[i] - x[i - 1]) * (d[i] + d[i - 1])).sum();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}
