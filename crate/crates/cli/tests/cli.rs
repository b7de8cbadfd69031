//! End-to-end runs of the `solsurf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn solsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solsurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a report ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_full_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("enneper.obj");
    let out = solsurf(&[
        "generate",
        "--eta",
        "1",
        "--psi",
        "z",
        "--target",
        "e3-direct",
        "--domain",
        "-1:1:-1:1",
        "--res",
        "32",
        "--out",
        path_str(&obj),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 1024);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("f ")).count(),
        2 * 31 * 31
    );
    let r = report(&out);
    assert_eq!(r["command"], "generate");
    for k in ["checks", "config_echo", "details", "wall_ms"] {
        assert!(r.get(k).is_some(), "missing {k}");
    }
    assert!(r["checks"].get("hyperboloid").is_none());
}

#[test]
fn generate_h3_passes_hyperboloid() {
    let dir = tempfile::tempdir().unwrap();
    let ply = dir.path().join("cmc.ply");
    let rep = dir.path().join("cmc.json");
    let out = solsurf(&[
        "generate",
        "--eta",
        "1",
        "--psi",
        "z",
        "--target",
        "h3",
        "--lambda",
        "0.5",
        "--res",
        "32",
        "--out",
        path_str(&ply),
        "--report",
        path_str(&rep),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let h = &r["checks"]["hyperboloid"];
    assert_eq!(h["pass"], true);
    assert!(h["max"].as_f64().unwrap() < 1e-6);
    assert!(fs::read_to_string(&ply)
        .unwrap()
        .contains("property double x0"));
}

#[test]
fn missing_data_is_a_usage_error() {
    let out = solsurf(&["generate", "--eta", "1", "--out", "x.obj"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--psi"));

    let out = solsurf(&["generate", "--eta", "1", "--psi", "z", "--out", "x.stl"]);
    assert_eq!(out.status.code(), Some(1));

    let out = solsurf(&["generate", "--eta", "1", "--psi", "z*a", "--out", "x.obj"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--param"));
}

#[test]
fn verify_detects_incompatible_fields() {
    let base = [
        "verify", "--eta", "1", "--psi", "z", "--lambda", "0.5", "--res", "32",
    ];
    let out = solsurf(&base);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let r = report(&out);
    for k in [
        "gmc",
        "zero_curvature",
        "gauge",
        "loop_period",
        "hyperboloid",
    ] {
        assert_eq!(r["checks"][k]["pass"], true, "{k}");
    }

    let mut args = base.to_vec();
    args.extend(["--q-scale", "1.5"]);
    let out = solsurf(&args);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["checks"]["gmc"]["pass"], false);
    assert_eq!(r["checks"]["zero_curvature"]["pass"], false);
}

#[test]
fn limit_fits_first_order() {
    let out = solsurf(&["limit", "--eta", "1", "--psi", "z", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["details"]["order"].as_f64().unwrap() > 0.9);
    assert_eq!(r["details"]["table"].as_array().unwrap().len(), 3);

    let out = solsurf(&["limit", "--eta", "1", "--psi", "z", "--lambdas", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn to_ode_prints_coefficients() {
    let out = solsurf(&["ode", "to-ode", "--eta", "1", "--psi", "z"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("p = 0"), "{text}");
    assert!(text.contains("q = -1"), "{text}");
}

#[test]
fn from_ode_recovers_error_function_data() {
    let out = solsurf(&[
        "ode",
        "from-ode",
        "--p",
        "-2*z",
        "--q",
        "-2",
        "--domain",
        "-1:1:-1:1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exp(0.5*z^2)"), "{text}");
    assert!(text.contains("erf(z)"), "{text}");
}

#[test]
fn erf_example_writes_mesh_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("erf.obj");
    let rep = dir.path().join("erf.json");
    let out = solsurf(&[
        "ode",
        "erf-example",
        "--n",
        "1",
        "--c",
        "1",
        "--c1",
        "0",
        "--lambda",
        "1",
        "--domain",
        "0.5:1.5:-0.5:0.5",
        "--res",
        "16",
        "--out",
        path_str(&obj),
        "--report",
        path_str(&rep),
    ]);
    assert!(
        matches!(out.status.code(), Some(0 | 2)),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    for k in [
        "hyperboloid",
        "erf_constancy",
        "ode_coefficients",
        "det_drift",
    ] {
        assert_eq!(r["checks"][k]["pass"], true, "{k}");
    }
    assert!(r["details"].get("kummer_crosscheck").is_some());
    assert_eq!(
        fs::read_to_string(&obj)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("v "))
            .count(),
        256
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "eta = 1\npsi = z\nlambda = 2\nres = 33\n").unwrap();
    let out = solsurf(&["verify", "--config", path_str(&conf), "--lambda", "0.5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["config_echo"]["lambda"], "0.5");
    assert_eq!(r["config_echo"]["res"], "33");
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "verify",
        "--eta",
        "exp(z/3)",
        "--psi",
        "z^2 + 0.5*z",
        "--lambda",
        "0.8",
        "--res",
        "10",
    ];
    let mut a = report(&solsurf(&args));
    let mut b = report(&solsurf(&args));
    a.as_object_mut().unwrap().remove("wall_ms");
    b.as_object_mut().unwrap().remove("wall_ms");
    assert_eq!(a, b);
}
