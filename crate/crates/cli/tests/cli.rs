use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dplab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dplab"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// `(t, metric, value)` rows of a norms.csv.
fn csv_rows(path: &Path) -> Vec<(f64, String, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].to_string(), f[3].parse().unwrap())
        })
        .collect()
}

fn final_inflation(report: &Value) -> f64 {
    let o = &report["outcome"]["report"];
    let last = o["records"].as_array().unwrap().last().unwrap();
    last["u_besov"].as_f64().unwrap() / o["initial"]["rho0_besov"].as_f64().unwrap()
}

#[test]
fn construct_writes_dumps_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dplab(&["construct", "--n", "8"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let side = json(&tmp.path().join("construct.json"));
    assert_eq!(side["config"]["n"], 8);
    assert!(side["norms"]["rho0_linf"].as_f64().unwrap() > 0.0);
    assert_eq!(side["norms"]["u0_linf"].as_f64().unwrap(), 0.0);
    let files = side["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        assert!(Path::new(f.as_str().unwrap()).exists(), "{f}");
    }
    let echo = std::fs::read_to_string(tmp.path().join("config.toml")).unwrap();
    assert!(echo.contains("n = 8"));
}

#[test]
fn construct_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(dplab(&["construct", "--n", "8", "--verbosity", "0"], d.path()).status.success());
    }
    let sa = json(&a.path().join("construct.json"));
    let sb = json(&b.path().join("construct.json"));
    assert_eq!(sa["norms"], sb["norms"]);
    for f in sa["files"].as_array().unwrap() {
        let name = Path::new(f.as_str().unwrap()).file_name().unwrap();
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn n_not_divisible_by_four_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dplab(&["construct", "--n", "7"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("multiple of 4"), "{}", stderr(&o));
}

#[test]
fn paper_geometry_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dplab(&["construct", "--n", "8", "--geometry", "paper"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unrepresentable centres"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "n = 8\nstep_size = 0.1\n").unwrap();
    let o = dplab(&["construct", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step_size"), "{}", stderr(&o));
}

#[test]
fn zero_data_evolves_to_zero_norms() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dplab(&["evolve", "--n", "8", "--terms", "none", "--steps", "4"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("norms.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.2 == 0.0), "nonzero row");
    let report = json(&tmp.path().join("report.json"));
    assert_eq!(report["partial"], false);
    assert_eq!(report["config"]["terms"], "none");
}

#[test]
fn blow_up_exits_with_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dplab(
        &["evolve", "--n", "8", "--steps", "4", "--diagnostics", "false", "--blowup-threshold", "1e-12"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("partial"));
    let report = json(&tmp.path().join("report.json"));
    assert_eq!(report["partial"], true);
    assert!(tmp.path().join("norms.csv").exists());
}

#[test]
fn halving_dt_barely_moves_inflation() {
    let t0 = 1.0 / 8f64.ln();
    let full = tempfile::tempdir().unwrap();
    let o = dplab(&["evolve", "--n", "8", "--diagnostics", "false"], full.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&full.path().join("norms.csv"));
    for snap in [0.0, 0.5 * t0, t0] {
        assert!(rows.iter().any(|r| (r.0 - snap).abs() < 1e-12), "no rows at t = {snap}");
    }

    let half = tempfile::tempdir().unwrap();
    let dt = (t0 / 64.0).to_string();
    let o = dplab(&["evolve", "--n", "8", "--diagnostics", "false", "--dt", &dt], half.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let a = final_inflation(&json(&full.path().join("report.json")));
    let b = final_inflation(&json(&half.path().join("report.json")));
    assert!(a > 0.0);
    assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
}
