use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use portgen_cli::RunConfig;
use serde_json::Value;

fn portgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_portgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn quick() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.verify.n_states = 4;
    cfg.integrator.dt = 5e-3;
    cfg.integrator.t_final = 0.05;
    cfg.integrator.output_interval = Some(0.01);
    cfg
}

fn balance_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# portgen.balance/1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_default_passes_and_dumps_operators() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = portgen(&["verify", "--out", out.to_str().unwrap(), "--dump-operators"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["schema"], "portgen.verify/1");
    let j = fs::read_to_string(out.join("J.txt")).unwrap();
    // Eight periodic cells give a 24 x 24 matrix.
    assert_eq!(j.lines().count(), 24);
    assert!(out.join("R.txt").exists());
}

#[test]
fn verify_names_the_corrupted_operator() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.test_hooks.flip_j_sign = true;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("v");
    let o = portgen(&["verify", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report = read_json(&out.join("verify_report.json"));
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["poisson_skew"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL poisson_skew"));
}

#[test]
fn negative_bulk_viscosity_is_rejected_before_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mut value = serde_json::to_value(quick()).unwrap();
    value["material"]["zeta"] = (-0.1).into();
    let path = dir.path().join("bad.json");
    fs::write(&path, value.to_string()).unwrap();
    let out = dir.path().join("v");
    let o = portgen(&["verify", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zeta"));
    assert!(!out.exists());
}

#[test]
fn seed_flag_overrides_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    let out = dir.path().join("v");
    let o = portgen(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&out.join("verify_report.json"))["seed"], 42);
}

#[test]
fn isolated_heat_run_has_monotone_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    let out = dir.path().join("r");
    let o = portgen(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = balance_rows(&out.join("balance.csv"));
    assert_eq!(
        header.join(","),
        "t,H,S,E,dHdt,dSdt,dEdt,pair_yH_u,pair_yS_u,pair_yE_u,dissipation,res_H,res_S,res_E"
    );
    assert_eq!(rows.len(), 6);
    for w in rows.windows(2) {
        assert!(w[1][2] > w[0][2], "S must grow: {} -> {}", w[0][2], w[1][2]);
    }
    let snap = read_json(&out.join("state_0.050000.json"));
    assert_eq!(snap["rho"].as_array().unwrap().len(), 32);
    assert_eq!(snap["x"].as_array().unwrap().len(), 32);
    assert!(out.join("state_0.000000.json").exists());
}

#[test]
fn zero_horizon_gives_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.integrator.t_final = 0.0;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("r");
    let o = portgen(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = balance_rows(&out.join("balance.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let path = write_config(dir.path(), &quick());
    let out = blocker.join("sub");
    let o = portgen(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("i/o error"));
}

#[test]
fn runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &quick());
    let read = |name: &str| {
        let out = dir.path().join(name);
        let o = portgen(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        (
            fs::read(out.join("balance.csv")).unwrap(),
            fs::read(out.join("state_0.050000.json")).unwrap(),
        )
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn converge_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.converge.levels = vec![16, 32, 64];
    cfg.converge.t_final = 0.05;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("c");
    let o = portgen(&["converge", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("converge_report.json"));
    let order = |name: &str| {
        report["studies"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["name"] == name)
            .unwrap()["order"]
            .as_f64()
            .unwrap()
    };
    assert!((order("spatial_energy") - 2.0).abs() < 0.3);
    assert!((order("oracle") - 2.0).abs() < 0.3);
    assert!((order("integrator_rk4") - 4.0).abs() < 0.5);
}

#[test]
fn converge_needs_three_levels() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.converge.levels = vec![32];
    let path = write_config(dir.path(), &cfg);
    let o = portgen(&["converge", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3 levels"));
}

#[test]
fn viscous_case_agrees_with_the_full_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick();
    cfg.material = cfg.material.with_transport(0.01, 0.01, 0.005);
    cfg.converge.levels = vec![16, 32, 64];
    cfg.converge.t_final = 0.05;
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("c");
    let o = portgen(&["converge", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&out.join("converge_report.json"));
    let oracle = report["studies"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "oracle")
        .unwrap();
    let order = oracle["order"].as_f64().unwrap();
    assert!((1.7..=2.3).contains(&order), "{order}");
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 4);
}
