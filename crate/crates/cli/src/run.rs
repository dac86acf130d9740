use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use portgen::{BalanceReport, Dynamics, Mesh, RunOutput, State};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const BALANCE_SCHEMA: &str = "portgen.balance/1";
pub const STATE_SCHEMA: &str = "portgen.state/1";

pub const BALANCE_HEADER: [&str; 14] = [
    "t",
    "H",
    "S",
    "E",
    "dHdt",
    "dSdt",
    "dEdt",
    "pair_yH_u",
    "pair_yS_u",
    "pair_yE_u",
    "dissipation",
    "res_H",
    "res_S",
    "res_E",
];

fn row(r: &BalanceReport) -> [f64; 14] {
    [
        r.t,
        r.h,
        r.s,
        r.e,
        r.dh_dt,
        r.ds_dt,
        r.de_dt,
        r.pair_h,
        r.pair_s,
        r.pair_e,
        r.dissipation,
        r.res_h,
        r.res_s,
        r.res_e,
    ]
}

#[derive(Debug, Serialize)]
struct Snapshot<'a> {
    schema: &'static str,
    t: f64,
    x: Vec<f64>,
    rho: &'a [f64],
    m: &'a [f64],
    u: &'a [f64],
}

/// File name of the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("state_{t:.6}.json")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_balance(path: &Path, reports: &[BalanceReport]) -> CliResult<()> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(file, "# {BALANCE_SCHEMA}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(BALANCE_HEADER)?;
    for r in reports {
        w.write_record(row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_snapshot(dir: &Path, mesh: &Mesh, t: f64, z: &State) -> CliResult<PathBuf> {
    let path = dir.join(snapshot_name(t));
    let snap = Snapshot {
        schema: STATE_SCHEMA,
        t,
        x: mesh.nodes(),
        rho: z.rho(),
        m: z.mom(),
        u: z.u(),
    };
    write_json(&path, &snap)?;
    Ok(path)
}

pub struct RunArtifacts {
    pub output: RunOutput,
    pub balance: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Integrates the configured problem without touching the file system.
pub fn simulate(cfg: &RunConfig) -> CliResult<(Mesh, RunOutput)> {
    cfg.validate()?;
    let mesh = cfg.mesh()?;
    let z0 = cfg.initial.interpolate(&mesh);
    let dynamics = Dynamics::new(&mesh, &cfg.material, cfg.boundary_mode()?, cfg.generator)?;
    let output = dynamics.run(&z0, &cfg.settings())?;
    Ok((mesh, output))
}

pub fn run(cfg: &RunConfig, out: &Path) -> CliResult<RunArtifacts> {
    cfg.validate()?;
    ensure_dir(out)?;
    let (mesh, output) = simulate(cfg)?;
    let balance = out.join("balance.csv");
    write_balance(&balance, &output.reports)?;
    let traj = &output.trajectory;
    let snapshots = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, z)| write_snapshot(out, &mesh, t, z))
        .collect::<CliResult<_>>()?;
    Ok(RunArtifacts {
        output,
        balance,
        snapshots,
    })
}
