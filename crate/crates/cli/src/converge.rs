use portgen::reference::{compare, fd_run, FdFields, FdGrid, Sampled};
use portgen::{
    weak_strong_consistency, BoundaryMode, Dynamics, Mesh, RunSettings, Scheme, State,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const CONVERGE_SCHEMA: &str = "portgen.converge/1";

/// Least-squares slope of `log err` against `log h`.
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs.iter().zip(errs).map(|(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Study {
    pub name: &'static str,
    /// Mesh sizes or time steps, coarse to fine.
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
    pub expected: f64,
    pub passed: bool,
}

impl Study {
    /// Passes when the fitted order is within `band` below `expected`.
    fn new(name: &'static str, h: Vec<f64>, errors: Vec<f64>, expected: f64, band: f64) -> Self {
        let order = fitted_order(&h, &errors);
        Study {
            name,
            h,
            errors,
            order,
            expected,
            passed: order >= expected - band,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergeReport {
    pub schema: &'static str,
    pub levels: Vec<usize>,
    pub t_final: f64,
    pub passed: bool,
    pub studies: Vec<Study>,
}

/// Weak form against the strong form on bounded meshes, one study per
/// balance equation. Transport is reduced to heat conduction.
fn spatial(cfg: &RunConfig, levels: &[usize]) -> CliResult<Vec<Study>> {
    let m = cfg.material.with_transport(cfg.material.kappa, 0.0, 0.0);
    let mut hs = Vec::new();
    let mut res = Vec::new();
    for &n in levels {
        let mesh = Mesh::new(cfg.mesh.a, cfg.mesh.b, n, false)?;
        hs.push(mesh.h());
        res.push(weak_strong_consistency(&mesh, &cfg.initial, &m)?.as_array());
    }
    let names = ["spatial_density", "spatial_momentum", "spatial_energy"];
    Ok((0..3)
        .map(|c| {
            let e: Vec<f64> = res.iter().map(|r| r[c]).collect();
            Study::new(names[c], hs.clone(), e, 2.0, 0.3)
        })
        .collect())
}

fn rk4_settings(cfg: &RunConfig, dt: f64) -> RunSettings {
    RunSettings::new(Scheme::Rk4, dt, cfg.converge.t_final)
}

/// Galerkin run against the finite-difference solver on the same periodic
/// grid, with the configured transport.
fn oracle(cfg: &RunConfig, levels: &[usize]) -> CliResult<Study> {
    let c = &cfg.converge;
    let m = &cfg.material;
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &n in levels {
        let mesh = Mesh::new(cfg.mesh.a, cfg.mesh.b, n, true)?;
        let dt = c.cfl * mesh.h();
        let z0 = cfg.initial.interpolate(&mesh);
        let dynamics = Dynamics::new(&mesh, m, BoundaryMode::IsolatedPeriodic, cfg.generator)?;
        let out = dynamics.run(&z0, &rk4_settings(cfg, dt))?;
        let traj = &out.trajectory;
        let weak = Sampled::from_states(mesh.a(), mesh.b(), mesh.nodes(), traj.times.clone(), &traj.states);

        let grid = FdGrid::new(mesh.a(), mesh.b(), n)?;
        let f0 = FdFields {
            rho: z0.rho().to_vec(),
            mom: z0.mom().to_vec(),
            u: z0.u().to_vec(),
        };
        let fd = fd_run(&grid, &f0, m, !m.is_inviscid(), dt, c.t_final, c.t_final)?;
        let last = compare(&weak, &fd)?.last().copied().expect("final sample");
        hs.push(mesh.h());
        errs.push(last.max());
    }
    Ok(Study::new("oracle", hs, errs, 2.0, 0.3))
}

fn max_diff(a: &State, b: &State) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// RK4 self-convergence on the coarsest periodic level against a run with a
/// sixteen times smaller step.
fn integrator(cfg: &RunConfig, n: usize) -> CliResult<Study> {
    let mesh = Mesh::new(cfg.mesh.a, cfg.mesh.b, n, true)?;
    let dynamics = Dynamics::new(
        &mesh,
        &cfg.material,
        BoundaryMode::IsolatedPeriodic,
        cfg.generator,
    )?;
    let z0 = cfg.initial.interpolate(&mesh);
    let dt0 = cfg.converge.cfl * mesh.h();
    let final_at = |dt: f64| -> CliResult<State> {
        Ok(dynamics.run(&z0, &rk4_settings(cfg, dt))?.final_state().clone())
    };
    let reference = final_at(dt0 / 16.0)?;
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for k in 0..3 {
        let dt = dt0 / f64::from(1u32 << k);
        let z = final_at(dt)?;
        // Report the step actually taken.
        dts.push(rk4_settings(cfg, dt).effective_dt());
        errs.push(max_diff(&z, &reference));
    }
    Ok(Study::new("integrator_rk4", dts, errs, 4.0, 0.5))
}

pub fn converge(cfg: &RunConfig) -> CliResult<ConvergeReport> {
    cfg.validate()?;
    let c = &cfg.converge;
    if c.levels.len() < 3 {
        return Err(CliError::Config(format!(
            "a convergence study needs at least 3 levels, got {}",
            c.levels.len()
        )));
    }
    if c.levels.windows(2).any(|w| w[1] <= w[0]) || c.levels[0] < 3 {
        return Err(CliError::Config(
            "levels must be increasing cell counts of at least 3".into(),
        ));
    }
    if !(c.t_final > 0.0 && c.cfl > 0.0) {
        return Err(CliError::Config("converge t_final and cfl must be positive".into()));
    }
    let mut studies = spatial(cfg, &c.levels)?;
    studies.push(oracle(cfg, &c.levels)?);
    studies.push(integrator(cfg, c.levels[0])?);
    Ok(ConvergeReport {
        schema: CONVERGE_SCHEMA,
        levels: c.levels.clone(),
        t_final: c.t_final,
        passed: studies.iter().all(|s| s.passed),
        studies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_order_of_exact_power_law() {
        let hs = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((fitted_order(&hs, &errs) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_levels_is_a_config_error() {
        let mut cfg = RunConfig::default();
        cfg.converge.levels = vec![16];
        assert!(matches!(converge(&cfg), Err(CliError::Config(_))));
        cfg.converge.levels = vec![16, 8, 32];
        assert!(matches!(converge(&cfg), Err(CliError::Config(_))));
    }
}
