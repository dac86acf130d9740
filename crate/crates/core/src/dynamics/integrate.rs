use super::balance::{rates, BalanceReport};
use super::{BoundaryMode, Dynamics, GeneratorPath, Scheme};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::state::State;
use crate::thermo::{functionals, Material};

const MIDPOINT_TOL: f64 = 1e-12;
const MIDPOINT_MAX_ITER: usize = 200;

fn to_step_error(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Step(format!("{msg}; reduce the time step")),
        other => other,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

impl Dynamics<'_> {
    /// Advances `z` from `t` by `dt`.
    pub fn step(&self, z: &State, t: f64, dt: f64, scheme: Scheme) -> Result<State> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {dt}")));
        }
        z.check_admissible()?;
        let next = match scheme {
            Scheme::Rk4 => self.rk4(z, t, dt),
            Scheme::ImplicitMidpoint => self.midpoint(z, t, dt),
        }
        .map_err(to_step_error)?;
        next.check_admissible().map_err(to_step_error)?;
        Ok(next)
    }

    fn rk4(&self, z: &State, t: f64, dt: f64) -> Result<State> {
        let k1 = self.rate(z, t)?;
        let k2 = self.rate(&z.axpy(0.5 * dt, &k1), t + 0.5 * dt)?;
        let k3 = self.rate(&z.axpy(0.5 * dt, &k2), t + 0.5 * dt)?;
        let k4 = self.rate(&z.axpy(dt, &k3), t + dt)?;
        let incr: Vec<f64> = (0..k1.len())
            .map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0)
            .collect();
        Ok(z.axpy(dt, &incr))
    }

    /// Solves `k = f(z + dt/2 k)` by damped fixed-point iteration and returns
    /// `z + dt k`.
    fn midpoint(&self, z: &State, t: f64, dt: f64) -> Result<State> {
        let tm = t + 0.5 * dt;
        let scale = max_abs(z.as_slice()).max(1.0);
        let mut k = self.rate(z, tm)?;
        let mut omega: f64 = 1.0;
        let mut prev = f64::INFINITY;
        let mut residual = f64::INFINITY;
        for _ in 0..MIDPOINT_MAX_ITER {
            let f = self.rate(&z.axpy(0.5 * dt, &k), tm)?;
            let diff: Vec<f64> = f.iter().zip(&k).map(|(a, b)| a - b).collect();
            residual = 0.5 * dt * max_abs(&diff) / scale;
            if residual > prev {
                omega = (0.5 * omega).max(1.0 / 64.0);
            }
            for (ki, di) in k.iter_mut().zip(&diff) {
                *ki += omega * di;
            }
            // Iterate to stagnation below the tolerance, not just below it.
            if residual <= 1e-3 * MIDPOINT_TOL || (residual <= MIDPOINT_TOL && residual >= 0.5 * prev)
            {
                return Ok(z.axpy(dt, &k));
            }
            prev = residual;
        }
        Err(Error::Convergence(format!(
            "implicit midpoint stage residual {residual:.3e} after {MIDPOINT_MAX_ITER} iterations"
        )))
    }
}

/// One step with a freshly built [`Dynamics`].
pub fn step(
    mesh: &Mesh,
    z: &State,
    m: &Material,
    t: f64,
    dt: f64,
    scheme: Scheme,
    mode: BoundaryMode,
) -> Result<State> {
    Dynamics::new(mesh, m, mode, GeneratorPath::TwoGenerator)?.step(z, t, dt, scheme)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub output_interval: f64,
}

impl RunSettings {
    pub fn new(scheme: Scheme, dt: f64, t_final: f64) -> Self {
        RunSettings {
            scheme,
            dt,
            t_final,
            output_interval: t_final,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config("t_final must be nonnegative"));
        }
        if !(self.output_interval >= 0.0) {
            return Err(Error::config("output_interval must be nonnegative"));
        }
        Ok(())
    }

    /// Number of fixed steps; the step is adjusted to land on `t_final`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn effective_dt(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_final / n as f64,
        }
    }

    fn output_stride(&self) -> usize {
        ((self.output_interval / self.effective_dt()).round() as usize).max(1)
    }
}

/// Per-step values of the monitored functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub h: f64,
    pub s: f64,
    pub e: f64,
    pub pair_h: f64,
    pub pair_s: f64,
    pub pair_e: f64,
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    /// Balance rows at the output times.
    pub reports: Vec<BalanceReport>,
    /// Balance rows at every step.
    pub history: Vec<BalanceReport>,
    pub steps: Vec<StepRecord>,
    pub dt: f64,
}

impl RunOutput {
    pub fn final_state(&self) -> &State {
        self.trajectory.states.last().expect("a run stores the initial state")
    }
}

impl Dynamics<'_> {
    fn record(&self, z: &State, t: f64) -> Result<StepRecord> {
        let f = functionals(self.mesh, z, &self.material)?;
        let ev = self.evaluate(z, t)?;
        Ok(StepRecord {
            t,
            h: f.energy,
            s: f.entropy,
            e: f.exergy,
            pair_h: ev.pair_h,
            pair_s: ev.pair_s,
            pair_e: ev.pair_e,
            dissipation: ev.dissipation,
        })
    }

    pub fn run(&self, z0: &State, settings: &RunSettings) -> Result<RunOutput> {
        settings.validate()?;
        z0.check_admissible()?;
        let n = settings.n_steps();
        let dt = settings.effective_dt();
        let stride = settings.output_stride();
        let mut traj = Trajectory {
            times: vec![0.0],
            states: vec![z0.clone()],
        };
        let mut steps = vec![self.record(z0, 0.0)?];
        let mut output_steps = vec![0];
        let mut z = z0.clone();
        for k in 1..=n {
            let t = (k - 1) as f64 * dt;
            z = self.step(&z, t, dt, settings.scheme)?;
            let tk = k as f64 * dt;
            steps.push(self.record(&z, tk)?);
            if k % stride == 0 || k == n {
                traj.times.push(tk);
                traj.states.push(z.clone());
                output_steps.push(k);
            }
        }
        let history: Vec<BalanceReport> = rates(&steps, dt)
            .into_iter()
            .zip(&steps)
            .map(|(r, s)| BalanceReport::from_record(s, r))
            .collect();
        let reports = output_steps.iter().map(|&k| history[k]).collect();
        Ok(RunOutput {
            trajectory: traj,
            reports,
            history,
            steps,
            dt,
        })
    }
}

/// Integrates over `[0, t_final]` with fixed steps.
pub fn run(
    mesh: &Mesh,
    z0: &State,
    m: &Material,
    mode: BoundaryMode,
    path: GeneratorPath,
    settings: &RunSettings,
) -> Result<RunOutput> {
    Dynamics::new(mesh, m, mode, path)?.run(z0, settings)
}
