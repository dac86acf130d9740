//! Semi-discrete evolution `M z' = J dH + R dS + B u`, time stepping and
//! balance monitoring.
//!
//! The generator derivatives enter the evolution as their L2 projections
//! `w_H = P dH`, `w_S = P dS`, which are exactly the coefficient gradients of
//! the quadrature functionals (`grad H = M w_H`). The operators are wrapped as
//! `J~ = Pi_S^T J Pi_S` and `R~ = Pi_H^T R Pi_H`, where `Pi_G` removes the
//! `M`-orthogonal component along `w_G`. This keeps `J~ w_S = 0` and
//! `R~ w_H = 0` exact for the projected gradients, so that
//!
//! * `dH/dt = <B^* w_H, u>`,
//! * `dS/dt = <B^* w_S, u> + w_S^T R~ w_S`,
//!
//! hold exactly in semi-discrete time. The corrections are of the size of
//! the projection error, `O(h^2)`.

mod balance;
mod consistency;
mod integrate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Endpoint, MassSolver, Mesh};
use crate::operators::{OperatorSet, PortSignal, ProjectedDerivatives};
use crate::state::State;
use crate::thermo::Material;

pub use balance::{
    balance_check, entropy_monotone, exergy_dissipation, BalanceReport, BalanceTolerance,
    BalanceVerdict,
};
pub use consistency::{weak_strong_consistency, WeakStrongResidual};
pub use integrate::{run, step, RunOutput, RunSettings, StepRecord, Trajectory};

/// Piecewise-linear port input in time, held constant outside its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSeries {
    pub samples: Vec<(f64, PortSignal)>,
}

impl PortSeries {
    pub fn constant(u: PortSignal) -> Self {
        PortSeries {
            samples: vec![(0.0, u)],
        }
    }

    pub fn new(samples: Vec<(f64, PortSignal)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("port series needs at least one sample"));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::config("port series times must increase strictly"));
        }
        Ok(PortSeries { samples })
    }

    pub fn at(&self, t: f64) -> PortSignal {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        for w in s.windows(2) {
            let ((t0, u0), (t1, u1)) = (w[0], w[1]);
            if t <= t1 {
                return u0.lerp(&u1, (t - t0) / (t1 - t0));
            }
        }
        s[s.len() - 1].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMode {
    IsolatedPeriodic,
    /// Exogenous port input.
    Prescribed(PortSeries),
    /// Inputs closed from the current state: `u = (v nu, q nu, sigma nu)`.
    SelfTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorPath {
    /// `J dH + R dS`.
    #[default]
    TwoGenerator,
    /// `(J - C D C^*) dE`; inviscid only.
    SingleGenerator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    #[default]
    ImplicitMidpoint,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Rk4 => 4,
            Scheme::ImplicitMidpoint => 2,
        }
    }
}

/// One right-hand-side evaluation with its balance bookkeeping.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Time derivative of the stacked coefficients.
    pub rate: Vec<f64>,
    /// `M z'`, the dual (load) vector.
    pub dual: Vec<f64>,
    pub input: Option<PortSignal>,
    pub pair_h: f64,
    pub pair_s: f64,
    pub pair_e: f64,
    /// `tau0^-1 w_S^T R~ w_S`.
    pub dissipation: f64,
}

/// Mesh, material and boundary closure of one simulation.
#[derive(Debug, Clone)]
pub struct Dynamics<'a> {
    mesh: &'a Mesh,
    material: Material,
    mode: BoundaryMode,
    path: GeneratorPath,
    solver: MassSolver,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x - dir * (a . x) / (a . dir)`.
fn project_out(x: &[f64], dir: &[f64], a: &[f64], a_dir: f64) -> Vec<f64> {
    let c = dot(a, x) / a_dir;
    x.iter().zip(dir).map(|(xi, di)| xi - c * di).collect()
}

impl<'a> Dynamics<'a> {
    pub fn new(
        mesh: &'a Mesh,
        material: &Material,
        mode: BoundaryMode,
        path: GeneratorPath,
    ) -> Result<Self> {
        material.validate()?;
        match (&mode, mesh.periodic()) {
            (BoundaryMode::IsolatedPeriodic, false) => {
                return Err(Error::config("isolated-periodic mode needs a periodic mesh"))
            }
            (BoundaryMode::Prescribed(_) | BoundaryMode::SelfTrace, true) => {
                return Err(Error::config("port inputs need a bounded mesh"))
            }
            _ => {}
        }
        if path == GeneratorPath::SingleGenerator && !material.is_inviscid() {
            return Err(Error::config(
                "single-generator path requires eta = zeta = 0",
            ));
        }
        Ok(Dynamics {
            mesh,
            material: *material,
            mode,
            path,
            solver: MassSolver::new(mesh),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn mode(&self) -> &BoundaryMode {
        &self.mode
    }

    pub fn path(&self) -> GeneratorPath {
        self.path
    }

    fn input(&self, ops: &OperatorSet<'_>, t: f64) -> Result<Option<PortSignal>> {
        Ok(match &self.mode {
            BoundaryMode::IsolatedPeriodic => None,
            BoundaryMode::Prescribed(series) => Some(series.at(t)),
            BoundaryMode::SelfTrace => {
                let tr = ops.traces()?;
                let closure = |e: Endpoint| {
                    let b = &tr[e.index()];
                    [b.v * b.nu, b.heat_flux_normal, b.viscous_stress_normal]
                };
                Some(PortSignal::new(
                    closure(Endpoint::Left),
                    closure(Endpoint::Right),
                ))
            }
        })
    }

    pub fn evaluate(&self, z: &State, t: f64) -> Result<Evaluation> {
        let mesh = self.mesh;
        let ops = OperatorSet::new(mesh, z, &self.material)?;
        let d = ops.derivatives()?;
        let w = ProjectedDerivatives::new(&ops, &self.solver, &d);
        let a_h = self.solver.apply_stacked(&w.h);
        let a_s = self.solver.apply_stacked(&w.s);
        let hh = dot(&a_h, &w.h);
        let ss = dot(&a_s, &w.s);
        let tau0 = self.material.tau0;

        // J~ x = Pi_S^T J Pi_S x
        let j_tilde = |x: &[f64]| {
            let px = project_out(x, &w.s, &a_s, ss);
            let jx = ops.apply_j(&mesh.interpolate(&px));
            project_out(&jx, &a_s, &w.s, ss)
        };

        let (mut dual, dissipation) = match self.path {
            GeneratorPath::TwoGenerator => {
                let mut f = j_tilde(&w.h);
                let ps = project_out(&w.s, &w.h, &a_h, hh);
                let rs = project_out(&ops.apply_r(&mesh.interpolate(&ps)), &a_h, &w.h, hh);
                let diss = dot(&w.s, &rs) / tau0;
                for (fi, ri) in f.iter_mut().zip(&rs) {
                    *fi += ri;
                }
                (f, diss)
            }
            GeneratorPath::SingleGenerator => {
                let w_e = w.exergy(tau0);
                let mut f = j_tilde(&w_e);
                let pe = project_out(&w_e, &w.h, &a_h, hh);
                let ce = project_out(&ops.apply_cdc(&mesh.interpolate(&pe))?, &a_h, &w.h, hh);
                let diss = dot(&w_e, &ce);
                for (fi, ci) in f.iter_mut().zip(&ce) {
                    *fi -= ci;
                }
                (f, diss)
            }
        };

        let input = self.input(&ops, t)?;
        let (mut pair_h, mut pair_s) = (0.0, 0.0);
        if let Some(u) = &input {
            for (di, bi) in dual.iter_mut().zip(ops.apply_b(u)?) {
                *di += bi;
            }
            pair_h = u.pair(&ops.b_star_nodal(&w.h)?);
            pair_s = u.pair(&ops.b_star_nodal(&w.s)?);
        }
        let rate = self.solver.solve_stacked(&dual);
        Ok(Evaluation {
            rate,
            dual,
            input,
            pair_h,
            pair_s,
            pair_e: pair_h - pair_s / tau0,
            dissipation,
        })
    }

    pub fn rate(&self, z: &State, t: f64) -> Result<Vec<f64>> {
        Ok(self.evaluate(z, t)?.rate)
    }
}

/// Time derivative of the coefficients at `z`.
///
/// With `u_in = None` a periodic mesh is isolated and a bounded mesh closes
/// its ports from the state trace; `Some(u)` prescribes a constant input.
pub fn rhs(
    mesh: &Mesh,
    z: &State,
    m: &Material,
    u_in: Option<&PortSignal>,
    path: GeneratorPath,
) -> Result<Vec<f64>> {
    let mode = match (u_in, mesh.periodic()) {
        (Some(u), _) => BoundaryMode::Prescribed(PortSeries::constant(*u)),
        (None, true) => BoundaryMode::IsolatedPeriodic,
        (None, false) => BoundaryMode::SelfTrace,
    };
    Dynamics::new(mesh, m, mode, path)?.rate(z, 0.0)
}
