//! Equation of state and the generating functionals.
//!
//! The closure is a calorically perfect ideal gas written in the energy
//! representation `s(rho, u)`:
//!
//! ```text
//! s     = rho * (c_v ln(u / (c_v rho)) - R ln rho + s_ref)
//! theta = u / (rho c_v),   p = rho R theta,   mu = theta (c_v + R - s / rho)
//! ```
//!
//! which satisfies the local-equilibrium identity `p + u = theta s + rho mu`
//! exactly. Every gradient of a thermodynamic quantity is obtained by the chain
//! rule from the gradients of `rho` and `u`; this is what makes the pointwise
//! Gibbs-Duhem cancellation (and hence `J dS = 0`) exact in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, QuadPointData};
use crate::state::State;

/// Lower bound enforced on `rho` and `u` at every evaluation point.
pub const ADMISSIBILITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub c_v: f64,
    #[serde(rename = "r_gas")]
    pub r_g: f64,
    #[serde(default)]
    pub s_ref: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub zeta: f64,
    pub tau0: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            c_v: 1.0,
            r_g: 1.0,
            s_ref: 0.0,
            kappa: 0.0,
            eta: 0.0,
            zeta: 0.0,
            tau0: 1.0,
        }
    }
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.c_v, self.r_g, self.s_ref, self.kappa, self.eta, self.zeta, self.tau0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("material coefficients must be finite"));
        }
        if self.c_v <= 0.0 || self.r_g <= 0.0 {
            return Err(Error::config("c_v and r_gas must be positive"));
        }
        if self.tau0 <= 0.0 {
            return Err(Error::config("tau0 must be positive"));
        }
        if self.kappa < 0.0 || self.eta < 0.0 || self.zeta < 0.0 {
            return Err(Error::config("kappa, eta and zeta must be nonnegative"));
        }
        Ok(())
    }

    pub fn with_transport(mut self, kappa: f64, eta: f64, zeta: f64) -> Self {
        self.kappa = kappa;
        self.eta = eta;
        self.zeta = zeta;
        self
    }

    /// First Lame parameter `zeta - 2/3 eta`.
    pub fn lambda(&self) -> f64 {
        self.zeta - 2.0 / 3.0 * self.eta
    }

    /// Longitudinal viscosity `lambda + 2 eta` of the 1D reduction.
    pub fn longitudinal_viscosity(&self) -> f64 {
        2.0 * self.eta + self.lambda()
    }

    pub fn is_inviscid(&self) -> bool {
        self.eta == 0.0 && self.zeta == 0.0
    }

    /// Heat capacity ratio `(c_v + R) / c_v`.
    pub fn gamma(&self) -> f64 {
        (self.c_v + self.r_g) / self.c_v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    pub rho: f64,
    pub u: f64,
    pub theta: f64,
    pub tau: f64,
    pub p: f64,
    pub s: f64,
    pub mu: f64,
    pub s_tilde: f64,
}

impl ThermoPoint {
    /// `mu / theta`, evaluated without forming the quotient.
    pub fn mu_over_theta(&self, m: &Material) -> f64 {
        m.c_v + m.r_g - self.s / self.rho
    }
}

/// Spatial derivatives of the thermodynamic fields, by the chain rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermoGradient {
    pub theta: f64,
    pub tau: f64,
    pub p: f64,
    pub s: f64,
    pub mu: f64,
    pub mu_over_theta: f64,
    pub p_over_theta: f64,
}

pub fn check_admissible(rho: f64, u: f64) -> Result<()> {
    if !(rho >= ADMISSIBILITY_FLOOR) || !rho.is_finite() {
        return Err(Error::domain(format!("density {rho} below admissibility floor")));
    }
    if !(u >= ADMISSIBILITY_FLOOR) || !u.is_finite() {
        return Err(Error::domain(format!(
            "internal energy density {u} below admissibility floor"
        )));
    }
    Ok(())
}

pub fn eval_eos(rho: f64, u: f64, m: &Material) -> Result<ThermoPoint> {
    check_admissible(rho, u)?;
    let s = rho * (m.c_v * (u / (m.c_v * rho)).ln() - m.r_g * rho.ln() + m.s_ref);
    let theta = u / (rho * m.c_v);
    let tau = rho * m.c_v / u;
    let p = rho * m.r_g * theta;
    let mu = theta * (m.c_v + m.r_g - s / rho);
    Ok(ThermoPoint {
        rho,
        u,
        theta,
        tau,
        p,
        s,
        mu,
        s_tilde: s / m.tau0,
    })
}

/// Partial derivatives `(ds/drho, ds/du) = (-mu/theta, 1/theta)`.
pub fn entropy_partials(point: &ThermoPoint, m: &Material) -> (f64, f64) {
    (-point.mu_over_theta(m), point.tau)
}

pub fn eval_eos_gradient(
    point: &ThermoPoint,
    rho_x: f64,
    u_x: f64,
    m: &Material,
) -> ThermoGradient {
    let ThermoPoint {
        rho, u, theta, tau, p, ..
    } = *point;
    let mu_over_theta = point.mu_over_theta(m);
    let mot_x = -m.c_v * u_x / u + (m.c_v + m.r_g) * rho_x / rho;
    let theta_x = (u_x * rho - u * rho_x) / (m.c_v * rho * rho);
    let tau_x = m.c_v * (rho_x * u - rho * u_x) / (u * u);
    let p_x = m.r_g * u_x / m.c_v;
    let (ds_drho, ds_du) = entropy_partials(point, m);
    ThermoGradient {
        theta: theta_x,
        tau: tau_x,
        p: p_x,
        s: ds_drho * rho_x + ds_du * u_x,
        mu: theta_x * mu_over_theta + theta * mot_x,
        mu_over_theta: mot_x,
        p_over_theta: p_x * tau + p * tau_x,
    }
}

/// `rho d(mu/theta) - u d(1/theta) - d(p/theta)`, identically zero for any
/// closure satisfying the local-equilibrium identity.
pub fn gibbs_duhem_residual(
    rho: f64,
    u: f64,
    grad_rho: f64,
    grad_u: f64,
    m: &Material,
) -> Result<f64> {
    let point = eval_eos(rho, u, m)?;
    let g = eval_eos_gradient(&point, grad_rho, grad_u, m);
    Ok(rho * g.mu_over_theta - u * g.tau - g.p_over_theta)
}

/// Pointwise functional derivatives `(dH, dS, dE)` in `(rho, M, u)` order.
pub fn pointwise_derivatives(
    rho: f64,
    mom: f64,
    u: f64,
    m: &Material,
) -> Result<([f64; 3], [f64; 3], [f64; 3])> {
    let point = eval_eos(rho, u, m)?;
    let v = mom / rho;
    let dh = [-0.5 * v * v, v, 1.0];
    let ds = [-point.mu_over_theta(m), 0.0, point.tau];
    let de = [
        dh[0] - ds[0] / m.tau0,
        dh[1] - ds[1] / m.tau0,
        dh[2] - ds[2] / m.tau0,
    ];
    Ok((dh, ds, de))
}

/// A scalar field resolved at quadrature points (value and x-derivative).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QpScalar {
    pub val: Vec<f64>,
    pub grad: Vec<f64>,
}

impl QpScalar {
    pub fn zeros(n: usize) -> Self {
        QpScalar {
            val: vec![0.0; n],
            grad: vec![0.0; n],
        }
    }
}

/// A three-component `(rho, M, u)` argument of the weak forms: values and
/// gradients at every quadrature point plus values at the two endpoints.
///
/// Generator derivatives are carried in this form so that their gradients are
/// the chain-rule gradients rather than gradients of a re-interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct QpTriple {
    pub comp: [QpScalar; 3],
    /// `[left, right]` endpoint values; meaningless on periodic meshes.
    pub trace: [[f64; 3]; 2],
}

impl QpTriple {
    pub fn zeros(n_qp: usize) -> Self {
        QpTriple {
            comp: [QpScalar::zeros(n_qp), QpScalar::zeros(n_qp), QpScalar::zeros(n_qp)],
            trace: [[0.0; 3]; 2],
        }
    }

    #[inline]
    pub fn at(&self, q: usize) -> [[f64; 2]; 3] {
        [
            [self.comp[0].val[q], self.comp[0].grad[q]],
            [self.comp[1].val[q], self.comp[1].grad[q]],
            [self.comp[2].val[q], self.comp[2].grad[q]],
        ]
    }

    /// `self - scale * other`, componentwise on values, gradients and traces.
    pub fn sub_scaled(&self, other: &QpTriple, scale: f64) -> QpTriple {
        let mut out = self.clone();
        for c in 0..3 {
            for (o, x) in out.comp[c].val.iter_mut().zip(&other.comp[c].val) {
                *o -= scale * x;
            }
            for (o, x) in out.comp[c].grad.iter_mut().zip(&other.comp[c].grad) {
                *o -= scale * x;
            }
            for e in 0..2 {
                out.trace[e][c] -= scale * other.trace[e][c];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorDerivatives {
    pub dh: QpTriple,
    pub ds: QpTriple,
    pub de: QpTriple,
}

pub fn generator_derivatives_from(
    mesh: &Mesh,
    qp: &[QuadPointData],
    z: &State,
    m: &Material,
) -> Result<GeneratorDerivatives> {
    let n = qp.len();
    let mut dh = QpTriple::zeros(n);
    let mut ds = QpTriple::zeros(n);
    for (q, d) in qp.iter().enumerate() {
        dh.comp[0].val[q] = -0.5 * d.v * d.v;
        dh.comp[0].grad[q] = -d.v * d.v_x;
        dh.comp[1].val[q] = d.v;
        dh.comp[1].grad[q] = d.v_x;
        dh.comp[2].val[q] = 1.0;
        dh.comp[2].grad[q] = 0.0;

        ds.comp[0].val[q] = -d.thermo.mu_over_theta(m);
        ds.comp[0].grad[q] = -d.grad.mu_over_theta;
        ds.comp[2].val[q] = d.thermo.tau;
        ds.comp[2].grad[q] = d.grad.tau;
    }
    if !mesh.periodic() {
        for (e, node) in [0, mesh.n_nodes() - 1].into_iter().enumerate() {
            let (h, s, _) = pointwise_derivatives(z.rho()[node], z.mom()[node], z.u()[node], m)?;
            dh.trace[e] = h;
            ds.trace[e] = s;
        }
    }
    let de = dh.sub_scaled(&ds, 1.0 / m.tau0);
    Ok(GeneratorDerivatives { dh, ds, de })
}

pub fn generator_derivatives(mesh: &Mesh, z: &State, m: &Material) -> Result<GeneratorDerivatives> {
    let qp = mesh.eval_with_gradients(z, m)?;
    generator_derivatives_from(mesh, &qp, z, m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functionals {
    pub energy: f64,
    pub entropy: f64,
    pub exergy: f64,
}

pub fn functionals_from(qp: &[QuadPointData], m: &Material) -> Functionals {
    let mut energy = 0.0;
    let mut entropy = 0.0;
    for d in qp {
        energy += d.weight * (0.5 * d.mom * d.mom / d.rho + d.u);
        entropy += d.weight * d.thermo.s;
    }
    Functionals {
        energy,
        entropy,
        exergy: energy - entropy / m.tau0,
    }
}

/// Total energy `H`, entropy `S` and exergy-like `E = H - S / tau0`.
pub fn functionals(mesh: &Mesh, z: &State, m: &Material) -> Result<Functionals> {
    let qp = mesh.eval_with_gradients(z, m)?;
    Ok(functionals_from(&qp, m))
}
