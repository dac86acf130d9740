use serde::Serialize;

use super::{BoundaryMode, Dynamics, GeneratorPath};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::profile::FieldProfiles;
use crate::thermo::Material;

/// Max-norm mismatch per field equation, normalized by `int phi_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakStrongResidual {
    pub density: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl WeakStrongResidual {
    pub fn max(&self) -> f64 {
        self.density.max(self.momentum).max(self.energy)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.density, self.momentum, self.energy]
    }
}

/// Inviscid strong form `(rho_t, M_t, u_t)` of smooth fields at `x`.
fn strong_rates(fields: &FieldProfiles, m: &Material, x: f64) -> [f64; 3] {
    let [rho, rho1, rho2] = fields.rho.eval(x);
    let [mom, mom1, _] = fields.mom.eval(x);
    let [u, u1, u2] = fields.u.eval(x);
    let v = mom / rho;
    let v1 = (mom1 * rho - mom * rho1) / (rho * rho);
    let p = m.r_g * u / m.c_v;
    let p1 = m.r_g * u1 / m.c_v;
    let theta2 = (u2 / rho - 2.0 * u1 * rho1 / (rho * rho) - u * rho2 / (rho * rho)
        + 2.0 * u * rho1 * rho1 / (rho * rho * rho))
        / m.c_v;
    [
        -mom1,
        -(mom1 * v + mom * v1) - p1,
        -(u1 * v + u * v1) - p * v1 + m.kappa * theta2,
    ]
}

/// Compares the semi-discrete right-hand side at the interpolant of `fields`
/// with the strong form paired against each test function.
///
/// Bounded meshes close the ports from the state trace and are compared on
/// interior test functions only; periodic meshes use every node.
pub fn weak_strong_consistency(
    mesh: &Mesh,
    fields: &FieldProfiles,
    m: &Material,
) -> Result<WeakStrongResidual> {
    if !m.is_inviscid() {
        return Err(Error::config("weak/strong comparison requires eta = zeta = 0"));
    }
    fields.validate()?;
    let mode = if mesh.periodic() {
        BoundaryMode::IsolatedPeriodic
    } else {
        BoundaryMode::SelfTrace
    };
    let dynamics = Dynamics::new(mesh, m, mode, GeneratorPath::TwoGenerator)?;
    let z = fields.interpolate(mesh);
    let dual = dynamics.evaluate(&z, 0.0)?.dual;

    let n = mesh.n_nodes();
    let strong: Vec<[f64; 3]> = mesh
        .quad_points()
        .iter()
        .map(|q| strong_rates(fields, m, q.x))
        .collect();
    let volume = mesh.load_vector(&vec![1.0; mesh.n_qp()]);
    let range = if mesh.periodic() { 0..n } else { 1..n - 1 };
    let mut out = [0.0f64; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let values: Vec<f64> = strong.iter().map(|s| s[c]).collect();
        let load = mesh.load_vector(&values);
        for i in range.clone() {
            let r = (dual[c * n + i] - load[i]).abs() / volume[i];
            *slot = slot.max(r);
        }
    }
    Ok(WeakStrongResidual {
        density: out[0],
        momentum: out[1],
        energy: out[2],
    })
}
