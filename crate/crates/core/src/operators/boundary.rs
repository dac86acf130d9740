use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{AssembledOperator, OperatorSet, SymmetryClass};
use crate::error::Result;
use crate::mesh::{BoundaryTrace, Endpoint};
use crate::thermo::{GeneratorDerivatives, Material, QpTriple};

/// Port input `(u1, u2, u3)` at each endpoint, indexed left then right.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PortSignal {
    pub left: [f64; 3],
    pub right: [f64; 3],
}

impl PortSignal {
    pub fn new(left: [f64; 3], right: [f64; 3]) -> Self {
        PortSignal { left, right }
    }

    pub fn zero() -> Self {
        PortSignal::default()
    }

    pub fn get(&self, e: Endpoint) -> [f64; 3] {
        match e {
            Endpoint::Left => self.left,
            Endpoint::Right => self.right,
        }
    }

    pub fn as_array(&self) -> [[f64; 3]; 2] {
        [self.left, self.right]
    }

    pub fn as_vec(&self) -> Vec<f64> {
        self.left.iter().chain(&self.right).copied().collect()
    }

    /// Duality pairing `<y, u>` summed over both endpoints.
    pub fn pair(&self, y: &[[f64; 3]; 2]) -> f64 {
        self.as_array()
            .iter()
            .zip(y)
            .map(|(u, y)| u.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Componentwise linear blend `(1 - s) self + s other`.
    pub fn lerp(&self, other: &PortSignal, s: f64) -> PortSignal {
        let mix = |a: [f64; 3], b: [f64; 3]| {
            [0, 1, 2].map(|k| (1.0 - s) * a[k] + s * b[k])
        };
        PortSignal {
            left: mix(self.left, other.left),
            right: mix(self.right, other.right),
        }
    }
}

/// Conjugate outputs of the energy, entropy and exergy generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortReadout {
    pub y_h: [[f64; 3]; 2],
    pub y_s: [[f64; 3]; 2],
    /// `y_S / tau0`.
    pub y_s_scaled: [[f64; 3]; 2],
    pub y_e: [[f64; 3]; 2],
}

/// `B^*` of a field given its endpoint values.
fn adjoint(t: &BoundaryTrace, f: [f64; 3]) -> [f64; 3] {
    [
        -(t.rho * f[0] + t.mom * f[1] + (t.u + t.thermo.p) * f[2]),
        -f[2],
        f[1],
    ]
}

/// Closed-form exergy output at an endpoint:
/// `(-(M^2 / 2 rho + u + p - s / tau0), tau / tau0 - 1, v)`.
pub fn closed_form_exergy_output(t: &BoundaryTrace, m: &Material) -> [f64; 3] {
    let kinetic = 0.5 * t.mom * t.mom / t.rho;
    [
        -(kinetic + t.u + t.thermo.p - t.thermo.s / m.tau0),
        t.thermo.tau / m.tau0 - 1.0,
        t.v,
    ]
}

impl OperatorSet<'_> {
    /// Dense `3N x 6` input matrix; column `3 e + k` is input `k` at
    /// endpoint `e`.
    pub fn assemble_b(&self) -> Result<AssembledOperator> {
        let traces = self.traces()?;
        let n = self.mesh.n_nodes();
        let mut b = DMatrix::zeros(3 * n, 6);
        for (e, t) in traces.iter().enumerate() {
            let i = t.node;
            b[(i, 3 * e)] = -t.rho;
            b[(n + i, 3 * e)] = -t.mom;
            b[(2 * n + i, 3 * e)] = -(t.u + t.thermo.p);
            b[(2 * n + i, 3 * e + 1)] = -1.0;
            b[(n + i, 3 * e + 2)] = 1.0;
        }
        Ok(AssembledOperator::new(b, SymmetryClass::General).at(&self.state))
    }

    pub fn apply_b(&self, input: &PortSignal) -> Result<Vec<f64>> {
        let traces = self.traces()?;
        let n = self.mesh.n_nodes();
        let mut out = vec![0.0; self.dim()];
        for (t, u) in traces.iter().zip(input.as_array()) {
            let i = t.node;
            out[i] -= t.rho * u[0];
            out[n + i] += -t.mom * u[0] + u[2];
            out[2 * n + i] -= (t.u + t.thermo.p) * u[0] + u[1];
        }
        Ok(out)
    }

    /// `B^* f` using the endpoint values stored in `f.trace`.
    pub fn b_star(&self, f: &QpTriple) -> Result<[[f64; 3]; 2]> {
        let traces = self.traces()?;
        Ok([adjoint(&traces[0], f.trace[0]), adjoint(&traces[1], f.trace[1])])
    }

    /// `B^*` of a stacked nodal coefficient vector.
    pub fn b_star_nodal(&self, w: &[f64]) -> Result<[[f64; 3]; 2]> {
        let traces = self.traces()?;
        let n = self.mesh.n_nodes();
        let at = |t: &BoundaryTrace| adjoint(t, [w[t.node], w[n + t.node], w[2 * n + t.node]]);
        Ok([at(&traces[0]), at(&traces[1])])
    }

    pub fn outputs(&self, d: &GeneratorDerivatives) -> Result<PortReadout> {
        let y_h = self.b_star(&d.dh)?;
        let y_s = self.b_star(&d.ds)?;
        let y_e = self.b_star(&d.de)?;
        let y_s_scaled = y_s.map(|r| r.map(|x| x / self.material.tau0));
        Ok(PortReadout {
            y_h,
            y_s,
            y_s_scaled,
            y_e,
        })
    }
}
