use nalgebra::{DMatrix, DVector};

use super::{AssembledOperator, LocalArg, OperatorSet, SymmetryClass};
use crate::error::Result;
use crate::mesh::QuadPointData;
use crate::thermo::{Material, QpTriple};

#[inline]
fn shear(d: &QuadPointData, a: &LocalArg) -> f64 {
    a[1][1] - d.v_x * a[2][0]
}

/// `R(a, b) = k g(a) g(b) + kappa theta^2 a_u' b_u'` with
/// `g(a) = a_M' - v' a_u` and `k = (2 eta + lambda) theta`.
#[inline]
pub(crate) fn kernel(d: &QuadPointData, m: &Material, a: &LocalArg, b: &LocalArg) -> f64 {
    let theta = d.thermo.theta;
    m.longitudinal_viscosity() * theta * shear(d, a) * shear(d, b)
        + m.kappa * theta * theta * a[2][1] * b[2][1]
}

/// Factors of the heat-conduction block: `C D C^* = tau0 R` when the fluid
/// is inviscid. The flux space carries one value per quadrature point.
#[derive(Debug, Clone)]
pub struct Factorization {
    /// `3N x Q`, `C[u_i, q] = phi_i'(x_q)`.
    pub c: AssembledOperator,
    /// Diagonal of `D`, `w_q kappa tau0 theta_q^2`.
    pub d: DVector<f64>,
    /// `Q x 3N`, the transpose of `C`.
    pub c_star: AssembledOperator,
}

impl Factorization {
    pub fn cdc(&self) -> DMatrix<f64> {
        &self.c.matrix * DMatrix::from_diagonal(&self.d) * &self.c_star.matrix
    }
}

/// Thermodynamic force `d(tau / tau0)/dx` and Fourier flux `-kappa theta'`
/// at each quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceFlux {
    pub force: Vec<f64>,
    pub flux: Vec<f64>,
    /// `D force`, the flux coordinate of the extended block.
    pub weighted_flux: Vec<f64>,
}

impl OperatorSet<'_> {
    pub fn assemble_r(&self) -> AssembledOperator {
        let (qp, m) = (&self.qp, &self.material);
        let mat = self.assemble_kernel(|q, a, b| kernel(&qp[q], m, a, b));
        let mat = (&mat + mat.transpose()) * 0.5;
        AssembledOperator::new(mat, SymmetryClass::SymmetricPsd).at(&self.state)
    }

    pub fn apply_r(&self, f: &QpTriple) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let qps = self.mesh.quad_points();
        let m = &self.material;
        self.for_each_test(|i, q, a| {
            out[i] += qps[q].weight * kernel(&self.qp[q], m, a, &f.at(q));
        });
        out
    }

    pub fn pair_r(&self, a: &QpTriple, b: &QpTriple) -> f64 {
        self.qp
            .iter()
            .enumerate()
            .map(|(q, d)| d.weight * kernel(d, &self.material, &a.at(q), &b.at(q)))
            .sum()
    }

    pub(crate) fn apply_r_with_magnitude(&self, f: &QpTriple) -> (Vec<f64>, f64) {
        let out = self.apply_r(f);
        let mut mag = vec![0.0; self.dim()];
        let qps = self.mesh.quad_points();
        let m = &self.material;
        self.for_each_test(|i, q, a| {
            let b = f.at(q);
            let d = &self.qp[q];
            let theta = d.thermo.theta;
            let g_abs = |x: &LocalArg| x[1][1].abs() + (d.v_x * x[2][0]).abs();
            mag[i] += qps[q].weight
                * (m.longitudinal_viscosity() * theta * g_abs(a) * g_abs(&b)
                    + m.kappa * theta * theta * (a[2][1] * b[2][1]).abs());
        });
        (out, mag.iter().fold(0.0f64, |m, x| m.max(*x)))
    }

    pub fn factorization(&self) -> Result<Factorization> {
        self.require_inviscid()?;
        let n = self.mesh.n_nodes();
        let qps = self.mesh.quad_points();
        let mut c = DMatrix::zeros(3 * n, qps.len());
        for (q, qp) in qps.iter().enumerate() {
            for l in 0..2 {
                c[(2 * n + qp.nodes[l], q)] += qp.dshape[l];
            }
        }
        let m = &self.material;
        let d = DVector::from_iterator(
            qps.len(),
            self.qp
                .iter()
                .map(|p| p.weight * m.kappa * m.tau0 * p.thermo.theta * p.thermo.theta),
        );
        let c_star = c.transpose();
        Ok(Factorization {
            c: AssembledOperator::new(c, SymmetryClass::General).at(&self.state),
            d,
            c_star: AssembledOperator::new(c_star, SymmetryClass::General).at(&self.state),
        })
    }

    pub fn force_flux(&self) -> Result<ForceFlux> {
        self.require_inviscid()?;
        let m = &self.material;
        let force: Vec<f64> = self.qp.iter().map(|p| p.grad.tau / m.tau0).collect();
        let flux: Vec<f64> = self
            .qp
            .iter()
            .map(|p| m.kappa * p.grad.tau / (p.thermo.tau * p.thermo.tau))
            .collect();
        let weighted_flux = self
            .qp
            .iter()
            .zip(&force)
            .map(|(p, f)| p.weight * m.kappa * m.tau0 * p.thermo.theta * p.thermo.theta * f)
            .collect();
        Ok(ForceFlux {
            force,
            flux,
            weighted_flux,
        })
    }

    /// `C g` for a vector over quadrature points.
    pub fn c_apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.mesh.n_nodes();
        let mut out = vec![0.0; self.dim()];
        for (qp, gq) in self.mesh.quad_points().iter().zip(g) {
            for l in 0..2 {
                out[2 * n + qp.nodes[l]] += qp.dshape[l] * gq;
            }
        }
        out
    }

    /// `C D C^* f` without forming the factors.
    pub fn apply_cdc(&self, f: &QpTriple) -> Result<Vec<f64>> {
        self.require_inviscid()?;
        let m = &self.material;
        let g: Vec<f64> = self
            .qp
            .iter()
            .zip(&f.comp[2].grad)
            .map(|(p, fx)| p.weight * m.kappa * m.tau0 * p.thermo.theta * p.thermo.theta * fx)
            .collect();
        Ok(self.c_apply(&g))
    }

    /// `C^* f`, the energy-component gradient at each quadrature point.
    pub fn c_star_apply(&self, f: &QpTriple) -> Vec<f64> {
        f.comp[2].grad.clone()
    }
}
