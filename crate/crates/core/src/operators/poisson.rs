use super::{AssembledOperator, LocalArg, OperatorSet, SymmetryClass};
use crate::mesh::QuadPointData;
use crate::thermo::QpTriple;

/// Transport part of the bracket acting on one argument:
/// `rho a_rho' + M a_M' + (u + p) a_u' + p' a_u`.
#[inline]
fn lambda(d: &QuadPointData, a: &LocalArg) -> f64 {
    d.rho * a[0][1] + d.mom * a[1][1] + (d.u + d.thermo.p) * a[2][1] + d.grad.p * a[2][0]
}

#[inline]
fn lambda_abs(d: &QuadPointData, a: &LocalArg) -> f64 {
    (d.rho * a[0][1]).abs()
        + (d.mom * a[1][1]).abs()
        + ((d.u + d.thermo.p) * a[2][1]).abs()
        + (d.grad.p * a[2][0]).abs()
}

/// `J(a, b) = b_M Lambda(a) - a_M Lambda(b)` at one quadrature point.
#[inline]
pub(crate) fn kernel(d: &QuadPointData, a: &LocalArg, b: &LocalArg) -> f64 {
    b[1][0] * lambda(d, a) - a[1][0] * lambda(d, b)
}

impl OperatorSet<'_> {
    pub fn assemble_j(&self) -> AssembledOperator {
        let qp = &self.qp;
        let mat = self.assemble_kernel(|q, a, b| kernel(&qp[q], a, b));
        // Exact skew symmetry; the two triangles differ only by roundoff.
        let mat = (&mat - mat.transpose()) * 0.5;
        AssembledOperator::new(mat, SymmetryClass::Skew).at(&self.state)
    }

    /// `(J f)_i = J(phi_i, f)` for every stacked basis function.
    pub fn apply_j(&self, f: &QpTriple) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let trial: Vec<(LocalArg, f64)> = (0..self.qp.len())
            .map(|q| {
                let b = f.at(q);
                (b, lambda(&self.qp[q], &b))
            })
            .collect();
        let qps = self.mesh.quad_points();
        self.for_each_test(|i, q, a| {
            let (b, lam_b) = &trial[q];
            let d = &self.qp[q];
            out[i] += qps[q].weight * (b[1][0] * lambda(d, a) - a[1][0] * lam_b);
        });
        out
    }

    pub fn pair_j(&self, a: &QpTriple, b: &QpTriple) -> f64 {
        self.qp
            .iter()
            .enumerate()
            .map(|(q, d)| d.weight * kernel(d, &a.at(q), &b.at(q)))
            .sum()
    }

    pub(crate) fn apply_j_with_magnitude(&self, f: &QpTriple) -> (Vec<f64>, f64) {
        let out = self.apply_j(f);
        let mut mag = vec![0.0; self.dim()];
        let qps = self.mesh.quad_points();
        self.for_each_test(|i, q, a| {
            let b = f.at(q);
            let d = &self.qp[q];
            mag[i] += qps[q].weight
                * ((b[1][0]).abs() * lambda_abs(d, a) + a[1][0].abs() * lambda_abs(d, &b));
        });
        (out, mag.iter().fold(0.0f64, |m, x| m.max(*x)))
    }
}
