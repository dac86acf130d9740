//! Uniform 1D mesh, continuous piecewise-linear space and the shared
//! two-point Gauss rule used by every pairing.

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::operators::{AssembledOperator, SymmetryClass};
use crate::state::State;
use crate::thermo::{eval_eos, eval_eos_gradient, Material, QpScalar, QpTriple, ThermoGradient, ThermoPoint};

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub cell: usize,
    pub nodes: [usize; 2],
    pub x: f64,
    pub weight: f64,
    pub shape: [f64; 2],
    pub dshape: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

impl Endpoint {
    pub const BOTH: [Endpoint; 2] = [Endpoint::Left, Endpoint::Right];

    /// Outward unit normal.
    pub fn normal(self) -> f64 {
        match self {
            Endpoint::Left => -1.0,
            Endpoint::Right => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Endpoint::Left => 0,
            Endpoint::Right => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    a: f64,
    b: f64,
    n_cells: usize,
    periodic: bool,
    quad: Vec<QuadPoint>,
}

pub fn build_mesh(a: f64, b: f64, n_cells: usize, periodic: bool) -> Result<Mesh> {
    Mesh::new(a, b, n_cells, periodic)
}

impl Mesh {
    pub fn new(a: f64, b: f64, n_cells: usize, periodic: bool) -> Result<Mesh> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::config(format!("interval ({a}, {b}) must satisfy a < b")));
        }
        if n_cells < 2 {
            return Err(Error::config("n_cells must be at least 2"));
        }
        let h = (b - a) / n_cells as f64;
        let n_nodes = if periodic { n_cells } else { n_cells + 1 };
        let mut quad = Vec::with_capacity(2 * n_cells);
        for cell in 0..n_cells {
            let nodes = [cell, (cell + 1) % n_nodes];
            let x0 = a + cell as f64 * h;
            for xi in [0.5 - GAUSS_OFFSET, 0.5 + GAUSS_OFFSET] {
                quad.push(QuadPoint {
                    cell,
                    nodes,
                    x: x0 + xi * h,
                    weight: 0.5 * h,
                    shape: [1.0 - xi, xi],
                    dshape: [-1.0 / h, 1.0 / h],
                });
            }
        }
        Ok(Mesh {
            a,
            b,
            n_cells,
            periodic,
            quad,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    /// Number of free nodes (coefficients per scalar field).
    pub fn n_nodes(&self) -> usize {
        if self.periodic {
            self.n_cells
        } else {
            self.n_cells + 1
        }
    }

    pub fn node_x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node_x(i)).collect()
    }

    pub fn quad_points(&self) -> &[QuadPoint] {
        &self.quad
    }

    pub fn n_qp(&self) -> usize {
        self.quad.len()
    }

    pub fn endpoint_node(&self, e: Endpoint) -> Result<usize> {
        if self.periodic {
            return Err(Error::Topology("periodic mesh has no boundary".into()));
        }
        Ok(match e {
            Endpoint::Left => 0,
            Endpoint::Right => self.n_cells,
        })
    }

    pub fn integrate<F: FnMut(&QuadPoint) -> f64>(&self, mut f: F) -> f64 {
        self.quad.iter().map(|q| q.weight * f(q)).sum()
    }

    /// Integral of the P1 interpolant with the given nodal values.
    pub fn integrate_nodal(&self, coeffs: &[f64]) -> f64 {
        self.integrate(|q| q.shape[0] * coeffs[q.nodes[0]] + q.shape[1] * coeffs[q.nodes[1]])
    }

    /// Interpolant value and derivative at a quadrature point.
    #[inline]
    pub fn eval_p1(q: &QuadPoint, coeffs: &[f64]) -> (f64, f64) {
        let (c0, c1) = (coeffs[q.nodes[0]], coeffs[q.nodes[1]]);
        (q.shape[0] * c0 + q.shape[1] * c1, q.dshape[0] * c0 + q.dshape[1] * c1)
    }

    pub fn interpolate_fn<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| f(self.node_x(i))).collect()
    }

    /// Quadrature-resolved P1 field of a stacked `3N` coefficient vector.
    pub fn interpolate(&self, coeffs: &[f64]) -> QpTriple {
        let n = self.n_nodes();
        assert_eq!(coeffs.len(), 3 * n, "coefficient count must match 3 * n_nodes");
        let mut out = QpTriple::zeros(self.n_qp());
        for c in 0..3 {
            let block = &coeffs[c * n..(c + 1) * n];
            for (k, q) in self.quad.iter().enumerate() {
                let (v, g) = Self::eval_p1(q, block);
                out.comp[c].val[k] = v;
                out.comp[c].grad[k] = g;
            }
            if !self.periodic {
                out.trace[0][c] = block[0];
                out.trace[1][c] = block[n - 1];
            }
        }
        out
    }

    /// Load vector `g_i = sum_q w_q phi_i(x_q) f_q` of quadrature values.
    pub fn load_vector(&self, values: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n_nodes()];
        for (q, f) in self.quad.iter().zip(values) {
            for l in 0..2 {
                g[q.nodes[l]] += q.weight * q.shape[l] * f;
            }
        }
        g
    }

    /// Consistent P1 mass matrix `M_ij = int phi_i phi_j dx` (scalar field).
    pub fn mass_dense(&self) -> DMatrix<f64> {
        let n = self.n_nodes();
        let mut m = DMatrix::zeros(n, n);
        for q in &self.quad {
            for i in 0..2 {
                for j in 0..2 {
                    m[(q.nodes[i], q.nodes[j])] += q.weight * q.shape[i] * q.shape[j];
                }
            }
        }
        m
    }

    pub fn eval_with_gradients(&self, z: &State, m: &Material) -> Result<Vec<QuadPointData>> {
        if z.n_nodes() != self.n_nodes() {
            return Err(Error::config(format!(
                "state has {} nodes, mesh has {}",
                z.n_nodes(),
                self.n_nodes()
            )));
        }
        self.quad
            .iter()
            .map(|q| QuadPointData::evaluate(q, z, m))
            .collect()
    }

    /// Boundary record at an endpoint with one-sided derivatives from the
    /// adjacent cell.
    pub fn trace(&self, z: &State, m: &Material, e: Endpoint) -> Result<BoundaryTrace> {
        let node = self.endpoint_node(e)?;
        let cell = match e {
            Endpoint::Left => 0,
            Endpoint::Right => self.n_cells - 1,
        };
        let h = self.h();
        let slope = |f: &[f64]| (f[cell + 1] - f[cell]) / h;
        let (rho, mom, u) = (z.rho()[node], z.mom()[node], z.u()[node]);
        let (rho_x, mom_x, u_x) = (slope(z.rho()), slope(z.mom()), slope(z.u()));
        let thermo = eval_eos(rho, u, m)?;
        let grad = eval_eos_gradient(&thermo, rho_x, u_x, m);
        let v = mom / rho;
        let v_x = (rho * mom_x - mom * rho_x) / (rho * rho);
        let nu = e.normal();
        Ok(BoundaryTrace {
            endpoint: e,
            node,
            x: self.node_x(node),
            nu,
            rho,
            mom,
            u,
            v,
            thermo,
            heat_flux_normal: -m.kappa * grad.theta * nu,
            viscous_stress_normal: m.longitudinal_viscosity() * v_x * nu,
        })
    }

    /// L2 projection of quadrature values onto the P1 space.
    pub fn project(&self, solver: &MassSolver, values: &QpScalar) -> Vec<f64> {
        solver.solve(&self.load_vector(&values.val))
    }
}

pub fn mass_matrix(mesh: &Mesh) -> AssembledOperator {
    AssembledOperator::new(mesh.mass_dense(), SymmetryClass::SymmetricPsd)
}

/// Cholesky factorization of the scalar mass matrix, reused for all solves.
#[derive(Clone)]
pub struct MassSolver {
    chol: Cholesky<f64, Dyn>,
    dense: DMatrix<f64>,
}

impl std::fmt::Debug for MassSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MassSolver").field("n", &self.n()).finish()
    }
}

impl MassSolver {
    pub fn new(mesh: &Mesh) -> Self {
        let dense = mesh.mass_dense();
        let chol = Cholesky::new(dense.clone()).expect("P1 mass matrix is positive definite");
        MassSolver { chol, dense }
    }

    pub fn n(&self) -> usize {
        self.dense.nrows()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        self.chol.solve(&b).as_slice().to_vec()
    }

    /// Applies the inverse blockwise to a stacked `3N` dual vector.
    pub fn solve_stacked(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(rhs.len());
        for block in rhs.chunks(n) {
            out.extend(self.solve(block));
        }
        out
    }

    pub fn apply_stacked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(x.len());
        for block in x.chunks(n) {
            let y = &self.dense * DVector::from_column_slice(block);
            out.extend(y.iter());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPointData {
    pub x: f64,
    pub weight: f64,
    pub rho: f64,
    pub mom: f64,
    pub u: f64,
    pub rho_x: f64,
    pub mom_x: f64,
    pub u_x: f64,
    pub v: f64,
    pub v_x: f64,
    pub thermo: ThermoPoint,
    pub grad: ThermoGradient,
}

impl QuadPointData {
    fn evaluate(q: &QuadPoint, z: &State, m: &Material) -> Result<Self> {
        let (rho, rho_x) = Mesh::eval_p1(q, z.rho());
        let (mom, mom_x) = Mesh::eval_p1(q, z.mom());
        let (u, u_x) = Mesh::eval_p1(q, z.u());
        let thermo = eval_eos(rho, u, m)?;
        let grad = eval_eos_gradient(&thermo, rho_x, u_x, m);
        Ok(QuadPointData {
            x: q.x,
            weight: q.weight,
            rho,
            mom,
            u,
            rho_x,
            mom_x,
            u_x,
            v: mom / rho,
            v_x: (rho * mom_x - mom * rho_x) / (rho * rho),
            thermo,
            grad,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTrace {
    pub endpoint: Endpoint,
    pub node: usize,
    pub x: f64,
    pub nu: f64,
    pub rho: f64,
    pub mom: f64,
    pub u: f64,
    pub v: f64,
    pub thermo: ThermoPoint,
    /// `q . nu` with `q = -kappa d_x theta`.
    pub heat_flux_normal: f64,
    /// `sigma . nu` with `sigma = (lambda + 2 eta) d_x v`.
    pub viscous_stress_normal: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn build_examples() {
        let m = build_mesh(0.0, 1.0, 2, false).unwrap();
        assert_eq!(m.nodes(), vec![0.0, 0.5, 1.0]);
        assert_eq!(m.h(), 0.5);
        let p = build_mesh(0.0, 1.0, 4, true).unwrap();
        assert_eq!(p.n_nodes(), 4);
        assert_eq!(p.quad_points().last().unwrap().nodes, [3, 0]);
        assert!(matches!(build_mesh(1.0, 0.0, 2, false), Err(Error::Config(_))));
        assert!(matches!(build_mesh(0.0, 1.0, 1, false), Err(Error::Config(_))));
    }

    #[test]
    fn quadrature_examples() {
        let m = build_mesh(0.0, 1.0, 7, false).unwrap();
        assert_relative_eq!(m.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.integrate(|q| q.x * q.x), 1.0 / 3.0, max_relative = 1e-14);
        let cubic = m.integrate(|q| 4.0 * q.x.powi(3) - q.x + 2.0);
        assert_relative_eq!(cubic, 1.0 - 0.5 + 2.0, max_relative = 1e-14);

        let m = build_mesh(0.0, 1.0, 32, false).unwrap();
        let c = m.interpolate_fn(|x| (2.0 * PI * x).sin());
        assert!(m.integrate_nodal(&c).abs() <= 1e-3);
    }

    #[test]
    fn mass_matrix_two_cells() {
        let m = build_mesh(0.0, 1.0, 2, false).unwrap();
        let mm = mass_matrix(&m).matrix;
        let h = 0.5;
        let diag = [h / 3.0, 2.0 * h / 3.0, h / 3.0];
        for i in 0..3 {
            assert_relative_eq!(mm[(i, i)], diag[i], epsilon = 1e-15);
        }
        assert_relative_eq!(mm[(0, 1)], h / 6.0, epsilon = 1e-15);
        assert_relative_eq!(mm[(1, 2)], h / 6.0, epsilon = 1e-15);
        assert_eq!(mm[(0, 2)], 0.0);
        assert_relative_eq!(mm.sum(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_row_sums_are_lumped_volumes() {
        for periodic in [false, true] {
            let m = build_mesh(-1.0, 2.0, 6, periodic).unwrap();
            let mm = m.mass_dense();
            let h = m.h();
            for i in 0..m.n_nodes() {
                let row: f64 = mm.row(i).sum();
                let boundary = !periodic && (i == 0 || i == m.n_nodes() - 1);
                assert_relative_eq!(row, if boundary { h / 2.0 } else { h }, epsilon = 1e-14);
            }
            assert_relative_eq!(mm.sum(), 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn gradient_examples() {
        let mat = Material::default();
        let mesh = build_mesh(0.0, 1.0, 8, false).unwrap();
        let n = mesh.n_nodes();
        let z = State::uniform(n, 1.3, 0.2, 2.0);
        for d in mesh.eval_with_gradients(&z, &mat).unwrap() {
            assert_eq!((d.rho_x, d.mom_x, d.u_x, d.v_x, d.grad.theta), (0.0, 0.0, 0.0, 0.0, 0.0));
        }

        let z = State::new(vec![1.0; n], mesh.nodes(), vec![1.0; n]).unwrap();
        for d in mesh.eval_with_gradients(&z, &mat).unwrap() {
            assert_relative_eq!(d.v, d.x, epsilon = 1e-15);
            assert_relative_eq!(d.v_x, 1.0, epsilon = 1e-12);
        }

        let rho = mesh.interpolate_fn(|x| 1.0 + x);
        let z = State::new(rho.clone(), rho, vec![1.0; n]).unwrap();
        for d in mesh.eval_with_gradients(&z, &mat).unwrap() {
            assert!(d.v_x.abs() <= 1e-14);
        }
    }

    #[test]
    fn traces() {
        let mat = Material { kappa: 1.0, ..Material::default() };
        let mesh = build_mesh(0.0, 1.0, 4, false).unwrap();
        let n = mesh.n_nodes();
        let z = State::uniform(n, 1.0, 0.0, 1.0);
        let t = mesh.trace(&z, &mat, Endpoint::Right).unwrap();
        assert_eq!((t.nu, t.heat_flux_normal, t.viscous_stress_normal), (1.0, 0.0, 0.0));
        assert_eq!(mesh.trace(&z, &mat, Endpoint::Left).unwrap().nu, -1.0);

        let z = State::new(vec![1.0; n], vec![0.0; n], mesh.interpolate_fn(|x| 1.0 + x)).unwrap();
        let t = mesh.trace(&z, &mat, Endpoint::Right).unwrap();
        assert_relative_eq!(t.heat_flux_normal, -1.0, epsilon = 1e-14);

        let periodic = build_mesh(0.0, 1.0, 4, true).unwrap();
        let z = State::uniform(4, 1.0, 0.0, 1.0);
        assert!(matches!(periodic.trace(&z, &mat, Endpoint::Left), Err(Error::Topology(_))));
    }
}
