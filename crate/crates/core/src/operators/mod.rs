//! Galerkin matrices of the Poisson, dissipation and boundary-port pairings.
//!
//! Every operator is defined by a bilinear form evaluated with the shared
//! quadrature. Two entry points exist for each: `assemble_*` produces the
//! dense matrix on stacked nodal coefficients, and `apply_*` pairs every test
//! basis function with a quadrature-resolved argument ([`QpTriple`]). When
//! the argument is the interpolant of a coefficient vector the two agree.

mod boundary;
mod dissipation;
mod poisson;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTrace, Endpoint, Mesh, MassSolver, QuadPointData};
use crate::state::State;
use crate::thermo::{generator_derivatives_from, GeneratorDerivatives, Material, QpTriple};

pub use boundary::{closed_form_exergy_output, PortReadout, PortSignal};
pub use dissipation::{Factorization, ForceFlux};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    Skew,
    SymmetricPsd,
    General,
}

#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub matrix: DMatrix<f64>,
    pub class: SymmetryClass,
    /// State the operator was assembled at, if it is state dependent.
    pub state: Option<State>,
}

impl AssembledOperator {
    pub fn new(matrix: DMatrix<f64>, class: SymmetryClass) -> Self {
        AssembledOperator {
            matrix,
            class,
            state: None,
        }
    }

    fn at(mut self, z: &State) -> Self {
        self.state = Some(z.clone());
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }

    /// `max |A + A^T|`.
    pub fn skew_defect(&self) -> f64 {
        (&self.matrix + self.matrix.transpose()).amax()
    }

    /// `max |A - A^T|`.
    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Smallest eigenvalue of the symmetric part.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// Checks the invariant implied by the declared class.
    pub fn class_holds(&self) -> bool {
        let scale = self.max_abs();
        match self.class {
            SymmetryClass::Skew => self.skew_defect() <= 1e-13 * scale,
            SymmetryClass::SymmetricPsd => {
                self.symmetry_defect() <= 1e-13 * scale
                    && self.min_eigenvalue() >= -1e-10 * scale
            }
            SymmetryClass::General => true,
        }
    }

    /// Dense row-major plain-text dump.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|c| format!("{:.17e}", self.matrix[(r, c)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A test basis function restricted to one quadrature point, in the
/// `[[value, gradient]; 3]` layout used by the kernels.
pub(crate) type LocalArg = [[f64; 2]; 3];

#[inline]
pub(crate) fn basis_arg(comp: usize, val: f64, grad: f64) -> LocalArg {
    let mut a = [[0.0; 2]; 3];
    a[comp] = [val, grad];
    a
}

/// Everything needed to evaluate the operators at one state.
#[derive(Debug, Clone)]
pub struct OperatorSet<'a> {
    mesh: &'a Mesh,
    material: Material,
    state: State,
    qp: Vec<QuadPointData>,
    traces: Option<[BoundaryTrace; 2]>,
}

impl<'a> OperatorSet<'a> {
    pub fn new(mesh: &'a Mesh, z: &State, m: &Material) -> Result<Self> {
        let qp = mesh.eval_with_gradients(z, m)?;
        let traces = if mesh.periodic() {
            None
        } else {
            Some([
                mesh.trace(z, m, Endpoint::Left)?,
                mesh.trace(z, m, Endpoint::Right)?,
            ])
        };
        Ok(OperatorSet {
            mesh,
            material: *m,
            state: z.clone(),
            qp,
            traces,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn quad_data(&self) -> &[QuadPointData] {
        &self.qp
    }

    pub fn traces(&self) -> Result<&[BoundaryTrace; 2]> {
        self.traces
            .as_ref()
            .ok_or_else(|| Error::Topology("periodic mesh has no boundary".into()))
    }

    pub fn dim(&self) -> usize {
        3 * self.mesh.n_nodes()
    }

    pub fn derivatives(&self) -> Result<GeneratorDerivatives> {
        generator_derivatives_from(self.mesh, &self.qp, &self.state, &self.material)
    }

    /// Visits every (test basis, quadrature point) pair: `f(global index,
    /// quadrature index, local test argument)`.
    #[inline]
    pub(crate) fn for_each_test<F: FnMut(usize, usize, &LocalArg)>(&self, mut f: F) {
        let n = self.mesh.n_nodes();
        for (q, qp) in self.mesh.quad_points().iter().enumerate() {
            for comp in 0..3 {
                for l in 0..2 {
                    let arg = basis_arg(comp, qp.shape[l], qp.dshape[l]);
                    f(comp * n + qp.nodes[l], q, &arg);
                }
            }
        }
    }

    /// Dense assembly of a bilinear kernel `k(q, test, trial)`.
    pub(crate) fn assemble_kernel<K: Fn(usize, &LocalArg, &LocalArg) -> f64>(
        &self,
        kernel: K,
    ) -> DMatrix<f64> {
        let n = self.mesh.n_nodes();
        let mut mat = DMatrix::zeros(3 * n, 3 * n);
        for (q, qp) in self.mesh.quad_points().iter().enumerate() {
            let mut locals = [(0usize, [[0.0; 2]; 3]); 6];
            for comp in 0..3 {
                for l in 0..2 {
                    locals[2 * comp + l] = (
                        comp * n + qp.nodes[l],
                        basis_arg(comp, qp.shape[l], qp.dshape[l]),
                    );
                }
            }
            for (gi, ai) in &locals {
                for (gj, aj) in &locals {
                    mat[(*gi, *gj)] += qp.weight * kernel(q, ai, aj);
                }
            }
        }
        mat
    }
}

/// Weighted projections `P dH`, `P dS` as stacked coefficient vectors.
///
/// The `u` component of `dH` is the constant one, whose projection is exact;
/// it is set directly so that `C^T w_H` vanishes identically.
#[derive(Debug, Clone)]
pub struct ProjectedDerivatives {
    pub h: Vec<f64>,
    pub s: Vec<f64>,
}

impl ProjectedDerivatives {
    pub fn new(ops: &OperatorSet<'_>, solver: &MassSolver, d: &GeneratorDerivatives) -> Self {
        let mesh = ops.mesh();
        let n = mesh.n_nodes();
        let mut h = Vec::with_capacity(3 * n);
        h.extend(mesh.project(solver, &d.dh.comp[0]));
        h.extend(mesh.project(solver, &d.dh.comp[1]));
        h.extend(std::iter::repeat_n(1.0, n));
        let mut s = Vec::with_capacity(3 * n);
        s.extend(mesh.project(solver, &d.ds.comp[0]));
        s.extend(std::iter::repeat_n(0.0, n));
        s.extend(mesh.project(solver, &d.ds.comp[2]));
        ProjectedDerivatives { h, s }
    }

    pub fn exergy(&self, tau0: f64) -> Vec<f64> {
        self.h
            .iter()
            .zip(&self.s)
            .map(|(h, s)| h - s / tau0)
            .collect()
    }
}

/// Residual norms of the non-interacting conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyResiduals {
    /// `||J dS||_inf` relative to the magnitude of the summed terms.
    pub poisson: f64,
    /// `||R dH||_inf`, scaled likewise.
    pub dissipation: f64,
    /// `||C^* dH||_inf`, unscaled.
    pub factor: f64,
}

pub fn degeneracy_residuals(mesh: &Mesh, z: &State, m: &Material) -> Result<DegeneracyResiduals> {
    let ops = OperatorSet::new(mesh, z, m)?;
    let d = ops.derivatives()?;
    Ok(ops.degeneracy(&d))
}

impl OperatorSet<'_> {
    pub fn degeneracy(&self, d: &GeneratorDerivatives) -> DegeneracyResiduals {
        let (jds, jscale) = self.apply_j_with_magnitude(&d.ds);
        let (rdh, rscale) = self.apply_r_with_magnitude(&d.dh);
        let ratio = |v: &[f64], s: f64| {
            let num = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if s > 0.0 {
                num / s
            } else {
                num
            }
        };
        let factor = self
            .c_star_apply(&d.dh)
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        DegeneracyResiduals {
            poisson: ratio(&jds, jscale),
            dissipation: ratio(&rdh, rscale),
            factor,
        }
    }

    /// Block operator `[[J, C, B], [-C^*, 0, 0], [-B^*, 0, 0]]` over
    /// (state dual, quadrature-point flux, port) coordinates.
    pub fn extended_block(&self) -> Result<AssembledOperator> {
        self.require_inviscid()?;
        self.traces()?;
        let dim = self.dim();
        let nq = self.mesh.n_qp();
        let j = self.assemble_j().matrix;
        let c = self.factorization()?.c.matrix;
        let b = self.assemble_b()?.matrix;
        let total = dim + nq + 6;
        let mut a = DMatrix::zeros(total, total);
        a.view_mut((0, 0), (dim, dim)).copy_from(&j);
        a.view_mut((0, dim), (dim, nq)).copy_from(&c);
        a.view_mut((0, dim + nq), (dim, 6)).copy_from(&b);
        a.view_mut((dim, 0), (nq, dim)).copy_from(&(-c.transpose()));
        a.view_mut((dim + nq, 0), (6, dim)).copy_from(&(-b.transpose()));
        Ok(AssembledOperator::new(a, SymmetryClass::Skew).at(&self.state))
    }
}

/// `(state dual, force, -y_E)` blocks of the extended operator.
pub type ExtendedOutput = (Vec<f64>, Vec<f64>, [[f64; 3]; 2]);

impl OperatorSet<'_> {
    /// Applies the extended block to `(dE, weighted flux, u)` with `dE`
    /// resolved at quadrature points. Returns the three output blocks
    /// `(state dual, force, -y_E)`.
    pub fn extended_apply(
        &self,
        de: &QpTriple,
        weighted_flux: &[f64],
        input: &PortSignal,
    ) -> Result<ExtendedOutput> {
        self.require_inviscid()?;
        let mut top = self.apply_j(de);
        for (t, c) in top.iter_mut().zip(self.c_apply(weighted_flux)) {
            *t += c;
        }
        for (t, b) in top.iter_mut().zip(self.apply_b(input)?) {
            *t += b;
        }
        let force: Vec<f64> = self.c_star_apply(de).iter().map(|x| -x).collect();
        let y = self.b_star(de)?;
        let neg_y = y.map(|row| row.map(|x| -x));
        Ok((top, force, neg_y))
    }

    pub(crate) fn require_inviscid(&self) -> Result<()> {
        if !self.material.is_inviscid() {
            return Err(Error::config(
                "factorized dissipation requires eta = zeta = 0",
            ));
        }
        Ok(())
    }
}

pub fn assemble_j(mesh: &Mesh, z: &State, m: &Material) -> Result<AssembledOperator> {
    Ok(OperatorSet::new(mesh, z, m)?.assemble_j())
}

pub fn assemble_r(mesh: &Mesh, z: &State, m: &Material) -> Result<AssembledOperator> {
    Ok(OperatorSet::new(mesh, z, m)?.assemble_r())
}

pub fn assemble_factorization(mesh: &Mesh, z: &State, m: &Material) -> Result<Factorization> {
    OperatorSet::new(mesh, z, m)?.factorization()
}

pub fn force_flux(mesh: &Mesh, z: &State, m: &Material) -> Result<ForceFlux> {
    OperatorSet::new(mesh, z, m)?.force_flux()
}

pub fn outputs(mesh: &Mesh, z: &State, m: &Material) -> Result<PortReadout> {
    let ops = OperatorSet::new(mesh, z, m)?;
    let d = ops.derivatives()?;
    ops.outputs(&d)
}

pub fn extended_block(mesh: &Mesh, z: &State, m: &Material) -> Result<AssembledOperator> {
    OperatorSet::new(mesh, z, m)?.extended_block()
}
