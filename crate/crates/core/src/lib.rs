//! Structure-preserving P1 Galerkin simulator for open, compressible,
//! heat-conducting fluids in one space dimension.
//!
//! The state `(rho, M, u)` evolves as `M z' = J dH + R dS + B u` with a
//! skew Poisson operator `J`, a symmetric positive semidefinite friction
//! operator `R` and a boundary port `B`. The discretization keeps the
//! non-interacting conditions exact so that the energy balance is lossless
//! and the entropy balance dissipative up to time-integration error.

// Negated comparisons reject NaN inputs along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod mesh;
pub mod operators;
pub mod profile;
pub mod reference;
pub mod state;
pub mod thermo;

pub use dynamics::{
    balance_check, exergy_dissipation, rhs, run, step, weak_strong_consistency, BalanceReport,
    BalanceTolerance, BoundaryMode, Dynamics, GeneratorPath, PortSeries, RunOutput, RunSettings,
    Scheme,
};
pub use error::{Error, Result};
pub use mesh::{build_mesh, mass_matrix, BoundaryTrace, Endpoint, MassSolver, Mesh, QuadPoint};
pub use operators::{
    assemble_factorization, assemble_j, assemble_r, degeneracy_residuals, extended_block,
    force_flux, outputs, AssembledOperator, DegeneracyResiduals, Factorization, ForceFlux,
    OperatorSet, PortReadout, PortSignal, SymmetryClass,
};
pub use profile::{FieldProfiles, Profile};
pub use state::{Component, State};
pub use thermo::{eval_eos, functionals, generator_derivatives, Functionals, Material, ThermoPoint};
