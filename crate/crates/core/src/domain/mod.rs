//! Forward solver for the Dirichlet heat equation `u_t - Lap u = f`, `u(0) = g`
//! on flat, conical and spherical 2-D domains.

mod cg;
mod heat;
mod mesh;
mod precond;
mod spec;

pub use cg::{conjugate_gradient, identity, jacobi, CgOutcome, Preconditioner};
pub use heat::{
    field_as_weighted, heat_step, solve_heat, time_steps, FieldSnapshot, SolverSettings,
    NEGATIVE_TOLERANCE,
};
pub use mesh::{build_domain, Cell, Chart, MeshedDomain, StencilRow};
pub use spec::{BoundaryClosure, DomainKind, DomainSpec, MaskShape};
