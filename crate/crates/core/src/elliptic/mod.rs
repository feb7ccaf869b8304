//! Finite-element solver for the elliptic membrane problem.

pub mod fem;
pub mod mesh;
pub mod sparse;

pub use fem::{
    assemble, assemble_full, element_coefficients, element_coefficients_from_nodal, extract_slice, slice_nodes,
    solve_cg, solve_elliptic, CoefficientSpec, LinearSystem, NodalSolution, SliceCurve, DEFAULT_REL_TOL,
};
pub use mesh::{build_mesh, DomainShape, StructuredMesh};
pub use sparse::{conjugate_gradient, CgOutcome, CsrMatrix};
