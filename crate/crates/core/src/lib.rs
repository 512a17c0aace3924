//! Bicubic T-spline spaces over index-space T-meshes.
//!
//! The crate is `no_std` (with `alloc`). It covers the combinatorics of
//! admissible T-meshes and their extensions, the analysis-suitability test,
//! blending-function evaluation, de Boor–Fix dual functionals, exact
//! dimension counting through smoothing cofactors, perturbed meshes, and
//! nestedness certification for local refinement.
//!
//! Index-space objects use `i32` lattice coordinates. Knots are exact
//! rationals; evaluation happens in `f64` unless a caller asks for exact
//! arithmetic through the generic [`Field`] routines.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod dimension;
pub mod dual;
pub mod extension;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod nesting;
pub mod perturb;
pub mod quadrature;
pub mod spline;

pub use dimension::{
    assemble, certify_order, diagonalizable_order, dim_formula, dimension_report, simplify, ConstraintSystem,
    DimensionError, DimensionReport, Peel, ReducedSystem,
};
pub use dual::{
    UnivariateDual, convergence_study, dual_apply, extended_support, project, Bivariate, ConvergenceTable,
    DualError, DualFunctional, ExtendedSupport, Projection,
};
pub use extension::{
    extend, extend_with, is_analysis_suitable, tjunction_extensions, AsWitness, ExtendError,
    ExtendOptions, Extension, ExtendedTMesh, VertexClass,
};
pub use field::{Field, Rational};
pub use linalg::SparseMatrix;
pub use mesh::{
    build_tmesh, AdmissibilityReport, Axis, IndexDomain, MeshError, Point, Rect, Segment, Span,
    Symbol, SymbolicMesh, TMesh,
};
pub use nesting::{
    certify_nested, refine_geometry, refinement_matrix, try_certify_nested, NestingCertificate, NestingError,
    RefinementMatrix, Verdict,
};
pub use perturb::{
    check_index_commutation, convergence_experiment, dimension_report_perturbed, perturb,
    relative_perturb, Coefficients, DeviationTable, PerturbError, PerturbedKnots, PerturbedMesh,
};
pub use spline::{bspline_eval, AnchorFunction, Element, GlobalKnots, SplineError, SplineSpace};
