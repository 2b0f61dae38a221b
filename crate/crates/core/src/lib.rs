//! Finite-element kernels for the modified Smagorinsky model (MSM) of
//! two-dimensional incompressible flow.
//!
//! The crate is `no_std` (it needs `alloc`). It contains everything that is
//! pure computation: triangular meshes of the two reference domains, the
//! Taylor-Hood P2-P1 pair, assembly of every bilinear and trilinear form of
//! the model, the linearly implicit Backward Euler and CNLE steppers, and the
//! energy/dissipation diagnostics. Linear solvers plug in through
//! [`linsolve::LinearSolver`]; a restarted GMRES with ILU(0) is provided here
//! and a sparse direct solver lives in the `msm` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assembly;
pub mod basis;
pub mod diagnostics;
mod error;
pub mod field;
pub mod linsolve;
pub mod mesh;
pub mod params;
pub mod quadrature;
pub mod space;
pub mod sparse;
pub mod stepper;

pub use error::{MeshError, ParamError, QuadratureError, SolveError};
pub use field::{Field, FieldKind};
pub use mesh::{BoundaryEdge, BoundaryTag, Mesh};
pub use params::ModelParams;
pub use space::TaylorHoodSpace;
pub use sparse::CsrMatrix;
