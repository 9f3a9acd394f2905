//! Discrete complex analysis on finite quadrilateral lattices.
//!
//! The crate solves the discrete Dirichlet problem for discrete harmonic
//! functions, builds conjugate functions and discrete analytic completions,
//! links cotangent finite elements on Delaunay triangulations to orthogonal
//! kite lattices, estimates discrete harmonic measure, and provides the
//! identity checks and convergence studies used to exercise all of it.

pub mod analysis;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod lattice;
pub mod measure;
pub mod operators;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::Point;
pub use lattice::{Color, Domain, LatticeKind, QuadLattice};
