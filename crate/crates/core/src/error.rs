use thiserror::Error;

use crate::lattice::ValidationReport;

/// Errors raised by lattice construction, operators, solvers and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no lattice cell fits inside the domain")]
    EmptyLattice,
    #[error("invalid step {0}: must be positive and finite")]
    InvalidStep(f64),
    #[error("lattice is not bipartite: vertex {vertex} gets both colors")]
    NotBipartite { vertex: usize },
    #[error("face {face} has a zero-length diagonal")]
    DegenerateFace { face: usize },
    #[error("face diagonals are linearly dependent")]
    SingularFace,
    #[error("diagonal z1z3 has zero length")]
    DegenerateDiagonal,
    #[error("vertex {0} is not on the boundary")]
    NotOnBoundary(usize),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("lattice failed validation:\n{0}")]
    Validation(ValidationReport),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solver hit the iteration cap after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("function is not discrete harmonic: conjugate cycle residual {0:e}")]
    NotHarmonic(f64),
    #[error("function is not discrete analytic: residual {0:e}")]
    NotAnalytic(f64),
    #[error("boundary increments do not sum to zero (cycle sum {0:e})")]
    InconsistentBoundaryData(f64),
    #[error("lattice is not orthogonal")]
    NotOrthogonal,
    #[error("triangulation is not strictly Delaunay (min slack {0:e})")]
    NotDelaunay(f64),
    #[error("triangulation boundary is irregular at triangle {0}")]
    IrregularBoundary(usize),
    #[error("triangle {0} is too thin to have a reliable circumcenter")]
    DegenerateCircumcenter(usize),
    #[error("triangle {0} has zero or negative area")]
    DegenerateTriangle(usize),
    #[error("vertex set is not a contiguous boundary arc")]
    NotAnArc,
    #[error("every walk hit the step cap of {0}")]
    WalkCapExceeded(usize),
    #[error("box is not inside the lattice boundary")]
    BoxOutsideLattice,
    #[error("margin {r} too small (needs > {needed})")]
    MarginTooSmall { r: f64, needed: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
