//! Semidefinite representations of matrix geometric means, Lieb's function and related trace
//! functions, together with the numerical oracles and a small interior-point solver used to
//! check them.

pub mod error;
pub mod geomean;
pub mod kernel;
pub mod lieb;
pub mod model;
pub mod random;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{BinaryExpansion, CMatrix, CVector, HermitianMatrix, MatrixDocument, RationalExponent};
pub use model::{
    check_feasible, export_sdpa, import_sdpa, realify, AffineBlock, Census, FeasibilityReport, Goal,
    LmiConstraint, ModelBuilder, ScalarConstraint, SdpModel, VarId, WitnessAssignment,
};
pub use solver::{solve, solve_complex, SolveResult, SolveStatus, SolverOptions};
