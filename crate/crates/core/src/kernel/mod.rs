//! Dense Hermitian linear algebra and the numerical reference values.

pub mod functions;
pub mod hermitian;
pub mod io;
pub mod rational;

pub use functions::*;
pub use hermitian::{complexify, real_embedding, CMatrix, CVector, HermitianMatrix};
pub use io::MatrixDocument;
pub use rational::{BinaryExpansion, RationalExponent};
