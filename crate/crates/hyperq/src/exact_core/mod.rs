//! Exact arithmetic substrate.

pub mod cyclotomic;
pub mod int_matrix;
pub mod matrix;
pub mod poly;
pub mod ratfun;
pub mod scalar;
pub mod subspace;

pub use cyclotomic::{CycField, CycScalar};
pub use int_matrix::{hermite, kernel_basis, snf, HermiteForm, IntMatrix, SnfDecomposition};
pub use matrix::Matrix;
pub use poly::{exact_divide, var_names, LaurentPoly, PolyError};
pub use ratfun::RationalFunction;
pub use scalar::{rat, ri, Int, Rat, Scalar};
pub use subspace::{canonical_subspace, SubspacePoint};
