//! Precision-generic dense linear algebra: matrices, LU, eigenpairs of the
//! one-real-plus-pairs shape, and real polynomial roots.

mod eigen;
mod lu;
mod matrix;
mod poly;

pub use eigen::{eig_real_plus_pairs, ConjugatePair, RealPlusPairs};
pub use lu::{lu_factor, lu_solve, mat_inverse, solve, LuFactorization};
pub use matrix::{dot, Matrix};
pub use poly::{poly_eval, poly_eval_with_derivative, poly_roots_real};
