//! Adaptive-order, adaptive-step Radau IIA integration for stiff ODEs.
//!
//! Butcher tableaus of any odd stage count are derived on demand at the
//! working precision of the problem, cached, and paired with the real
//! block-diagonalizing transform of `a⁻¹` that decouples the Newton linear
//! algebra into one `n×n` and `(s-1)/2` real `2n×2n` systems.

pub mod error;
pub mod linalg;
pub mod problems;
pub mod real;
pub mod solver;
pub mod spectral;
pub mod tableau;

pub use error::{LinalgError, ProblemError, SolverError, TableauError};
pub use linalg::{LuFactorization, Matrix};
pub use problems::{get_problem, problem_registry, NamedProblem, Protocol};
pub use real::{MpFloat, Real};
pub use solver::{solve, solve_with_cache, Atol, OdeProblem, Solution, SolverOptions, StepStats};
pub use spectral::SpectralTransform;
pub use tableau::{RadauMethod, RadauTableau, TableauCache};
