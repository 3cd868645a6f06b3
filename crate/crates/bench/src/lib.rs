//! Criterion benchmarks for tableau derivation, block factorization and
//! full solves. See `benches/`.

use radau_core::{get_problem, SolverOptions};

/// Double-precision problem and options for one benchmark point.
pub fn point(name: &str, rtol: f64, atol: f64) -> (radau_core::OdeProblem<f64>, SolverOptions) {
    let np = get_problem::<f64>(name, 53).expect("registered problem");
    (np.problem, SolverOptions::with_tolerances(rtol, atol))
}
