use std::fmt;
use std::sync::Arc;

use crate::error::SolverError;
use crate::linalg::Matrix;
use crate::real::Real;

/// Right-hand side `f(t, y)` written into the output slice.
pub type Rhs<T> = dyn Fn(&T, &[T], &mut [T]) + Send + Sync;
/// Jacobian `∂f/∂y (t, y)` written into an `n×n` matrix.
pub type Jacobian<T> = dyn Fn(&T, &[T], &mut Matrix<T>) + Send + Sync;

/// `y' = f(t, y)`, `y(t0) = y0`, integrated over `[t0, tf]`.
#[derive(Clone)]
pub struct OdeProblem<T> {
    pub rhs: Arc<Rhs<T>>,
    pub jac: Option<Arc<Jacobian<T>>>,
    pub y0: Vec<T>,
    pub t0: T,
    pub tf: T,
}

impl<T: Real> OdeProblem<T> {
    pub fn new<F>(rhs: F, y0: Vec<T>, t0: T, tf: T) -> Self
    where
        F: Fn(&T, &[T], &mut [T]) + Send + Sync + 'static,
    {
        OdeProblem {
            rhs: Arc::new(rhs),
            jac: None,
            y0,
            t0,
            tf,
        }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&T, &[T], &mut Matrix<T>) + Send + Sync + 'static,
    {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    /// Working precision: the widest of the state and time-span scalars.
    pub fn precision(&self) -> u32 {
        self.y0
            .iter()
            .map(Real::precision)
            .chain([self.t0.precision(), self.tf.precision()])
            .max()
            .unwrap_or(53)
    }

    pub fn eval(&self, t: &T, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(self.precision()); y.len()];
        (self.rhs)(t, y, &mut out);
        out
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.y0.is_empty() {
            return Err(SolverError::InvalidProblem("empty state vector".into()));
        }
        if !(self.tf > self.t0) {
            return Err(SolverError::InvalidProblem(format!(
                "time span must satisfy tf > t0 (got {} .. {})",
                self.t0, self.tf
            )));
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for OdeProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("dim", &self.y0.len())
            .field("t0", &self.t0)
            .field("tf", &self.tf)
            .field("analytic_jacobian", &self.jac.is_some())
            .finish()
    }
}
