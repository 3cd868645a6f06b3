use crate::real::Real;

/// Work counters for one integration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub n_steps: usize,
    pub n_rejected: usize,
    pub n_f_evals: usize,
    pub n_jac_evals: usize,
    /// Individual block factorizations (one real plus one per pair per
    /// refactorization).
    pub n_lu_factorizations: usize,
    pub n_newton_iters: usize,
}

/// Accepted steps of an integration.
#[derive(Clone, Debug)]
pub struct Solution<T> {
    /// `ts[0] = t0`, then one entry per accepted step.
    pub ts: Vec<T>,
    pub ys: Vec<Vec<T>>,
    /// Method order used by each accepted step (`ts.len() - 1` entries).
    pub orders: Vec<usize>,
    pub stats: StepStats,
}

impl<T: Real> Solution<T> {
    pub fn final_time(&self) -> &T {
        self.ts.last().expect("solution holds at least the initial point")
    }

    pub fn final_state(&self) -> &[T] {
        self.ys.last().expect("solution holds at least the initial point")
    }

    pub fn min_order(&self) -> Option<usize> {
        self.orders.iter().copied().min()
    }

    pub fn max_order(&self) -> Option<usize> {
        self.orders.iter().copied().max()
    }

    /// Accepted steps taken at each order, ascending by order.
    pub fn order_histogram(&self) -> Vec<(usize, usize)> {
        let mut h: Vec<(usize, usize)> = Vec::new();
        for &p in &self.orders {
            match h.iter_mut().find(|(q, _)| *q == p) {
                Some(e) => e.1 += 1,
                None => h.push((p, 1)),
            }
        }
        h.sort_unstable();
        h
    }
}
