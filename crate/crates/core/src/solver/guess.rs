use crate::real::Real;

/// Stage data of the last accepted step, used to seed the next Newton solve.
#[derive(Clone, Debug)]
pub struct PreviousStep<T> {
    pub c: Vec<T>,
    pub z: Vec<Vec<T>>,
    pub dt: T,
}

/// Initial stage increments for a step of size `dt_new` with nodes `c_new`.
///
/// The collocation polynomial of the previous step (through `(0, 0)` and
/// `(c_i, Z_i)`) is evaluated at `1 + c_j·dt_new/dt_old` and shifted by
/// `Z_s` to the new base point. Without a previous step, or when the stage
/// count changed, the guess is zero.
pub fn stage_initial_guess<T: Real>(
    previous: Option<&PreviousStep<T>>,
    c_new: &[T],
    dt_new: &T,
    n: usize,
    prec: u32,
) -> Vec<Vec<T>> {
    let zeros = || vec![vec![T::zero(prec); n]; c_new.len()];
    let Some(prev) = previous else {
        return zeros();
    };
    if prev.c.len() != c_new.len() || prev.z.first().map(Vec::len) != Some(n) {
        return zeros();
    }
    let s = prev.c.len();
    let ratio = dt_new.clone() / &prev.dt;
    let one = T::one(prec);
    let last = &prev.z[s - 1];
    c_new
        .iter()
        .map(|cj| {
            let tau = one.clone() + &(cj.clone() * &ratio);
            // Lagrange basis over {0, c_1, …, c_s}; the node 0 carries a zero value.
            let mut out: Vec<T> = last.iter().map(|x| -x.clone()).collect();
            for i in 0..s {
                let mut li = tau.clone() / &prev.c[i];
                for k in 0..s {
                    if k != i {
                        li *= &((tau.clone() - &prev.c[k]) / &(prev.c[i].clone() - &prev.c[k]));
                    }
                }
                for (o, z) in out.iter_mut().zip(&prev.z[i]) {
                    *o += &(li.clone() * z);
                }
            }
            out
        })
        .collect()
}
