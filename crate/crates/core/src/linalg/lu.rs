use crate::error::LinalgError;
use crate::linalg::Matrix;
use crate::real::Real;

/// Partial-pivoting LU factorization `P·A = L·U`, stored as one combined
/// matrix with a unit-diagonal `L` below the diagonal.
#[derive(Clone, Debug)]
pub struct LuFactorization<T> {
    factors: Matrix<T>,
    /// `pivots[k]` is the row swapped with row `k` at elimination step `k`.
    pivots: Vec<usize>,
}

impl<T: Real> LuFactorization<T> {
    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    pub fn factors(&self) -> &Matrix<T> {
        &self.factors
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Row permutation as a map from factored row to original row.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.dim()).collect();
        for (k, &p) in self.pivots.iter().enumerate() {
            perm.swap(k, p);
        }
        perm
    }

    pub fn lower(&self) -> Matrix<T> {
        let n = self.dim();
        let prec = self.factors.precision();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.factors[(i, j)].clone(),
            std::cmp::Ordering::Equal => T::one(prec),
            std::cmp::Ordering::Less => T::zero(prec),
        })
    }

    pub fn upper(&self) -> Matrix<T> {
        let n = self.dim();
        let prec = self.factors.precision();
        Matrix::from_fn(n, n, |i, j| {
            if i <= j {
                self.factors[(i, j)].clone()
            } else {
                T::zero(prec)
            }
        })
    }

    /// Overwrites `b` with the solution of `A·x = b`.
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<(), LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        for (k, &p) in self.pivots.iter().enumerate() {
            b.swap(k, p);
        }
        let lu = &self.factors;
        for i in 1..n {
            let row = lu.row(i);
            for j in 0..i {
                let t = row[j].clone() * &b[j];
                b[i] -= &t;
            }
        }
        for i in (0..n).rev() {
            let row = lu.row(i);
            for j in i + 1..n {
                let t = row[j].clone() * &b[j];
                b[i] -= &t;
            }
            b[i] /= &row[i];
        }
        Ok(())
    }
}

/// Factors a square matrix with partial pivoting.
///
/// A pivot whose magnitude does not exceed `n · eps · max|A|` is reported as
/// [`LinalgError::SingularMatrix`].
pub fn lu_factor<T: Real>(a: &Matrix<T>) -> Result<LuFactorization<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let prec = a.precision();
    let threshold = T::from_i64(n as i64, prec) * T::epsilon(prec) * a.max_abs();
    let mut lu = a.clone();
    let mut pivots = Vec::with_capacity(n);

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if !(best > threshold) {
            return Err(LinalgError::SingularMatrix {
                column: k,
                pivot: best.to_f64(),
            });
        }
        lu.swap_rows(k, p);
        pivots.push(p);

        let pivot = lu[(k, k)].clone();
        for i in k + 1..n {
            let m = lu[(i, k)].clone() / &pivot;
            if m.is_zero() {
                lu[(i, k)] = m;
                continue;
            }
            for j in k + 1..n {
                let t = m.clone() * &lu[(k, j)];
                lu[(i, j)] -= &t;
            }
            lu[(i, k)] = m;
        }
    }
    Ok(LuFactorization {
        factors: lu,
        pivots,
    })
}

pub fn lu_solve<T: Real>(f: &LuFactorization<T>, rhs: &[T]) -> Result<Vec<T>, LinalgError> {
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x)?;
    Ok(x)
}

pub fn mat_inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let f = lu_factor(a)?;
    let n = a.rows();
    let prec = a.precision();
    let mut inv = Matrix::zeros(n, n, prec);
    for j in 0..n {
        let mut e = vec![T::zero(prec); n];
        e[j] = T::one(prec);
        f.solve_in_place(&mut e)?;
        for (i, v) in e.into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

/// Solves `A·x = b` directly.
pub fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    lu_solve(&lu_factor(a)?, b)
}
