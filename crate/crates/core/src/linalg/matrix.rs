use std::ops::{Index, IndexMut};

use crate::error::LinalgError;
use crate::real::Real;

/// Dense row-major matrix with fixed dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = T::one(prec);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows.
    ///
    /// # Panics
    /// Panics when `rows` is empty or ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nr = rows.len();
        assert!(nr > 0, "matrix needs at least one row");
        let nc = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Matrix {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_f64_rows(rows: &[&[f64]], prec: u32) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| T::from_f64(x, prec)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        Ok(Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = self[(i, 0)].clone() * &rhs[(0, j)];
            for k in 1..self.cols {
                acc += &(self[(i, k)].clone() * &rhs[(k, j)]);
            }
            acc
        }))
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect())
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - &rhs[(i, j)]
        })
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        let prec = self.precision();
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(T::zero(prec), |acc, x| acc + x.abs())
            })
            .fold(T::zero(prec), T::max_of)
    }

    pub fn max_abs(&self) -> T {
        let prec = self.precision();
        self.data
            .iter()
            .fold(T::zero(prec), |acc, x| acc.max_of(x.abs()))
    }

    pub fn precision(&self) -> u32 {
        self.data.first().map_or(53, |x| x.precision())
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.to_f64()).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut it = a.iter().zip(b);
    let (x0, y0) = it.next().expect("dot of empty vectors");
    let mut acc = x0.clone() * y0;
    for (x, y) in it {
        acc += &(x.clone() * y);
    }
    acc
}
