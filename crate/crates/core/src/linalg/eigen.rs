//! Eigen-decomposition for matrices whose spectrum is one real eigenvalue
//! plus complex-conjugate pairs.
//!
//! Eigenvalues are located in double precision (Schur form), eigenvectors are
//! seeded by inverse iteration, and each eigenpair is then refined by Newton's
//! method on `(A - λI)v = 0` at the working precision of the input matrix.

use nalgebra::DMatrix;

use crate::error::LinalgError;
use crate::linalg::{lu_factor, Matrix};
use crate::real::Real;

/// One complex-conjugate eigenvalue pair `α ± iβ` with `β > 0`, together
/// with the eigenvector `re + i·im` belonging to `α + iβ`.
#[derive(Clone, Debug)]
pub struct ConjugatePair<T> {
    pub alpha: T,
    pub beta: T,
    pub vector_re: Vec<T>,
    pub vector_im: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct RealPlusPairs<T> {
    pub gamma: T,
    /// Real eigenvector, unit Euclidean length, largest component positive.
    pub real_vector: Vec<T>,
    /// Sorted by ascending `beta`.
    pub pairs: Vec<ConjugatePair<T>>,
}

/// Decomposes a square matrix of odd dimension `s` whose spectrum is exactly
/// one real eigenvalue and `(s-1)/2` conjugate pairs.
pub fn eig_real_plus_pairs<T: Real>(a: &Matrix<T>) -> Result<RealPlusPairs<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n % 2 == 0 {
        return Err(LinalgError::SpectrumShapeViolation(format!(
            "even dimension {n} cannot have exactly one real eigenvalue"
        )));
    }
    let prec = a.precision();
    let af = a.to_f64();
    let scale = af.norm_inf().max(f64::MIN_POSITIVE);
    let dm = DMatrix::from_row_slice(n, n, af.as_slice());
    let eigs = dm.complex_eigenvalues();

    let tol = 1e-8 * scale;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = 0usize;
    for z in eigs.iter() {
        if z.im.abs() <= tol {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push((z.re, z.im));
        } else {
            lower += 1;
        }
    }
    if reals.len() != 1 || upper.len() != lower || upper.len() != (n - 1) / 2 {
        return Err(LinalgError::SpectrumShapeViolation(format!(
            "found {} real eigenvalues and {}/{} conjugate halves",
            reals.len(),
            upper.len(),
            lower
        )));
    }
    upper.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("finite eigenvalues"));

    let (gamma, gamma_im, mut real_vector, _) = refine_eigenpair(a, (reals[0], 0.0), false)?;
    debug_assert!(gamma_im.is_zero());
    normalize_real_vector(&mut real_vector, prec);

    let mut pairs = Vec::with_capacity(upper.len());
    for &(re, im) in &upper {
        let (alpha, beta, vector_re, vector_im) = refine_eigenpair(a, (re, im), true)?;
        if !(beta.to_f64() > 0.0) {
            return Err(LinalgError::SpectrumShapeViolation(
                "complex eigenvalue collapsed onto the real axis during refinement".into(),
            ));
        }
        pairs.push(ConjugatePair {
            alpha,
            beta,
            vector_re,
            vector_im,
        });
    }
    Ok(RealPlusPairs {
        gamma,
        real_vector,
        pairs,
    })
}

fn normalize_real_vector<T: Real>(v: &mut [T], prec: u32) {
    let mut norm2 = T::zero(prec);
    let mut big = 0;
    for (i, x) in v.iter().enumerate() {
        norm2 += &(x.clone() * x);
        if x.abs() > v[big].abs() {
            big = i;
        }
    }
    let mut norm = norm2.sqrt();
    if v[big].to_f64() < 0.0 {
        norm = -norm;
    }
    for x in v.iter_mut() {
        *x /= &norm;
    }
}

/// Real embedding of the complex matrix `A - (lr + i·li)·I` acting on
/// `[x; y]` for `v = x + i·y`.
fn shifted_embedding<T: Real>(a: &Matrix<T>, lr: &T, li: &T) -> Matrix<T> {
    let n = a.rows();
    let prec = a.precision();
    let mut m = Matrix::zeros(2 * n, 2 * n, prec);
    for i in 0..n {
        for j in 0..n {
            let mut d = a[(i, j)].clone();
            if i == j {
                d -= lr;
                m[(i, n + j)] = li.clone();
                m[(n + i, j)] = -li.clone();
            }
            m[(i, j)] = d.clone();
            m[(n + i, n + j)] = d;
        }
    }
    m
}

/// Inverse iteration in double precision for an eigenvector seed.
fn seed_vector(a: &Matrix<f64>, lr: f64, li: f64) -> Vec<f64> {
    let n = a.rows();
    let mag = (lr * lr + li * li).sqrt().max(1.0);
    let mut m = None;
    for k in 0..8 {
        let offset = mag * 1e-10 * 10f64.powi(k);
        let cand = shifted_embedding(a, &(lr + offset), &(li + offset));
        if let Ok(f) = lu_factor(&cand) {
            m = Some(f);
            break;
        }
    }
    let mut v: Vec<f64> = (0..2 * n).map(|i| 1.0 + 0.1 * i as f64).collect();
    if let Some(f) = m {
        for _ in 0..3 {
            if f.solve_in_place(&mut v).is_err() {
                break;
            }
            let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if big > 0.0 && big.is_finite() {
                v.iter_mut().for_each(|x| *x /= big);
            }
        }
    }
    v
}

/// Newton refinement of one eigenpair at the precision of `a`. Returns
/// `(re λ, im λ, re v, im v)` with `v` normalized to 1 in its largest
/// component.
#[allow(clippy::type_complexity)]
fn refine_eigenpair<T: Real>(
    a: &Matrix<T>,
    seed: (f64, f64),
    complex: bool,
) -> Result<(T, T, Vec<T>, Vec<T>), LinalgError> {
    let n = a.rows();
    let prec = a.precision();
    let af = a.to_f64();
    let raw = seed_vector(&af, seed.0, seed.1);

    // Pick the pivot component k and normalize v_k = 1.
    let k = (0..n)
        .max_by(|&i, &j| {
            let mi = raw[i].hypot(raw[n + i]);
            let mj = raw[j].hypot(raw[n + j]);
            mi.partial_cmp(&mj).expect("finite seed")
        })
        .expect("nonempty");
    let (pr, pi) = (raw[k], raw[n + k]);
    let den = pr * pr + pi * pi;
    let mut x: Vec<T> = Vec::with_capacity(n);
    let mut y: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let (vr, vi) = (raw[i], raw[n + i]);
        let re = (vr * pr + vi * pi) / den;
        let im = if complex { (vi * pr - vr * pi) / den } else { 0.0 };
        x.push(T::from_f64(re, prec));
        y.push(T::from_f64(im, prec));
    }
    x[k] = T::one(prec);
    y[k] = T::zero(prec);
    let mut lr = T::from_f64(seed.0, prec);
    let mut li = T::from_f64(if complex { seed.1 } else { 0.0 }, prec);

    let eps = T::epsilon(prec);
    let mut last: Option<T> = None;
    for _ in 0..80 {
        let m = shifted_embedding(a, &lr, &li);
        // Residual F = [(A - lr)x + li·y ; (A - lr)y - li·x].
        let mut xy = x.clone();
        xy.extend(y.iter().cloned());
        let f = m.mul_vec(&xy)?;
        let mut jac = m;
        for i in 0..n {
            // d/d lr replaces the x_k column, d/d li replaces the y_k column.
            jac[(i, k)] = -x[i].clone();
            jac[(n + i, k)] = -y[i].clone();
            jac[(i, n + k)] = y[i].clone();
            jac[(n + i, n + k)] = -x[i].clone();
        }
        let mut delta: Vec<T> = f.into_iter().map(|v| -v).collect();
        lu_factor(&jac)?.solve_in_place(&mut delta)?;

        let mut size = T::zero(prec);
        for i in 0..n {
            if i == k {
                lr += &delta[i];
                li += &delta[n + i];
            } else {
                x[i] += &delta[i];
                y[i] += &delta[n + i];
            }
            size = size.max_of(delta[i].abs()).max_of(delta[n + i].abs());
        }
        let scale = lr.abs().max_of(li.abs()).max_of(T::one(prec));
        if size <= eps.clone() * &scale * &T::from_i64(4, prec) {
            break;
        }
        if let Some(prev) = &last {
            if size >= *prev && size.to_f64() < 1e-6 * scale.to_f64() {
                break;
            }
        }
        last = Some(size);
    }

    // Residual check: ||A v - λ v|| <= 1e3 · eps · ||A|| · ||v||.
    let m = shifted_embedding(a, &lr, &li);
    let mut xy = x.clone();
    xy.extend(y.iter().cloned());
    let r = m.mul_vec(&xy)?;
    let rnorm = r.iter().fold(T::zero(prec), |acc, v| acc.max_of(v.abs()));
    let vnorm = xy.iter().fold(T::zero(prec), |acc, v| acc.max_of(v.abs()));
    let bound = T::from_i64(1000, prec) * &eps * &a.norm_inf() * &vnorm;
    if !(rnorm <= bound) {
        return Err(LinalgError::SpectrumShapeViolation(format!(
            "eigenpair near {:?} did not converge (residual {:e})",
            seed,
            rnorm.to_f64()
        )));
    }
    Ok((lr, li, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::MpFloat;

    #[test]
    fn scalar_matrix() {
        let a = Matrix::<f64>::from_f64_rows(&[&[5.0]], 53);
        let d = eig_real_plus_pairs(&a).unwrap();
        assert_eq!(d.gamma, 5.0);
        assert!(d.pairs.is_empty());
        assert_eq!(d.real_vector, vec![1.0]);
    }

    #[test]
    fn block_diagonal_three_by_three() {
        let a = Matrix::<f64>::from_f64_rows(
            &[&[2.0, 0.0, 0.0], &[0.0, 1.0, -1.0], &[0.0, 1.0, 1.0]],
            53,
        );
        let d = eig_real_plus_pairs(&a).unwrap();
        assert!((d.gamma - 2.0).abs() < 1e-14);
        assert_eq!(d.pairs.len(), 1);
        assert!((d.pairs[0].alpha - 1.0).abs() < 1e-14);
        assert!((d.pairs[0].beta - 1.0).abs() < 1e-14);
        assert!((d.real_vector[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_wrong_spectrum_shape() {
        let even = Matrix::<f64>::identity(2, 53);
        assert!(matches!(
            eig_real_plus_pairs(&even),
            Err(LinalgError::SpectrumShapeViolation(_))
        ));
        let three_real = Matrix::<f64>::from_f64_rows(
            &[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]],
            53,
        );
        assert!(matches!(
            eig_real_plus_pairs(&three_real),
            Err(LinalgError::SpectrumShapeViolation(_))
        ));
    }

    #[test]
    fn eigen_residuals_at_extended_precision() {
        let prec = 256;
        let a = Matrix::<MpFloat>::from_f64_rows(
            &[&[0.3, -1.2, 0.5], &[0.9, 0.4, -0.7], &[0.25, 1.1, 0.6]],
            prec,
        );
        let d = eig_real_plus_pairs(&a).unwrap();
        let eps = 2f64.powi(-255);
        let av = a.mul_vec(&d.real_vector).unwrap();
        for (lhs, v) in av.iter().zip(&d.real_vector) {
            let r = (lhs.clone() - &(d.gamma.clone() * v)).abs().to_f64();
            assert!(r < 1e3 * eps * 3.0, "{r:e}");
        }
        let p = &d.pairs[0];
        let ar = a.mul_vec(&p.vector_re).unwrap();
        let ai = a.mul_vec(&p.vector_im).unwrap();
        for i in 0..3 {
            // (A v)_re = α re - β im, (A v)_im = α im + β re
            let re = ar[i].clone()
                - &(p.alpha.clone() * &p.vector_re[i] - &(p.beta.clone() * &p.vector_im[i]));
            let im = ai[i].clone()
                - &(p.alpha.clone() * &p.vector_im[i] + &(p.beta.clone() * &p.vector_re[i]));
            assert!(re.abs().to_f64() < 1e3 * eps * 3.0);
            assert!(im.abs().to_f64() < 1e3 * eps * 3.0);
        }
    }
}
