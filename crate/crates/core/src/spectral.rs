//! Real similarity transform that block-diagonalizes `a⁻¹`.
//!
//! For an odd stage count `s`, `a⁻¹` has one real eigenvalue `γ` and
//! `(s-1)/2` conjugate pairs `α ± iβ`. With `T = [r, u₁, v₁, u₂, v₂, …]`,
//! where `r` is the real eigenvector and `uⱼ + i·vⱼ` the eigenvector of
//! `αⱼ - iβⱼ` scaled to end in `1 + 0i`,
//!
//! ```text
//! T⁻¹ · a⁻¹ · T = diag(γ, [[α₁, -β₁], [β₁, α₁]], …)
//! ```

use crate::error::LinalgError;
use crate::linalg::{eig_real_plus_pairs, mat_inverse, Matrix};
use crate::real::Real;
use crate::tableau::RadauTableau;

#[derive(Clone, Debug)]
pub struct SpectralTransform<T> {
    pub stages: usize,
    pub gamma: T,
    /// `(α, β)` with `β > 0`, ascending in `β`.
    pub pairs: Vec<(T, T)>,
    pub t: Matrix<T>,
    pub t_inv: Matrix<T>,
}

pub fn build_transform<T: Real>(
    tableau: &RadauTableau<T>,
) -> Result<SpectralTransform<T>, LinalgError> {
    transform_from_inverse(&tableau.a_inv)
}

/// Builds the transform directly from `a⁻¹`.
pub fn transform_from_inverse<T: Real>(
    a_inv: &Matrix<T>,
) -> Result<SpectralTransform<T>, LinalgError> {
    let s = a_inv.rows();
    let prec = a_inv.precision();
    let eig = eig_real_plus_pairs(a_inv)?;

    let mut t = Matrix::zeros(s, s, prec);
    for (i, x) in eig.real_vector.iter().enumerate() {
        t[(i, 0)] = x.clone();
    }
    let mut pairs = Vec::with_capacity(eig.pairs.len());
    for (p, pair) in eig.pairs.iter().enumerate() {
        // Eigenvector of α - iβ is the conjugate of the α + iβ one; divide by
        // its last component so that (u, v) end in (1, 0).
        let lr = pair.vector_re[s - 1].clone();
        let li = pair.vector_im[s - 1].clone();
        let den = lr.clone() * &lr + &(li.clone() * &li);
        if den.is_zero() {
            return Err(LinalgError::SpectrumShapeViolation(
                "complex eigenvector has a vanishing last component".into(),
            ));
        }
        for i in 0..s {
            let vr = &pair.vector_re[i];
            let vi = &pair.vector_im[i];
            let u = (vr.clone() * &lr + &(vi.clone() * &li)) / &den;
            let v = (vr.clone() * &li - &(vi.clone() * &lr)) / &den;
            t[(i, 1 + 2 * p)] = u;
            t[(i, 2 + 2 * p)] = v;
        }
        t[(s - 1, 1 + 2 * p)] = T::one(prec);
        t[(s - 1, 2 + 2 * p)] = T::zero(prec);
        pairs.push((pair.alpha.clone(), pair.beta.clone()));
    }
    let t_inv = mat_inverse(&t)?;
    Ok(SpectralTransform {
        stages: s,
        gamma: eig.gamma,
        pairs,
        t,
        t_inv,
    })
}

impl<T: Real> SpectralTransform<T> {
    /// The block-diagonal target `diag(γ, [[α, -β], [β, α]], …)`.
    pub fn block_form(&self) -> Matrix<T> {
        let prec = self.gamma.precision();
        let mut m = Matrix::zeros(self.stages, self.stages, prec);
        m[(0, 0)] = self.gamma.clone();
        for (p, (alpha, beta)) in self.pairs.iter().enumerate() {
            let i = 1 + 2 * p;
            m[(i, i)] = alpha.clone();
            m[(i, i + 1)] = -beta.clone();
            m[(i + 1, i)] = beta.clone();
            m[(i + 1, i + 1)] = alpha.clone();
        }
        m
    }

    /// `T⁻¹ · m · T`.
    pub fn similarity(&self, m: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        self.t_inv.matmul(m)?.matmul(&self.t)
    }
}

/// True iff `T⁻¹·a⁻¹·T` matches the block-diagonal form of `st` entrywise
/// within `tol`.
pub fn verify_block_diagonal<T: Real>(st: &SpectralTransform<T>, a_inv: &Matrix<T>, tol: f64) -> bool {
    max_block_deviation(st, a_inv).is_some_and(|d| d < tol)
}

/// Largest entrywise deviation of `T⁻¹·a⁻¹·T` from the block form, or
/// `None` on dimension mismatch.
pub fn max_block_deviation<T: Real>(st: &SpectralTransform<T>, a_inv: &Matrix<T>) -> Option<f64> {
    if a_inv.rows() != st.stages || a_inv.cols() != st.stages {
        return None;
    }
    let sim = st.similarity(a_inv).ok()?;
    Some(sim.sub(&st.block_form()).max_abs().to_f64())
}
