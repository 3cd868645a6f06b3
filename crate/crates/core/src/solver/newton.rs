//! Simplified Newton iteration on the transformed stage variables.
//!
//! With `W = (T⁻¹ ⊗ I) Z` the iteration matrix `(a⁻¹/dt) ⊗ I - I ⊗ J`
//! splits into one real block `(γ/dt) I - J` and, per conjugate pair, the
//! real `2n×2n` block `[[(α/dt) I - J, -(β/dt) I], [(β/dt) I, (α/dt) I - J]]`.

use rayon::prelude::*;

use crate::error::LinalgError;
use crate::linalg::{lu_factor, LuFactorization, Matrix};
use crate::real::{eps_f64, Real};
use crate::spectral::SpectralTransform;
use crate::tableau::RadauMethod;

use super::problem::OdeProblem;

/// LU factors of every block for one `(dt, s, J)` combination.
#[derive(Clone, Debug)]
pub struct BlockFactorization<T> {
    pub dt: T,
    pub stages: usize,
    pub jac_version: u64,
    gamma_dt: T,
    pairs_dt: Vec<(T, T)>,
    real: LuFactorization<T>,
    complex: Vec<LuFactorization<T>>,
}

impl<T: Real> BlockFactorization<T> {
    pub fn matches(&self, dt: &T, stages: usize, jac_version: u64) -> bool {
        self.stages == stages && self.jac_version == jac_version && self.dt == *dt
    }

    /// Number of LU factorizations held (one real plus one per pair).
    pub fn block_count(&self) -> usize {
        1 + self.complex.len()
    }

    /// Solves `((γ/dt) I - J) x = rhs` in place.
    pub fn solve_real(&self, rhs: &mut [T]) -> Result<(), LinalgError> {
        self.real.solve_in_place(rhs)
    }

    pub fn gamma_over_dt(&self) -> &T {
        &self.gamma_dt
    }

    /// Solves the block-diagonal system for stage-major `w` (`s` rows of
    /// length `n`) in place.
    pub fn solve_blocks(&self, w: &mut [Vec<T>], parallel: bool) -> Result<(), LinalgError> {
        let n = w[0].len();
        let (first, rest) = w.split_at_mut(1);
        let mut jobs: Vec<(&LuFactorization<T>, Vec<T>)> = Vec::with_capacity(self.block_count());
        jobs.push((&self.real, std::mem::take(&mut first[0])));
        for (p, lu) in self.complex.iter().enumerate() {
            let mut buf = std::mem::take(&mut rest[2 * p]);
            buf.append(&mut std::mem::take(&mut rest[2 * p + 1]));
            jobs.push((lu, buf));
        }
        let run = |(lu, buf): &mut (&LuFactorization<T>, Vec<T>)| lu.solve_in_place(buf);
        if parallel {
            jobs.par_iter_mut().map(run).collect::<Result<Vec<_>, _>>()?;
        } else {
            jobs.iter_mut().map(run).collect::<Result<Vec<_>, _>>()?;
        }
        let mut it = jobs.into_iter();
        first[0] = it.next().expect("real block").1;
        for (p, (_, mut buf)) in it.enumerate() {
            let v = buf.split_off(n);
            rest[2 * p] = buf;
            rest[2 * p + 1] = v;
        }
        Ok(())
    }
}

/// Factors the real and complex blocks for step `dt` and Jacobian `jac`.
pub fn factor_blocks<T: Real>(
    transform: &SpectralTransform<T>,
    jac: &Matrix<T>,
    dt: &T,
    jac_version: u64,
    parallel: bool,
) -> Result<BlockFactorization<T>, LinalgError> {
    let n = jac.rows();
    let gamma_dt = transform.gamma.clone() / dt;
    let pairs_dt: Vec<(T, T)> = transform
        .pairs
        .iter()
        .map(|(a, b)| (a.clone() / dt, b.clone() / dt))
        .collect();

    let shifted = |shift: &T| {
        Matrix::from_fn(n, n, |i, j| {
            let d = if i == j { shift.clone() } else { T::zero(shift.precision()) };
            d - &jac[(i, j)]
        })
    };
    let complex_block = |(alpha, beta): &(T, T)| {
        let m = shifted(alpha);
        let prec = alpha.precision();
        let mut big = Matrix::zeros(2 * n, 2 * n, prec);
        for i in 0..n {
            for j in 0..n {
                big[(i, j)] = m[(i, j)].clone();
                big[(n + i, n + j)] = m[(i, j)].clone();
            }
            big[(i, n + i)] = -beta.clone();
            big[(n + i, i)] = beta.clone();
        }
        lu_factor(&big)
    };

    let (real, complex) = if parallel {
        rayon::join(
            || lu_factor(&shifted(&gamma_dt)),
            || pairs_dt.par_iter().map(complex_block).collect::<Result<Vec<_>, _>>(),
        )
    } else {
        (
            lu_factor(&shifted(&gamma_dt)),
            pairs_dt.iter().map(complex_block).collect::<Result<Vec<_>, _>>(),
        )
    };
    Ok(BlockFactorization {
        dt: dt.clone(),
        stages: transform.stages,
        jac_version,
        gamma_dt,
        pairs_dt,
        real: real?,
        complex: complex?,
    })
}

/// `out_i = Σ_j m[i][j] · x_j` over stage-major vectors.
pub(crate) fn stage_combine<T: Real>(m: &Matrix<T>, x: &[Vec<T>]) -> Vec<Vec<T>> {
    let s = m.rows();
    let n = x[0].len();
    let prec = x[0][0].precision().max(m.precision());
    (0..s)
        .map(|i| {
            let mut row = vec![T::zero(prec); n];
            for (j, xj) in x.iter().enumerate() {
                let mij = &m[(i, j)];
                if mij.is_zero() {
                    continue;
                }
                for (r, v) in row.iter_mut().zip(xj) {
                    *r += &(mij.clone() * v);
                }
            }
            row
        })
        .collect()
}

/// Solves the full simplified-Newton system `(I - dt·a ⊗ J) ΔZ = rhs`
/// through the transformed blocks. `rhs` and the result are stage-major.
pub fn solve_newton_system<T: Real>(
    method: &RadauMethod<T>,
    fact: &BlockFactorization<T>,
    rhs: &[Vec<T>],
    parallel: bool,
) -> Result<Vec<Vec<T>>, LinalgError> {
    let s = method.tableau.stages;
    if rhs.len() != s {
        return Err(LinalgError::DimensionMismatch { expected: s, found: rhs.len() });
    }
    // (a⁻¹/dt ⊗ I) then (T⁻¹ ⊗ I)
    let scaled: Vec<Vec<T>> = stage_combine(&method.tableau.a_inv, rhs)
        .into_iter()
        .map(|row| row.into_iter().map(|x| x / &fact.dt).collect())
        .collect();
    let mut w = stage_combine(&method.transform.t_inv, &scaled);
    fact.solve_blocks(&mut w, parallel)?;
    Ok(stage_combine(&method.transform.t, &w))
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewtonStatus {
    Converged,
    /// Contraction rate at or above 0.99.
    Diverged,
    /// Contracting, but too slowly to meet the tolerance within budget.
    TooSlow,
    NonFinite,
    SingularBlock,
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome<T> {
    pub status: NewtonStatus,
    pub iterations: usize,
    pub z: Vec<Vec<T>>,
    /// Last observed contraction rate.
    pub theta: f64,
    /// Carried to the next step's stopping test.
    pub faccon: f64,
    pub f_evals: usize,
}

/// Parameters for one stage solve.
pub struct NewtonInput<'a, T> {
    pub problem: &'a OdeProblem<T>,
    pub method: &'a RadauMethod<T>,
    pub fact: &'a BlockFactorization<T>,
    pub t: &'a T,
    pub y: &'a [T],
    pub z0: Vec<Vec<T>>,
    /// Per-component tolerance scale `atol + rtol·|y|`.
    pub scale: &'a [f64],
    pub max_iters: usize,
    /// Stopping threshold on `faccon · ‖ΔW‖`.
    pub tol: f64,
    pub faccon: f64,
    pub parallel: bool,
    /// `f(t, y)`. When given, the first iteration also forms the correction
    /// from a zero start (stage values approximated by `f(t, y)`) and keeps
    /// whichever of the two starts has the smaller correction.
    pub zero_start_f: Option<&'a [T]>,
}

fn scaled_norm<T: Real>(dw: &[Vec<T>], scale: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for row in dw {
        for (x, sc) in row.iter().zip(scale) {
            let v = x.to_f64() / sc;
            acc += v * v;
            count += 1;
        }
    }
    (acc / count as f64).sqrt()
}

/// Runs the simplified Newton iteration for the stage increments `Z`.
/// Simplified Newton correction `ΔW` for stage values `f` at the iterate `w`.
fn correction<T: Real>(
    fact: &BlockFactorization<T>,
    tr: &SpectralTransform<T>,
    f: &[Vec<T>],
    w: &[Vec<T>],
    parallel: bool,
) -> Result<Vec<Vec<T>>, LinalgError> {
    let n = f[0].len();
    let mut rhs = stage_combine(&tr.t_inv, f);
    for (r, wi) in rhs[0].iter_mut().zip(&w[0]) {
        *r -= &(fact.gamma_dt.clone() * wi);
    }
    for (p, (alpha, beta)) in fact.pairs_dt.iter().enumerate() {
        let (iu, iv) = (1 + 2 * p, 2 + 2 * p);
        for k in 0..n {
            let wu = &w[iu][k];
            let wv = &w[iv][k];
            let du = alpha.clone() * wu - &(beta.clone() * wv);
            let dv = beta.clone() * wu + &(alpha.clone() * wv);
            rhs[iu][k] -= &du;
            rhs[iv][k] -= &dv;
        }
    }
    fact.solve_blocks(&mut rhs, parallel)?;
    Ok(rhs)
}

pub fn newton_solve_stages<T: Real>(input: NewtonInput<'_, T>) -> NewtonOutcome<T> {
    let NewtonInput {
        problem,
        method,
        fact,
        t,
        y,
        z0,
        scale,
        max_iters,
        tol,
        faccon,
        parallel,
        zero_start_f,
    } = input;
    let tab = &method.tableau;
    let tr = &method.transform;
    let s = tab.stages;
    let n = y.len();
    let prec = problem.precision();
    let eps = eps_f64(prec);

    // From a zero start the first correction is the whole increment and
    // says nothing about the contraction rate.
    let mut zero_start = z0.iter().flatten().all(|v| v.is_zero());
    let mut z = z0;
    let mut w = stage_combine(&tr.t_inv, &z);
    let mut faccon = faccon.max(eps).powf(0.8);
    let mut theta = 1e-3;
    let mut theta_q_old = 0.0;
    let mut dyn_old = 0.0;
    let mut f_evals = 0;
    let stage_t: Vec<T> = tab.c.iter().map(|c| t.clone() + &(c.clone() * &fact.dt)).collect();

    let finish = |status, iterations, z, theta, faccon, f_evals| NewtonOutcome {
        status,
        iterations,
        z,
        theta,
        faccon,
        f_evals,
    };

    for iter in 1..=max_iters {
        let mut f = vec![vec![T::zero(prec); n]; s];
        for (j, fj) in f.iter_mut().enumerate() {
            let yj: Vec<T> = y.iter().zip(&z[j]).map(|(a, b)| a.clone() + b).collect();
            (problem.rhs)(&stage_t[j], &yj, fj);
            f_evals += 1;
        }
        if f.iter().flatten().any(|v| !v.is_finite()) {
            return finish(NewtonStatus::NonFinite, iter, z, theta, faccon, f_evals);
        }
        let Ok(mut dw) = correction(fact, tr, &f, &w, parallel) else {
            return finish(NewtonStatus::SingularBlock, iter, z, theta, faccon, f_evals);
        };
        if iter == 1 {
            if let Some(f0) = zero_start_f {
                let f_zero = vec![f0.to_vec(); s];
                let w_zero = vec![vec![T::zero(prec); n]; s];
                if let Ok(dw_zero) = correction(fact, tr, &f_zero, &w_zero, parallel) {
                    if scaled_norm(&dw_zero, scale) < scaled_norm(&dw, scale) {
                        dw = dw_zero;
                        w = w_zero;
                        zero_start = true;
                    }
                }
            }
        }
        let dyn_norm = scaled_norm(&dw, scale);
        if !dyn_norm.is_finite() {
            return finish(NewtonStatus::NonFinite, iter, z, theta, faccon, f_evals);
        }
        let first_rate = if zero_start { 3 } else { 2 };
        if iter >= first_rate {
            let thq = dyn_norm / dyn_old;
            theta = if iter == first_rate { thq } else { (thq * theta_q_old).sqrt() };
            theta_q_old = thq;
            if theta < 0.99 {
                faccon = theta / (1.0 - theta);
                let remaining = (max_iters - iter) as i32;
                let predicted = faccon * dyn_norm * theta.powi(remaining) / tol;
                if predicted >= 1.0 {
                    return finish(NewtonStatus::TooSlow, iter, z, theta, faccon, f_evals);
                }
            } else {
                return finish(NewtonStatus::Diverged, iter, z, theta, faccon, f_evals);
            }
        }
        dyn_old = dyn_norm.max(eps);
        for (wi, di) in w.iter_mut().zip(&dw) {
            for (a, b) in wi.iter_mut().zip(di) {
                *a += b;
            }
        }
        z = stage_combine(&tr.t, &w);
        // without a rate from this solve the correction itself must be small
        let rated = iter >= if zero_start { 3 } else { 2 };
        let bound = if rated { faccon * dyn_norm } else { faccon.max(1.0) * dyn_norm };
        if bound <= tol {
            return finish(NewtonStatus::Converged, iter, z, theta, faccon, f_evals);
        }
    }
    finish(NewtonStatus::TooSlow, max_iters, z, theta, faccon, f_evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{lu_factor as dense_lu, lu_solve};
    use crate::tableau::build_method;

    fn test_jacobian(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                -10.0 * (i + 1) as f64
            } else {
                ((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.6
            }
        })
    }

    #[test]
    fn block_solve_matches_dense_system() {
        let n = 4;
        for s in [1usize, 3, 5, 7] {
            let m = build_method::<f64>(s, 53).unwrap();
            let jac = test_jacobian(n);
            let dt = 0.37;
            for parallel in [false, true] {
                let fact = factor_blocks(&m.transform, &jac, &dt, 0, parallel).unwrap();
                assert_eq!(fact.block_count(), s.div_ceil(2));
                let rhs: Vec<Vec<f64>> = (0..s)
                    .map(|i| (0..n).map(|k| ((i * n + k) as f64).sin()).collect())
                    .collect();
                let got = solve_newton_system(&m, &fact, &rhs, parallel).unwrap();

                let dense = Matrix::from_fn(s * n, s * n, |r, c| {
                    let (i, k) = (r / n, r % n);
                    let (j, l) = (c / n, c % n);
                    let id = if r == c { 1.0 } else { 0.0 };
                    id - dt * m.tableau.a[(i, j)] * jac[(k, l)]
                });
                let flat: Vec<f64> = rhs.concat();
                let want = lu_solve(&dense_lu(&dense).unwrap(), &flat).unwrap();
                let err = got
                    .concat()
                    .iter()
                    .zip(&want)
                    .fold(0f64, |e, (a, b)| e.max((a - b).abs()));
                assert!(err < 1e-12, "s={s}: {err:e}");
            }
        }
    }

    #[test]
    fn linear_problem_converges_after_one_correction() {
        // y' = -y with the exact Jacobian: the first update is exact, later
        // ones only measure rounding.
        let m = build_method::<f64>(3, 53).unwrap();
        let prob = OdeProblem::new(
            |_t: &f64, y: &[f64], out: &mut [f64]| out[0] = -y[0],
            vec![1.0],
            0.0,
            1.0,
        );
        let jac = Matrix::from_f64_rows(&[&[-1.0]], 53);
        let fact = factor_blocks(&m.transform, &jac, &0.1, 0, false).unwrap();
        let run = |max_iters| {
            newton_solve_stages(NewtonInput {
                problem: &prob,
                method: &m,
                fact: &fact,
                t: &0.0,
                y: &[1.0],
                z0: vec![vec![0.0]; 3],
                scale: &[1e-10],
                max_iters,
                tol: 1e-2,
                faccon: 1.0,
                parallel: false,
                zero_start_f: None,
            })
        };
        let exact = (-0.1f64).exp() - 1.0;
        let one = run(1);
        assert!((one.z[2][0] - exact).abs() < 1e-9);
        let out = run(7);
        assert_eq!(out.status, NewtonStatus::Converged);
        // the second correction is rounding, so no rate estimate is needed
        assert_eq!(out.iterations, 2);
        assert!((out.z[2][0] - one.z[2][0]).abs() < 1e-15);
    }

    #[test]
    fn zero_start_replaces_a_bad_extrapolation() {
        let m = build_method::<f64>(3, 53).unwrap();
        let prob = OdeProblem::new(
            |_t: &f64, y: &[f64], out: &mut [f64]| out[0] = -y[0],
            vec![1.0],
            0.0,
            1.0,
        );
        let jac = Matrix::from_f64_rows(&[&[-1.0]], 53);
        let fact = factor_blocks(&m.transform, &jac, &0.1, 0, false).unwrap();
        let f0 = [-1.0];
        let out = newton_solve_stages(NewtonInput {
            problem: &prob,
            method: &m,
            fact: &fact,
            t: &0.0,
            y: &[1.0],
            z0: vec![vec![1e6]; 3],
            scale: &[1e-10],
            max_iters: 7,
            tol: 1e-2,
            faccon: 1.0,
            parallel: false,
            zero_start_f: Some(&f0),
        });
        assert_eq!(out.status, NewtonStatus::Converged);
        assert!((out.z[2][0] - ((-0.1f64).exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn zero_jacobian_reproduces_quadrature() {
        // y' = cos t with J = 0: Z_i = dt Σ_j a_ij cos(t + c_j dt) in one pass.
        let m = build_method::<f64>(5, 53).unwrap();
        let prob = OdeProblem::new(
            |t: &f64, _y: &[f64], out: &mut [f64]| out[0] = t.cos(),
            vec![0.0],
            0.0,
            1.0,
        );
        let jac = Matrix::zeros(1, 1, 53);
        let dt = 0.5;
        let fact = factor_blocks(&m.transform, &jac, &dt, 0, false).unwrap();
        let out = newton_solve_stages(NewtonInput {
            problem: &prob,
            method: &m,
            fact: &fact,
            t: &0.0,
            y: &[0.0],
            z0: vec![vec![0.0]; 5],
            scale: &[1e-12],
            max_iters: 7,
            tol: 1e-2,
            faccon: 1.0,
            parallel: false,
            zero_start_f: None,
        });
        assert_eq!(out.status, NewtonStatus::Converged);
        assert!((out.z[4][0] - dt.sin()).abs() < 1e-14);
    }

    #[test]
    fn stale_jacobian_on_stiff_problem_diverges() {
        // y' = -1e4 y³ iterated with J = 0 at dt = 1 is a fixed-point map
        // with rate far above one.
        let m = build_method::<f64>(3, 53).unwrap();
        let prob = OdeProblem::new(
            |_t: &f64, y: &[f64], out: &mut [f64]| out[0] = -1e4 * y[0] * y[0] * y[0],
            vec![1.0],
            0.0,
            1.0,
        );
        let jac = Matrix::from_f64_rows(&[&[0.0]], 53);
        let fact = factor_blocks(&m.transform, &jac, &1.0, 0, false).unwrap();
        let out = newton_solve_stages(NewtonInput {
            problem: &prob,
            method: &m,
            fact: &fact,
            t: &0.0,
            y: &[1.0],
            z0: vec![vec![0.0]; 3],
            scale: &[1e-6],
            max_iters: 7,
            tol: 1e-2,
            faccon: 1.0,
            parallel: false,
            zero_start_f: None,
        });
        assert_ne!(out.status, NewtonStatus::Converged);
        assert!(out.iterations <= 3);
    }
}
