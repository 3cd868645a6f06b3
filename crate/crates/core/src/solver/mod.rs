//! Adaptive-order, adaptive-step Radau IIA integrator.
//!
//! Each step solves the collocation system for the stage increments with a
//! simplified Newton iteration in transformed coordinates, estimates the
//! local error from an embedded formula, and then picks the next step size
//! and method order. Orders move in steps of four (`s` in steps of two) so
//! that every method has an odd number of stages.

mod control;
mod guess;
mod newton;
mod options;
mod problem;
mod stats;

pub use control::{
    adapt_order, error_estimate, initial_dt, raw_error_vector, scaled_rms, step_size_update,
    ErrorInput,
};
pub use guess::{stage_initial_guess, PreviousStep};
pub use newton::{
    factor_blocks, newton_solve_stages, solve_newton_system, BlockFactorization, NewtonInput,
    NewtonOutcome, NewtonStatus,
};
pub use options::{Atol, SolverOptions};
pub use problem::{Jacobian, OdeProblem, Rhs};
pub use stats::{Solution, StepStats};

use crate::error::SolverError;
use crate::linalg::Matrix;
use crate::real::{eps_f64, Real};
use crate::tableau::{stages_for_order, TableauCache};

/// Consecutive Newton failures tolerated before giving up.
pub const MAX_NEWTON_FAILURES: usize = 10;

/// Forward-difference Jacobian with `h_j = √ε · max(|y_j|, atol_j)`.
pub fn finite_difference_jacobian<T: Real>(
    problem: &OdeProblem<T>,
    t: &T,
    y: &[T],
    f0: &[T],
    atol: &Atol,
) -> Matrix<T> {
    let n = y.len();
    let prec = problem.precision();
    let root_eps = T::epsilon(prec).sqrt();
    let mut jac = Matrix::zeros(n, n, prec);
    let mut yp = y.to_vec();
    let mut fp = vec![T::zero(prec); n];
    for j in 0..n {
        let mag = y[j].abs().max_of(T::from_f64(atol.get(j), prec));
        yp[j] = y[j].clone() + &(root_eps.clone() * &mag);
        let h = yp[j].clone() - &y[j];
        (problem.rhs)(t, &yp, &mut fp);
        for i in 0..n {
            jac[(i, j)] = (fp[i].clone() - &f0[i]) / &h;
        }
        yp[j] = y[j].clone();
    }
    jac
}

/// Integrates with a private tableau cache.
pub fn solve<T: Real>(problem: &OdeProblem<T>, opts: &SolverOptions) -> Result<Solution<T>, SolverError> {
    solve_with_cache(problem, opts, &TableauCache::new())
}

/// Integrates `problem` over its whole span, taking tableaus from `cache`.
pub fn solve_with_cache<T: Real>(
    problem: &OdeProblem<T>,
    opts: &SolverOptions,
    cache: &TableauCache<T>,
) -> Result<Solution<T>, SolverError> {
    problem.validate()?;
    let n = problem.dim();
    opts.validate(n)?;
    let prec = problem.precision();
    let eps = eps_f64(prec);
    let tf = problem.tf.clone();
    let span = tf.clone() - &problem.t0;

    let mut stats = StepStats::default();
    let mut order = opts.initial_order;
    let mut method = cache.get_or_build(stages_for_order(order), prec)?;
    let mut t = problem.t0.clone();
    let mut y = problem.y0.clone();
    let non_finite = |t: &T| SolverError::NonFiniteState { t: t.to_f64() };

    let mut f0 = problem.eval(&t, &y);
    stats.n_f_evals += 1;
    if y.iter().chain(&f0).any(|v| !v.is_finite()) {
        return Err(non_finite(&t));
    }

    let mut dt = match opts.fixed_steps {
        Some(k) => span.clone() / &T::from_i64(k as i64, prec),
        None => {
            let (dt, evals) = initial_dt(problem, &f0, method.tableau.stages, opts);
            stats.n_f_evals += evals;
            dt
        }
    };

    let mut ts = vec![t.clone()];
    let mut ys = vec![y.clone()];
    let mut orders = Vec::new();

    let mut jac = Matrix::zeros(n, n, prec);
    let mut jac_version = 0u64;
    let mut jac_current = false;
    let mut need_jac = true;
    let mut fact = None;
    let mut faccon = 1.0;
    let mut hist = 2.0;
    let mut prev_ctrl: Option<(f64, f64)> = None;
    let mut prev_step: Option<PreviousStep<T>> = None;
    let mut first = true;
    let mut after_reject = false;
    let mut failures = 0usize;
    let mut charged_iters = 0usize;
    let newton_tol = opts.newton_kappa.max(10.0 * eps / opts.rtol);

    loop {
        let mut last = false;
        match opts.fixed_steps {
            Some(k) => {
                if stats.n_steps == k {
                    break;
                }
                last = stats.n_steps + 1 == k;
            }
            None => {
                if t >= tf {
                    break;
                }
                let remaining = tf.clone() - &t;
                if dt >= remaining {
                    dt = remaining;
                    last = true;
                }
            }
        }
        if stats.n_steps + stats.n_rejected >= opts.max_steps {
            return Err(SolverError::MaxStepsExceeded { t: t.to_f64(), limit: opts.max_steps });
        }

        if need_jac {
            match &problem.jac {
                Some(jf) => jf(&t, &y, &mut jac),
                None => {
                    jac = finite_difference_jacobian(problem, &t, &y, &f0, &opts.atol);
                    stats.n_f_evals += n;
                }
            }
            if !jac.all_finite() {
                return Err(non_finite(&t));
            }
            stats.n_jac_evals += 1;
            jac_version += 1;
            jac_current = true;
            need_jac = false;
        }

        let s = method.tableau.stages;
        let reuse = matches!(&fact, Some(f) if BlockFactorization::matches(f, &dt, s, jac_version));
        if !reuse {
            match factor_blocks(&method.transform, &jac, &dt, jac_version, opts.parallel_blocks) {
                Ok(f) => {
                    stats.n_lu_factorizations += f.block_count();
                    fact = Some(f);
                }
                Err(_) => {
                    fact = None;
                    failures += 1;
                    stats.n_rejected += 1;
                    if opts.fixed_steps.is_some() || failures > MAX_NEWTON_FAILURES {
                        return Err(SolverError::MaxNewtonFailures { t: t.to_f64(), failures });
                    }
                    dt = dt * &T::from_f64(0.5, prec);
                    check_step(&t, &dt, eps)?;
                    continue;
                }
            }
        }
        let block = fact.as_ref().expect("factorization present");

        let scale: Vec<f64> = (0..n)
            .map(|i| opts.atol.get(i) + opts.rtol * y[i].to_f64().abs())
            .collect();
        let z0 = stage_initial_guess(prev_step.as_ref(), &method.tableau.c, &dt, n, prec);
        let outcome = newton_solve_stages(NewtonInput {
            problem,
            method: &method,
            fact: block,
            t: &t,
            y: &y,
            z0,
            scale: &scale,
            max_iters: opts.newton_iter_limit(s),
            tol: newton_tol,
            faccon,
            parallel: opts.parallel_blocks,
            zero_start_f: prev_step.as_ref().map(|_| f0.as_slice()),
        });
        stats.n_newton_iters += outcome.iterations;
        stats.n_f_evals += outcome.f_evals;

        if outcome.status != NewtonStatus::Converged {
            failures += 1;
            stats.n_rejected += 1;
            if opts.fixed_steps.is_some() || failures > MAX_NEWTON_FAILURES {
                return Err(SolverError::MaxNewtonFailures { t: t.to_f64(), failures });
            }
            dt = dt * &T::from_f64(0.5, prec);
            if !jac_current {
                need_jac = true;
            }
            charged_iters += opts.newton_iter_limit(s);
            let kappa = 0.8 * hist + 0.2 * charged_iters as f64;
            if kappa > 8.0 && order > opts.min_order {
                order -= 4;
                method = cache.get_or_build(stages_for_order(order), prec)?;
                prev_step = None;
            }
            prev_ctrl = None;
            after_reject = true;
            check_step(&t, &dt, eps)?;
            continue;
        }
        failures = 0;
        faccon = outcome.faccon;
        let z = outcome.z;
        let y_new: Vec<T> = y.iter().zip(&z[s - 1]).map(|(a, b)| a.clone() + b).collect();

        let err = if opts.fixed_steps.is_some() {
            0.0
        } else {
            let (err, evals) = error_estimate(ErrorInput {
                problem,
                method: &method,
                fact: block,
                t: &t,
                y: &y,
                y_new: &y_new,
                z: &z,
                f0: &f0,
                rtol: opts.rtol,
                atol: &opts.atol,
                refine: first || after_reject,
            })?;
            stats.n_f_evals += evals;
            err
        };
        let dt_f = dt.to_f64();

        if err <= 1.0 {
            t = if last { tf.clone() } else { t + &dt };
            y = y_new;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(non_finite(&t));
            }
            stats.n_steps += 1;
            ts.push(t.clone());
            ys.push(y.clone());
            orders.push(order);
            f0 = problem.eval(&t, &y);
            stats.n_f_evals += 1;
            if f0.iter().any(|v| !v.is_finite()) {
                return Err(non_finite(&t));
            }
            jac_current = false;
            prev_step = Some(PreviousStep {
                c: method.tableau.c.clone(),
                z,
                dt: dt.clone(),
            });
            if opts.fixed_steps.is_some() {
                need_jac = true;
                continue;
            }

            let iters = outcome.iterations + std::mem::take(&mut charged_iters);
            let (new_order, kappa) = adapt_order(iters, hist, order, opts);
            hist = kappa;
            let ctrl_prev = if first || after_reject { None } else { prev_ctrl };
            let mut fac = step_size_update(err, s, dt_f, ctrl_prev, opts);
            if after_reject {
                fac = fac.min(1.0);
            }
            prev_ctrl = Some((err.max(1e-2), dt_f));
            let keep_jac = outcome.theta <= 1e-3;
            need_jac = !keep_jac;
            if new_order != order {
                order = new_order;
                method = cache.get_or_build(stages_for_order(order), prec)?;
                prev_step = None;
                prev_ctrl = None;
            } else if keep_jac && (1.0..=1.2).contains(&fac) {
                fac = 1.0;
            }
            if fac != 1.0 {
                dt = dt * &T::from_f64(fac, prec);
            }
            first = false;
            after_reject = false;
        } else {
            stats.n_rejected += 1;
            let fac = step_size_update(err, s, dt_f, None, opts).min(1.0);
            dt = dt * &T::from_f64(fac, prec);
            if !jac_current {
                need_jac = true;
            }
            prev_ctrl = None;
            after_reject = true;
        }
        check_step(&t, &dt, eps)?;
    }

    Ok(Solution { ts, ys, orders, stats })
}

fn check_step<T: Real>(t: &T, dt: &T, eps: f64) -> Result<(), SolverError> {
    let (tf, df) = (t.to_f64(), dt.to_f64());
    if !(df > eps * tf.abs()) || df < f64::MIN_POSITIVE {
        return Err(SolverError::StepSizeUnderflow { t: tf, dt: df });
    }
    Ok(())
}
