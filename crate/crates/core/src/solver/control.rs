//! Error estimation, step-size control, order selection and the initial
//! step heuristic.

use crate::error::LinalgError;
use crate::real::Real;
use crate::tableau::RadauMethod;

use super::newton::BlockFactorization;
use super::options::{Atol, SolverOptions};
use super::problem::OdeProblem;

/// Root-mean-square of `v_i / (atol_i + rtol·max(|y_i|, |y_new_i|))`.
/// Non-finite entries give `+∞`.
pub fn scaled_rms<T: Real>(v: &[T], y: &[T], y_new: &[T], rtol: f64, atol: &Atol) -> f64 {
    let mut acc = 0.0;
    for (i, x) in v.iter().enumerate() {
        let sc = atol.get(i) + rtol * y[i].to_f64().abs().max(y_new[i].to_f64().abs());
        let r = x.to_f64() / sc;
        acc += r * r;
    }
    let out = (acc / v.len() as f64).sqrt();
    if out.is_finite() {
        out
    } else {
        f64::INFINITY
    }
}

/// Unfiltered difference `y_{n+1} - ŷ_{n+1} = Σ e_j Z_j - dt·b̃₀·f(t_n, y_n)`.
pub fn raw_error_vector<T: Real>(method: &RadauMethod<T>, z: &[Vec<T>], f0: &[T], dt: &T) -> Vec<T> {
    let w0 = method.tableau.b_tilde_0.clone() * dt;
    let mut d: Vec<T> = f0.iter().map(|f| -(w0.clone() * f)).collect();
    for (e, zj) in method.error_coeffs.iter().zip(z) {
        for (di, x) in d.iter_mut().zip(zj) {
            *di += &(e.clone() * x);
        }
    }
    d
}

/// Applies `(γ/dt) · ((γ/dt) I - J)⁻¹` to damp stiff components.
fn filter<T: Real>(fact: &BlockFactorization<T>, mut d: Vec<T>) -> Result<Vec<T>, LinalgError> {
    let g = fact.gamma_over_dt().clone();
    for x in d.iter_mut() {
        *x *= &g;
    }
    fact.solve_real(&mut d)?;
    Ok(d)
}

/// Inputs to [`error_estimate`].
pub struct ErrorInput<'a, T> {
    pub problem: &'a OdeProblem<T>,
    pub method: &'a RadauMethod<T>,
    pub fact: &'a BlockFactorization<T>,
    pub t: &'a T,
    pub y: &'a [T],
    pub y_new: &'a [T],
    pub z: &'a [Vec<T>],
    pub f0: &'a [T],
    pub rtol: f64,
    pub atol: &'a Atol,
    /// First step or retry after a rejection: a failing estimate is
    /// recomputed once with `f` evaluated at the filtered perturbation.
    pub refine: bool,
}

/// Scaled embedded error norm and the number of extra `f` evaluations.
pub fn error_estimate<T: Real>(input: ErrorInput<'_, T>) -> Result<(f64, usize), LinalgError> {
    let ErrorInput {
        problem,
        method,
        fact,
        t,
        y,
        y_new,
        z,
        f0,
        rtol,
        atol,
        refine,
    } = input;
    let dt = &fact.dt;
    let d = filter(fact, raw_error_vector(method, z, f0, dt))?;
    let err = scaled_rms(&d, y, y_new, rtol, atol);
    if err < 1.0 || !refine {
        return Ok((err, 0));
    }
    let yp: Vec<T> = y.iter().zip(&d).map(|(a, b)| a.clone() + b).collect();
    let fp = problem.eval(t, &yp);
    if fp.iter().any(|v| !v.is_finite()) {
        return Ok((err, 1));
    }
    let d = filter(fact, raw_error_vector(method, z, &fp, dt))?;
    Ok((scaled_rms(&d, y, y_new, rtol, atol), 1))
}

/// Step-size ratio `dt_new / dt` for error norm `err` of an `s`-stage step.
///
/// The elementary ratio is `safety · err^(-1/(s+1))`. When `previous`
/// holds `(err, dt)` of the last accepted step, the predictive ratio
/// `safety · err^(-1/(s+1)) · (dt/dt_prev) · (err_prev/err)^(1/(s+1))`
/// is also formed and the smaller of the two is taken.
/// The ratio is clamped to `[dt_min_factor, dt_max_factor]`; `err = 0`
/// yields the upper bound.
pub fn step_size_update(
    err: f64,
    stages: usize,
    dt: f64,
    previous: Option<(f64, f64)>,
    opts: &SolverOptions,
) -> f64 {
    if err <= 0.0 {
        return opts.dt_max_factor;
    }
    if !err.is_finite() {
        return opts.dt_min_factor;
    }
    let k = 1.0 / (stages as f64 + 1.0);
    let mut fac = opts.safety * err.powf(-k);
    if let Some((err_prev, dt_prev)) = previous {
        if err_prev > 0.0 && dt_prev > 0.0 {
            let pred = dt / dt_prev * (err_prev / err).powf(k);
            fac = fac.min(opts.safety * err.powf(-k) * pred);
        }
    }
    fac.clamp(opts.dt_min_factor, opts.dt_max_factor)
}

/// Order selection from Newton iteration counts.
///
/// `κ = 0.8·hist + 0.2·iters`; below 2.75 the order rises by 4, above 8 it
/// falls by 4, clamped to the configured range. Returns the new order and
/// the updated history (`κ`).
pub fn adapt_order(iters: usize, hist: f64, order: usize, opts: &SolverOptions) -> (usize, f64) {
    let kappa = 0.8 * hist + 0.2 * iters as f64;
    let next = if kappa < 2.75 {
        (order + 4).min(opts.max_order)
    } else if kappa > 8.0 {
        order.saturating_sub(4).max(opts.min_order)
    } else {
        order
    };
    (next.clamp(opts.min_order, opts.max_order), kappa)
}

/// Starting step: `opts.dt_init` when set, otherwise the usual two-probe
/// heuristic on `‖y0‖`, `‖f(t0, y0)‖` and a difference quotient of `f`,
/// capped by the span. Returns the step and the `f` evaluations used.
pub fn initial_dt<T: Real>(
    problem: &OdeProblem<T>,
    f0: &[T],
    stages: usize,
    opts: &SolverOptions,
) -> (T, usize) {
    let prec = problem.precision();
    let span = (problem.tf.clone() - &problem.t0).to_f64();
    if let Some(dt) = opts.dt_init {
        return (T::from_f64(dt.min(span), prec), 0);
    }
    let y0 = &problem.y0;
    let zero = vec![T::zero(prec); y0.len()];
    let norm = |v: &[T]| scaled_rms(v, y0, &zero, opts.rtol, &opts.atol);
    let d0 = norm(y0);
    let d1 = norm(f0);
    if d1 == 0.0 {
        return (T::from_f64(span / 100.0, prec), 0);
    }
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(span);
    let h0_t = T::from_f64(h0, prec);
    let y1: Vec<T> = y0.iter().zip(f0).map(|(y, f)| y.clone() + &(h0_t.clone() * f)).collect();
    let f1 = problem.eval(&(problem.t0.clone() + &h0_t), &y1);
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| a.clone() - b).collect();
    let d2 = norm(&diff) / h0;
    let order = (2 * stages - 1) as f64;
    let h1 = if !d2.is_finite() {
        h0 * 1e-3
    } else if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (order + 1.0))
    };
    let h = (100.0 * h0).min(h1).min(span);
    (T::from_f64(h, prec), 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default().order_range(5, 13)
    }

    #[test]
    fn elementary_controller_values() {
        let o = opts();
        // err = 1 gives the safety factor alone
        assert!((step_size_update(1.0, 3, 0.1, None, &o) - 0.9).abs() < 1e-15);
        assert_eq!(step_size_update(1e-4, 3, 0.1, None, &o), 8.0);
        assert_eq!(step_size_update(0.0, 3, 0.1, None, &o), 8.0);
        assert_eq!(step_size_update(1e12, 3, 0.1, None, &o), 0.2);
        let f = step_size_update(16.0, 3, 0.1, None, &o);
        assert!((f - 0.45).abs() < 1e-12);
    }

    #[test]
    fn predictive_controller_is_never_larger() {
        let o = opts();
        let plain = step_size_update(0.5, 3, 0.2, None, &o);
        // the error grew fiftyfold while dt halved: the predictor is stricter
        let pred = step_size_update(0.5, 3, 0.2, Some((0.01, 0.4)), &o);
        let want = plain * 0.5 * (0.02f64).powf(0.25);
        assert!((pred - want).abs() < 1e-12, "{pred} vs {want}");
        let loose = step_size_update(0.5, 3, 0.2, Some((0.9, 0.1)), &o);
        assert_eq!(loose, plain);
    }

    #[test]
    fn order_adaptation_examples() {
        let o = opts();
        assert_eq!(adapt_order(2, 2.0, 5, &o), (9, 2.0));
        assert_eq!(adapt_order(9, 9.0, 5, &o).0, 5);
        assert_eq!(adapt_order(5, 5.0, 5, &o).0, 5);
        assert_eq!(adapt_order(9, 9.0, 13, &o).0, 9);
        assert_eq!(adapt_order(1, 1.0, 13, &o).0, 13);
        let (p, h) = adapt_order(10, 8.0, 9, &o);
        assert_eq!(p, 5);
        assert!((h - 8.4).abs() < 1e-12);
    }

    #[test]
    fn initial_step_for_constant_solution() {
        let prob = OdeProblem::new(
            |_t: &f64, _y: &[f64], out: &mut [f64]| out[0] = 0.0,
            vec![1.0],
            0.0,
            10.0,
        );
        let o = opts();
        let (dt, evals) = initial_dt(&prob, &[0.0], 3, &o);
        assert_eq!(dt, 0.1);
        assert_eq!(evals, 0);
        let mut o2 = o.clone();
        o2.dt_init = Some(0.25);
        assert_eq!(initial_dt(&prob, &[0.0], 3, &o2).0, 0.25);
    }

    #[test]
    fn initial_step_scales_with_stiffness() {
        let mk = |lam: f64| {
            OdeProblem::new(
                move |_t: &f64, y: &[f64], out: &mut [f64]| out[0] = -lam * y[0],
                vec![1.0],
                0.0,
                1.0,
            )
        };
        let o = SolverOptions::with_tolerances(1e-6, 1e-6);
        let (slow, _) = initial_dt(&mk(1.0), &[-1.0], 3, &o);
        let (fast, _) = initial_dt(&mk(1e4), &[-1e4], 3, &o);
        assert!(fast < slow && fast > 0.0 && slow <= 1.0);
    }

    #[test]
    fn scaled_rms_handles_non_finite() {
        let a = Atol::Scalar(1.0);
        assert_eq!(scaled_rms(&[3.0, 4.0], &[0.0, 0.0], &[0.0, 0.0], 0.0, &a), (12.5f64).sqrt());
        assert_eq!(scaled_rms(&[f64::NAN], &[0.0], &[0.0], 0.1, &a), f64::INFINITY);
    }
}
