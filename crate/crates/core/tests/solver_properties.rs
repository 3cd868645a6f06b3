use proptest::prelude::*;
use radau_core::linalg::{lu_factor, lu_solve};
use radau_core::solver::{adapt_order, factor_blocks, solve_newton_system, step_size_update};
use radau_core::tableau::build_method;
use radau_core::{get_problem, solve, Matrix, MpFloat, OdeProblem, Real, SolverOptions};

fn decay<T: Real>(prec: u32) -> OdeProblem<T> {
    OdeProblem::new(
        |_t: &T, y: &[T], out: &mut [T]| out[0] = -y[0].clone(),
        vec![T::one(prec)],
        T::zero(prec),
        T::one(prec),
    )
    .with_jacobian(move |_t: &T, _y: &[T], j: &mut Matrix<T>| j[(0, 0)] = -T::one(prec))
}

/// Least-squares slope of log(error) against log(dt) over 6 halvings from 0.1.
fn observed_order(stages: usize) -> f64 {
    let prec = 256;
    let prob = decay::<MpFloat>(prec);
    let exact = MpFloat::from_i64(-1, prec).exp();
    let order = 2 * stages - 1;
    let mut pts = Vec::new();
    for k in 0..7 {
        let steps = 10usize << k;
        let mut opts = SolverOptions::with_tolerances(1e-30, 1e-30).fixed_order(order);
        opts.fixed_steps = Some(steps);
        let sol = solve(&prob, &opts).unwrap();
        let err = (sol.final_state()[0].clone() - &exact).abs().to_f64();
        pts.push(((1.0 / steps as f64).ln(), err.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

#[test]
fn fixed_step_convergence_order() {
    for s in [3usize, 5] {
        let p = observed_order(s);
        assert!(p >= (2 * s - 1) as f64 - 0.25, "s={s} observed {p}");
    }
}

#[test]
fn stiff_decay_reaches_the_slow_manifold() {
    let k = 1e6;
    let prob = OdeProblem::new(
        move |t: &f64, y: &[f64], out: &mut [f64]| out[0] = -k * (y[0] - t.cos()),
        vec![0.0],
        0.0,
        2.0,
    )
    .with_jacobian(move |_t: &f64, _y: &[f64], j: &mut Matrix<f64>| j[(0, 0)] = -k);
    let exact = |t: f64| k / (k * k + 1.0) * (k * t.cos() + t.sin()) - k * k / (k * k + 1.0) * (-k * t).exp();
    let rtol = 1e-6;
    let sol = solve(&prob, &SolverOptions::with_tolerances(rtol, 1e-6)).unwrap();
    for (t, y) in sol.ts.iter().zip(&sol.ys) {
        assert!((y[0] - exact(*t)).abs() < 10.0 * rtol, "t={t} y={} exact={}", y[0], exact(*t));
    }
    // the exact transient itself needs t ≈ 1.15e-5 to get within 10·rtol
    let first_close = sol
        .ts
        .iter()
        .zip(&sol.ys)
        .position(|(t, y)| (y[0] - t.cos()).abs() < 10.0 * rtol)
        .unwrap();
    assert!(first_close <= 8, "entered after {first_close} steps");
    assert!(sol.ts.iter().zip(&sol.ys).skip(first_close).all(|(t, y)| (y[0] - t.cos()).abs() < 10.0 * rtol));
    assert!(sol.stats.n_steps < 200, "{:?}", sol.stats);
}

#[test]
fn parallel_blocks_do_not_change_steps() {
    for name in ["robertson", "hires"] {
        let np = get_problem::<f64>(name, 53).unwrap();
        let serial = SolverOptions::with_tolerances(1e-8, 1e-10);
        let mut parallel = serial.clone();
        parallel.parallel_blocks = true;
        let a = solve(&np.problem, &serial).unwrap();
        let b = solve(&np.problem, &parallel).unwrap();
        let bits = |v: &Vec<Vec<f64>>| v.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(a.ts.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.ts.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(bits(&a.ys), bits(&b.ys));
        assert_eq!(a.orders, b.orders);
        assert_eq!(a.stats, b.stats);
    }
}

#[test]
fn serial_runs_are_reproducible() {
    let np = get_problem::<f64>("oregonator", 53).unwrap();
    let o = SolverOptions::with_tolerances(1e-9, 1e-11);
    let a = solve(&np.problem, &o).unwrap();
    let b = solve(&np.problem, &o).unwrap();
    assert_eq!(a.ts, b.ts);
    assert_eq!(a.ys, b.ys);
    assert_eq!(a.orders, b.orders);
}

#[test]
fn counters_are_consistent() {
    for name in ["oregonator", "robertson", "hires", "pollution"] {
        let np = get_problem::<f64>(name, 53).unwrap();
        let sol = solve(&np.problem, &SolverOptions::with_tolerances(1e-7, 1e-9)).unwrap();
        let st = &sol.stats;
        assert!(st.n_newton_iters >= st.n_steps + st.n_rejected, "{name}: {st:?}");
        assert_eq!(sol.ts.len(), st.n_steps + 1);
        assert!(sol.ts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*sol.final_time(), np.problem.tf);
        // every refactorization touches 1 + (s-1)/2 blocks, at least 1
        assert!(st.n_lu_factorizations >= st.n_jac_evals);
    }
}

fn dissipative_jacobian(n: usize, off: &[f64], diag: &[f64]) -> Matrix<f64> {
    let mut j = Matrix::from_fn(n, n, |i, k| if i == k { 0.0 } else { off[i * 4 + k] });
    for i in 0..n {
        let row: f64 = (0..n).filter(|&k| k != i).map(|k| j[(i, k)].abs()).sum();
        j[(i, i)] = -(row + diag[i]);
    }
    j
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn block_solve_matches_dense_oracle(
        n in 1usize..=4,
        off in prop::collection::vec(-3.0f64..3.0, 16),
        diag in prop::collection::vec(0.1f64..20.0, 4),
        dt in 0.01f64..2.0,
        rhs in prop::collection::vec(-1.0f64..1.0, 12),
        parallel in any::<bool>(),
    ) {
        let m = build_method::<f64>(3, 53).unwrap();
        let jac = dissipative_jacobian(n, &off, &diag);
        let fact = factor_blocks(&m.transform, &jac, &dt, 0, parallel).unwrap();
        let rhs: Vec<Vec<f64>> = (0..3).map(|i| rhs[i * 4..i * 4 + n].to_vec()).collect();
        let got = solve_newton_system(&m, &fact, &rhs, parallel).unwrap();

        let dense = Matrix::from_fn(3 * n, 3 * n, |r, c| {
            let (i, k) = (r / n, r % n);
            let (jj, l) = (c / n, c % n);
            let id = if r == c { 1.0 } else { 0.0 };
            id - dt * m.tableau.a[(i, jj)] * jac[(k, l)]
        });
        let want = lu_solve(&lu_factor(&dense).unwrap(), &rhs.concat()).unwrap();
        let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let diff = got.concat().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e3 * f64::EPSILON * scale, "diff {diff:e} scale {scale:e}");
    }

    #[test]
    fn order_adaptation_is_pure_and_bounded(
        iters in 1usize..30,
        hist in 0.0f64..30.0,
        k in 0usize..6,
    ) {
        let opts = SolverOptions::default();
        let order = 5 + 4 * k;
        let a = adapt_order(iters, hist, order, &opts);
        prop_assert_eq!(a, adapt_order(iters, hist, order, &opts));
        prop_assert!(a.0 >= opts.min_order && a.0 <= opts.max_order);
        prop_assert_eq!(a.0 % 4, 1);
        prop_assert!(a.0.abs_diff(order) <= 4);
        prop_assert!((a.1 - (0.8 * hist + 0.2 * iters as f64)).abs() < 1e-12);
    }

    #[test]
    fn step_ratio_stays_within_clamps(
        err in 0.0f64..1e6,
        stages in prop::sample::select(vec![1usize, 3, 5, 7, 9, 11, 13]),
        prev in prop::option::of((1e-6f64..10.0, 1e-6f64..1.0)),
    ) {
        let opts = SolverOptions::default();
        let r = step_size_update(err, stages, 0.1, prev, &opts);
        prop_assert!(r >= opts.dt_min_factor && r <= opts.dt_max_factor);
        let plain = step_size_update(err, stages, 0.1, None, &opts);
        prop_assert!(r <= plain);
    }
}
