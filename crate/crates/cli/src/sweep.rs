//! Tolerance sweeps producing work-precision records.

use std::path::Path;
use std::time::Instant;

use radau_core::{get_problem, solve, MpFloat, Real, Solution, SolverOptions, StepStats};
use rayon::prelude::*;

use crate::error::CliError;
use crate::reference::{compute_reference, Reference};

/// Orders available to the solver.
pub const ORDERS: [usize; 6] = [5, 9, 13, 17, 21, 25];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub problem: String,
    /// `rtol = 10^e` for each entry, in the order given.
    pub rtol_exponents: Vec<i32>,
    /// `atol = 10^(e + atol_offset)`.
    pub atol_offset: i32,
    pub ref_tol: f64,
    pub precision_bits: u32,
    pub min_order: usize,
    pub max_order: usize,
    pub fixed_order: Option<usize>,
    /// Timed runs per point, after one untimed warmup.
    pub repetitions: usize,
    pub parallel_blocks: bool,
    /// Run tolerance points concurrently. Timings are then contended and
    /// the records are marked accordingly.
    pub parallel_points: bool,
    /// Accepted-step budget per solve.
    pub max_steps: usize,
}

impl SweepSpec {
    /// The tolerance protocol of a registered problem at double precision.
    pub fn from_protocol(problem: &str) -> Result<SweepSpec, CliError> {
        let np = get_problem::<f64>(problem, 53)?;
        let p = np.protocol;
        Ok(SweepSpec {
            problem: np.name.to_string(),
            rtol_exponents: p.rtol_exponents(),
            atol_offset: p.atol_offset,
            ref_tol: p.ref_tol,
            precision_bits: 53,
            min_order: 5,
            max_order: 25,
            fixed_order: None,
            repetitions: 3,
            parallel_blocks: false,
            parallel_points: false,
            max_steps: SolverOptions::default().max_steps,
        })
    }

    pub fn tolerances(&self) -> Vec<(f64, f64)> {
        self.rtol_exponents
            .iter()
            .map(|&e| (pow10(e), pow10(e + self.atol_offset)))
            .collect()
    }

    pub fn solver_options(&self, rtol: f64, atol: f64) -> SolverOptions {
        let mut o = SolverOptions::with_tolerances(rtol, atol);
        o = match self.fixed_order {
            Some(k) => o.fixed_order(k),
            None => o.order_range(self.min_order, self.max_order),
        };
        o.parallel_blocks = self.parallel_blocks;
        o.max_steps = self.max_steps;
        o
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        get_problem::<f64>(&self.problem, 53)?;
        if self.rtol_exponents.is_empty() {
            return bad("empty tolerance range".into());
        }
        if let Some(e) = self.rtol_exponents.iter().find(|&&e| e >= 0) {
            return bad(format!("rtol exponents must be negative, got {e}"));
        }
        if self.precision_bits < 53 {
            return bad(format!("precision must be at least 53 bits, got {}", self.precision_bits));
        }
        if !(self.ref_tol > 0.0) {
            return bad(format!("reference tolerance must be positive, got {}", self.ref_tol));
        }
        if let Some(&(rtol, _)) = self.tolerances().iter().find(|(r, _)| *r <= self.ref_tol) {
            return bad(format!("reference tolerance {:e} is not tighter than sweep rtol {rtol:e}", self.ref_tol));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        let orders = match self.fixed_order {
            Some(k) => vec![k],
            None => vec![self.min_order, self.max_order],
        };
        if let Some(k) = orders.iter().find(|k| !ORDERS.contains(k)) {
            return bad(format!("order {k} is not one of {ORDERS:?}"));
        }
        if self.fixed_order.is_none() && self.min_order > self.max_order {
            return bad(format!("min order {} exceeds max order {}", self.min_order, self.max_order));
        }
        Ok(())
    }
}

fn pow10(e: i32) -> f64 {
    format!("1e{e}").parse().expect("valid literal")
}

#[derive(Clone, Debug, PartialEq)]
pub enum RecordStatus {
    Ok,
    /// Solved, but timed while other points ran concurrently.
    OkUntimed,
    Failed(String),
}

impl RecordStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::OkUntimed => "ok_untimed",
            RecordStatus::Failed(_) => "failed",
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self, RecordStatus::Failed(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct OrderSummary {
    pub min: usize,
    pub max: usize,
    /// Order used by the most accepted steps (the lower one on ties).
    pub mode: usize,
}

impl OrderSummary {
    pub fn of<T: Real>(sol: &Solution<T>) -> OrderSummary {
        let h = sol.order_histogram();
        let mode = h
            .iter()
            .fold((0usize, 0usize), |best, &(p, n)| if n > best.1 { (p, n) } else { best })
            .0;
        OrderSummary { min: sol.min_order().unwrap_or(0), max: sol.max_order().unwrap_or(0), mode }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WpRecord {
    pub problem: String,
    pub rtol: f64,
    pub atol: f64,
    /// Final-state error against the reference, scaled at the reference
    /// tolerance.
    pub error: Option<f64>,
    /// Final-state error in the run's own `rtol`/`atol` norm.
    pub controller_error: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub stats: StepStats,
    pub orders: OrderSummary,
    pub status: RecordStatus,
}

/// `sqrt(mean(((y - y_ref) / (atol + rtol |y_ref|))²))`.
pub fn scaled_error<T: Real>(y: &[T], y_ref: &[T], rtol: f64, atol: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let sum: f64 = y
        .iter()
        .zip(y_ref)
        .map(|(a, r)| {
            let prec = r.precision();
            let d = (a.clone() - r).abs();
            let sc = T::from_f64(atol, prec) + T::from_f64(rtol, prec) * &r.abs();
            (d / &sc).to_f64().powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Spearman rank correlation with average ranks for ties. `None` for fewer
/// than two points or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Rank correlation between rtol and achieved error over successful
/// records.
pub fn tolerance_error_correlation(records: &[WpRecord]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| Some((r.rtol, r.error?)))
        .unzip();
    spearman(&x, &y)
}

fn run_point<T: Real>(
    spec: &SweepSpec,
    problem: &radau_core::OdeProblem<T>,
    reference: &Reference<T>,
    rtol: f64,
    atol: f64,
) -> WpRecord {
    let opts = spec.solver_options(rtol, atol);
    let failed = |msg: String, stats: StepStats| WpRecord {
        problem: spec.problem.clone(),
        rtol,
        atol,
        error: None,
        controller_error: None,
        wall_time_s: None,
        stats,
        orders: OrderSummary::default(),
        status: RecordStatus::Failed(msg),
    };
    let sol = match solve(problem, &opts) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string(), StepStats::default()),
    };
    let mut best = f64::INFINITY;
    for _ in 0..spec.repetitions {
        let start = Instant::now();
        if let Err(e) = solve(problem, &opts) {
            return failed(e.to_string(), sol.stats.clone());
        }
        // keep the time strictly positive on coarse clocks
        best = best.min(start.elapsed().as_secs_f64().max(1e-9));
    }
    let y = sol.final_state();
    WpRecord {
        problem: spec.problem.clone(),
        rtol,
        atol,
        error: Some(scaled_error(y, &reference.y_final, spec.ref_tol, spec.ref_tol)),
        controller_error: Some(scaled_error(y, &reference.y_final, rtol, atol)),
        wall_time_s: Some(best),
        orders: OrderSummary::of(&sol),
        stats: sol.stats,
        status: if spec.parallel_points { RecordStatus::OkUntimed } else { RecordStatus::Ok },
    }
}

fn run_sweep_typed<T: Real>(spec: &SweepSpec, cache: &Path) -> Result<Vec<WpRecord>, CliError> {
    let (reference, _) = compute_reference::<T>(cache, &spec.problem, spec.ref_tol, spec.precision_bits)?;
    let np = get_problem::<T>(&spec.problem, spec.precision_bits)?;
    let tols = spec.tolerances();
    let point = |&(rtol, atol): &(f64, f64)| run_point(spec, &np.problem, &reference, rtol, atol);
    Ok(if spec.parallel_points {
        tols.par_iter().map(point).collect()
    } else {
        tols.iter().map(point).collect()
    })
}

/// Runs every tolerance point of `spec`, computing or loading the reference
/// from `cache`. Point failures become failed records; only configuration
/// errors and a failing reference solve abort the sweep.
pub fn run_sweep(spec: &SweepSpec, cache: &Path) -> Result<Vec<WpRecord>, CliError> {
    spec.validate()?;
    if spec.precision_bits == 53 {
        run_sweep_typed::<f64>(spec, cache)
    } else {
        run_sweep_typed::<MpFloat>(spec, cache)
    }
}
