use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radau_cli::export::export_tableau;
use radau_cli::plot::{emit_plot, Series};
use radau_cli::sweep::{run_sweep, OrderSummary, SweepSpec, ORDERS};
use radau_cli::{cache_dir, emit_csv, parse_exponents, read_csv, CliError};
use radau_core::{get_problem, solve, MpFloat, Real, SolverOptions};

#[derive(Parser)]
#[command(name = "radau", version, about = "Adaptive-order Radau IIA solver and work-precision benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a tolerance sweep against a cached reference solution.
    Bench(BenchArgs),
    /// Print the tableau and transform for a stage count.
    Tableau {
        #[arg(long)]
        stages: usize,
        #[arg(long, default_value_t = 53)]
        precision: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one problem and print the final state and counters.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        rtol: f64,
        #[arg(long)]
        atol: f64,
        #[arg(long, default_value_t = 53)]
        precision: u32,
        #[arg(long)]
        min_order: Option<usize>,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        fixed_order: Option<usize>,
        #[arg(long)]
        parallel_blocks: bool,
    },
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    problem: String,
    /// rtol exponents, e.g. `-5..-12` or `-5,-7`; defaults to the problem's protocol.
    #[arg(long, allow_hyphen_values = true)]
    rtol_exps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    atol_offset: Option<i32>,
    #[arg(long)]
    ref_tol: Option<f64>,
    #[arg(long, default_value_t = 53)]
    precision: u32,
    #[arg(long, default_value_t = 5)]
    min_order: usize,
    #[arg(long, default_value_t = 25)]
    max_order: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Extra CSV files drawn as additional curves on the plot.
    #[arg(long)]
    overlay: Vec<PathBuf>,
    #[arg(long)]
    parallel_blocks: bool,
    /// Run tolerance points concurrently (timings become non-authoritative).
    #[arg(long)]
    parallel_sweep: bool,
    #[arg(long)]
    fixed_order: Option<usize>,
    /// Accepted-step budget per solve.
    #[arg(long)]
    max_steps: Option<usize>,
}

fn bench(a: BenchArgs) -> Result<ExitCode, CliError> {
    let mut spec = SweepSpec::from_protocol(&a.problem)?;
    if let Some(r) = &a.rtol_exps {
        spec.rtol_exponents = parse_exponents(r)?;
    }
    spec.atol_offset = a.atol_offset.unwrap_or(spec.atol_offset);
    spec.ref_tol = a.ref_tol.unwrap_or(spec.ref_tol);
    spec.precision_bits = a.precision;
    spec.min_order = a.min_order;
    spec.max_order = a.max_order;
    spec.fixed_order = a.fixed_order;
    spec.repetitions = a.reps;
    spec.parallel_blocks = a.parallel_blocks;
    spec.parallel_points = a.parallel_sweep;
    spec.max_steps = a.max_steps.unwrap_or(spec.max_steps);
    spec.validate()?;
    let overlays = a.overlay.iter().map(|p| read_csv(p).map(|r| (p, r))).collect::<Result<Vec<_>, _>>()?;

    let records = run_sweep(&spec, &cache_dir())?;
    emit_csv(&records, &a.out)?;
    for r in &records {
        match (&r.status, r.error, r.wall_time_s) {
            (s, Some(e), Some(t)) if s.is_ok() => println!(
                "rtol {:e} atol {:e}  error {e:.3e}  time {t:.3e}s  steps {}  f {}  orders {}..{}",
                r.rtol, r.atol, r.stats.n_steps, r.stats.n_f_evals, r.orders.min, r.orders.max
            ),
            (s, ..) => println!("rtol {:e} atol {:e}  failed: {s:?}", r.rtol, r.atol),
        }
    }
    if let Some(path) = &a.plot {
        let label = match spec.fixed_order {
            Some(k) => format!("order {k}"),
            None => format!("adaptive {}..{}", spec.min_order, spec.max_order),
        };
        let mut series = vec![Series::from_records(&label, &records)];
        for (p, recs) in &overlays {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            series.push(Series::from_records(&name, recs));
        }
        emit_plot(&series, &spec.problem, path)?;
    }
    let failed = records.iter().filter(|r| !r.status.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} tolerance points failed", records.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_typed<T: Real>(problem: &str, opts: &SolverOptions, prec: u32) -> Result<(), CliError> {
    let np = get_problem::<T>(problem, prec)?;
    let sol = solve(&np.problem, opts).map_err(|source| CliError::Solver { problem: np.name.into(), source })?;
    println!("problem {}  t = {}", np.name, sol.final_time().to_round_trip_string());
    for (i, y) in sol.final_state().iter().enumerate() {
        println!("y[{i}] = {}", y.to_round_trip_string());
    }
    let s = &sol.stats;
    println!(
        "steps {}  rejected {}  f evals {}  jac evals {}  lu {}  newton iters {}",
        s.n_steps, s.n_rejected, s.n_f_evals, s.n_jac_evals, s.n_lu_factorizations, s.n_newton_iters
    );
    let o = OrderSummary::of(&sol);
    println!("orders {}..{} (mode {})", o.min, o.max, o.mode);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Bench(a) => bench(a),
        Cmd::Tableau { stages, precision, out } => {
            if stages % 2 == 0 || stages == 0 {
                return Err(CliError::Config(format!("stage count must be odd and positive, got {stages}")));
            }
            if precision < 53 {
                return Err(CliError::Config(format!("precision must be at least 53 bits, got {precision}")));
            }
            let text = export_tableau(stages, precision)?;
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve { problem, rtol, atol, precision, min_order, max_order, fixed_order, parallel_blocks } => {
            let mut opts = SolverOptions::with_tolerances(rtol, atol);
            opts = match fixed_order {
                Some(k) => opts.fixed_order(k),
                None => {
                    let (lo, hi) = (min_order.unwrap_or(opts.min_order), max_order.unwrap_or(opts.max_order));
                    opts.order_range(lo, hi)
                }
            };
            opts.parallel_blocks = parallel_blocks;
            let dim = get_problem::<f64>(&problem, 53)?.problem.dim();
            if let Some(k) = [opts.min_order, opts.max_order].into_iter().find(|k| !ORDERS.contains(k)) {
                return Err(CliError::Config(format!("order {k} is not one of {ORDERS:?}")));
            }
            opts.validate(dim).map_err(|e| CliError::Config(e.to_string()))?;
            if precision < 53 {
                return Err(CliError::Config(format!("precision must be at least 53 bits, got {precision}")));
            }
            if precision == 53 {
                solve_typed::<f64>(&problem, &opts, 53)?;
            } else {
                solve_typed::<MpFloat>(&problem, &opts, precision)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
