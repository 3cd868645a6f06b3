//! Tight-tolerance reference solutions, cached on disk as decimal text.
//!
//! A cache file holds a header line with the problem, tolerance and
//! precision, the solver counters, every accepted time, and the final state.
//! Values are written with enough digits to read back bit-exactly at the
//! stored precision.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use radau_core::{get_problem, solve, Real, SolverOptions, StepStats};

use crate::error::CliError;

pub const CACHE_ENV: &str = "RADAU_CACHE_DIR";

#[derive(Clone, Debug, PartialEq)]
pub struct Reference<T> {
    pub problem: String,
    pub ref_tol: f64,
    pub precision_bits: u32,
    pub ts: Vec<T>,
    pub y_final: Vec<T>,
    pub stats: StepStats,
}

/// `$RADAU_CACHE_DIR`, else `<platform cache dir>/radau`, else a directory
/// under the system temp dir.
pub fn cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => dirs::cache_dir().unwrap_or_else(std::env::temp_dir).join("radau"),
    }
}

pub fn cache_file(dir: &Path, problem: &str, ref_tol: f64, precision_bits: u32) -> PathBuf {
    dir.join(format!("{problem}_tol{ref_tol:e}_p{precision_bits}.ref"))
}

pub fn serialize<T: Real>(r: &Reference<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# radau-reference problem={} ref_tol={:e} prec={}",
        r.problem, r.ref_tol, r.precision_bits
    );
    let s = &r.stats;
    let _ = writeln!(
        out,
        "stats {} {} {} {} {} {}",
        s.n_steps, s.n_rejected, s.n_f_evals, s.n_jac_evals, s.n_lu_factorizations, s.n_newton_iters
    );
    let _ = writeln!(out, "ts {}", r.ts.len());
    for t in &r.ts {
        let _ = writeln!(out, "{}", t.to_round_trip_string());
    }
    let _ = writeln!(out, "y {}", r.y_final.len());
    for y in &r.y_final {
        let _ = writeln!(out, "{}", y.to_round_trip_string());
    }
    out
}

pub fn deserialize<T: Real>(text: &str, path: &Path) -> Result<Reference<T>, CliError> {
    let bad = |msg: &str| CliError::Parse { path: path.to_path_buf(), msg: msg.to_string() };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let fields = header
        .strip_prefix("# radau-reference ")
        .ok_or_else(|| bad("missing reference header"))?;
    let mut problem = None;
    let mut ref_tol = None;
    let mut prec = None;
    for kv in fields.split_whitespace() {
        match kv.split_once('=') {
            Some(("problem", v)) => problem = Some(v.to_string()),
            Some(("ref_tol", v)) => ref_tol = v.parse::<f64>().ok(),
            Some(("prec", v)) => prec = v.parse::<u32>().ok(),
            _ => return Err(bad("unknown header field")),
        }
    }
    let (problem, ref_tol, prec) = match (problem, ref_tol, prec) {
        (Some(p), Some(r), Some(b)) => (p, r, b),
        _ => return Err(bad("incomplete header")),
    };

    let counts: Vec<usize> = lines
        .next()
        .and_then(|l| l.strip_prefix("stats "))
        .ok_or_else(|| bad("missing stats line"))?
        .split_whitespace()
        .map(|v| v.parse().map_err(|_| bad("bad counter")))
        .collect::<Result<_, _>>()?;
    if counts.len() != 6 {
        return Err(bad("expected 6 counters"));
    }
    let stats = StepStats {
        n_steps: counts[0],
        n_rejected: counts[1],
        n_f_evals: counts[2],
        n_jac_evals: counts[3],
        n_lu_factorizations: counts[4],
        n_newton_iters: counts[5],
    };

    let mut block = |label: &str| -> Result<Vec<T>, CliError> {
        let n: usize = lines
            .next()
            .and_then(|l| l.strip_prefix(label))
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| bad(&format!("missing `{label}` block")))?;
        (0..n)
            .map(|_| {
                lines
                    .next()
                    .and_then(|l| T::parse(l, prec))
                    .ok_or_else(|| bad(&format!("bad value in `{label}` block")))
            })
            .collect()
    };
    let ts = block("ts ")?;
    let y_final = block("y ")?;
    Ok(Reference { problem, ref_tol, precision_bits: prec, ts, y_final, stats })
}

/// Solves `problem` at `rtol = atol = ref_tol`.
pub fn solve_reference<T: Real>(problem: &str, ref_tol: f64, precision_bits: u32) -> Result<Reference<T>, CliError> {
    let np = get_problem::<T>(problem, precision_bits)?;
    let sol = solve(&np.problem, &SolverOptions::with_tolerances(ref_tol, ref_tol))
        .map_err(|source| CliError::Solver { problem: format!("{problem} reference"), source })?;
    Ok(Reference {
        problem: np.name.to_string(),
        ref_tol,
        precision_bits,
        y_final: sol.final_state().to_vec(),
        ts: sol.ts,
        stats: sol.stats,
    })
}

/// Whether the last [`compute_reference`] call was served from disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
}

/// Loads the reference from `dir` or solves and stores it there.
///
/// An unreadable or mismatched cache file is treated as a miss and
/// overwritten.
pub fn compute_reference<T: Real>(
    dir: &Path,
    problem: &str,
    ref_tol: f64,
    precision_bits: u32,
) -> Result<(Reference<T>, CacheOutcome), CliError> {
    let canonical = get_problem::<f64>(problem, 53)?.name;
    let path = cache_file(dir, canonical, ref_tol, precision_bits);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(r) = deserialize::<T>(&text, &path) {
            if r.problem == canonical && r.ref_tol == ref_tol && r.precision_bits == precision_bits {
                return Ok((r, CacheOutcome::Hit));
            }
        }
    }
    let r = solve_reference::<T>(canonical, ref_tol, precision_bits)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    // write-then-rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, serialize(&r)).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok((r, CacheOutcome::Miss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use radau_core::MpFloat;

    fn sample<T: Real>(prec: u32) -> Reference<T> {
        let third = T::one(prec) / T::from_i64(3, prec);
        Reference {
            problem: "robertson".into(),
            ref_tol: 1e-14,
            precision_bits: prec,
            ts: vec![T::zero(prec), third.clone(), T::from_f64(1e5, prec)],
            y_final: vec![third.clone(), third.sqrt(), -third.exp() * T::from_f64(1e-300, prec)],
            stats: StepStats { n_steps: 2, n_rejected: 1, n_f_evals: 9, n_jac_evals: 1, n_lu_factorizations: 2, n_newton_iters: 4 },
        }
    }

    #[test]
    fn double_round_trip_is_exact() {
        let r = sample::<f64>(53);
        let back = deserialize::<f64>(&serialize(&r), Path::new("x")).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn extended_round_trip_is_exact() {
        let r = sample::<MpFloat>(256);
        let back = deserialize::<MpFloat>(&serialize(&r), Path::new("x")).unwrap();
        assert_eq!(back, r);
        assert!(back.ts.iter().all(|t| t.precision() == 256));
    }

    #[test]
    fn header_is_required() {
        let text = serialize(&sample::<f64>(53));
        let err = deserialize::<f64>(&text.replacen("# radau-reference", "#", 1), Path::new("x"));
        assert!(matches!(err, Err(CliError::Parse { .. })));
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(deserialize::<f64>(&cut, Path::new("x")).is_err());
    }

    #[test]
    fn cache_key_separates_precision_and_tolerance() {
        let d = Path::new("/c");
        let a = cache_file(d, "hires", 1e-14, 53);
        assert_ne!(a, cache_file(d, "hires", 1e-14, 256));
        assert_ne!(a, cache_file(d, "hires", 1e-20, 53));
        assert_ne!(a, cache_file(d, "robertson", 1e-14, 53));
    }
}
