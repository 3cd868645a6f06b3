//! Work-precision benchmarking for the Radau IIA solver: tolerance sweeps
//! against cached tight-tolerance references, CSV records, SVG diagrams and
//! tableau export.

pub mod csv_io;
pub mod error;
pub mod export;
pub mod plot;
pub mod reference;
pub mod sweep;

pub use csv_io::{emit_csv, parse_csv, read_csv};
pub use error::CliError;
pub use plot::{emit_plot, Series};
pub use reference::{cache_dir, compute_reference, Reference};
pub use sweep::{run_sweep, SweepSpec, WpRecord};

/// Parses `"-5..-12"` (inclusive, either direction) or `"-5,-7,-9"`.
pub fn parse_exponents(s: &str) -> Result<Vec<i32>, CliError> {
    let bad = || CliError::Config(format!("bad exponent range `{s}`"));
    let int = |v: &str| v.trim().parse::<i32>().map_err(|_| bad());
    let out: Vec<i32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (int(a)?, int(b)?);
        if a >= b {
            (b..=a).rev().collect()
        } else {
            (a..=b).collect()
        }
    } else {
        s.split(',').map(int).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}
