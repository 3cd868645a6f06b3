//! Plain-text export of a tableau and its spectral transform.

use std::fmt::Write as _;

use radau_core::tableau::build_method;
use radau_core::{Matrix, MpFloat, RadauMethod, Real};

use crate::error::CliError;

fn vector<T: Real>(out: &mut String, label: &str, v: &[T]) {
    let _ = writeln!(out, "[{label}]");
    for x in v {
        let _ = writeln!(out, "{}", x.to_round_trip_string());
    }
}

fn matrix<T: Real>(out: &mut String, label: &str, m: &Matrix<T>) {
    let _ = writeln!(out, "[{label}]");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_round_trip_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn render_method<T: Real>(m: &RadauMethod<T>) -> String {
    let tab = &m.tableau;
    let tr = &m.transform;
    let mut out = String::new();
    let _ = writeln!(out, "# radau-iia s={} prec={}", tab.stages, tab.precision_bits);
    vector(&mut out, "c", &tab.c);
    matrix(&mut out, "a", &tab.a);
    vector(&mut out, "b", &tab.b);
    vector(&mut out, "b_tilde", &tab.b_tilde);
    vector(&mut out, "b_tilde_0", std::slice::from_ref(&tab.b_tilde_0));
    vector(&mut out, "gamma", std::slice::from_ref(&tr.gamma));
    let _ = writeln!(out, "[alpha_beta]");
    for (a, b) in &tr.pairs {
        let _ = writeln!(out, "{} {}", a.to_round_trip_string(), b.to_round_trip_string());
    }
    matrix(&mut out, "T", &tr.t);
    matrix(&mut out, "T_inv", &tr.t_inv);
    out
}

pub fn export_tableau(stages: usize, precision_bits: u32) -> Result<String, CliError> {
    Ok(if precision_bits == 53 {
        render_method(&build_method::<f64>(stages, 53)?)
    } else {
        render_method(&build_method::<MpFloat>(stages, precision_bits)?)
    })
}

/// Labeled sections of an exported tableau, each a list of rows.
pub fn parse_sections(text: &str) -> Vec<(String, Vec<Vec<String>>)> {
    let mut out: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        if let Some(label) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push((label.to_string(), Vec::new()));
        } else if let Some(last) = out.last_mut() {
            last.1.push(line.split_whitespace().map(str::to_string).collect());
        }
    }
    out
}
