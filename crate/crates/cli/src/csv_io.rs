//! Work-precision records as CSV.

use std::path::Path;

use radau_core::StepStats;

use crate::error::CliError;
use crate::sweep::{OrderSummary, RecordStatus, WpRecord};

pub const HEADER: [&str; 14] = [
    "problem",
    "rtol",
    "atol",
    "error",
    "wall_time_s",
    "n_steps",
    "n_rejected",
    "n_f_evals",
    "n_jac_evals",
    "n_lu",
    "order_min",
    "order_max",
    "order_mode",
    "status",
];

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn row(r: &WpRecord) -> Vec<String> {
    let s = &r.stats;
    let ok = r.status.is_ok();
    let order = |v: usize| if ok { v.to_string() } else { String::new() };
    vec![
        r.problem.clone(),
        format!("{:e}", r.rtol),
        format!("{:e}", r.atol),
        num(r.error),
        num(r.wall_time_s),
        s.n_steps.to_string(),
        s.n_rejected.to_string(),
        s.n_f_evals.to_string(),
        s.n_jac_evals.to_string(),
        s.n_lu_factorizations.to_string(),
        order(r.orders.min),
        order(r.orders.max),
        order(r.orders.mode),
        r.status.label().to_string(),
    ]
}

pub fn write_csv<W: std::io::Write>(records: &[WpRecord], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in records {
        out.write_record(row(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[WpRecord], path: &Path) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(CliError::Config("no records to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(records, file).map_err(|e| CliError::io(path, e.into()))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<WpRecord>, CliError> {
    let bad = |msg: String| CliError::Parse { path: path.to_path_buf(), msg };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(bad("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let at = |i: usize| format!("row {} column {}", line + 2, HEADER[i]);
        let f = |i: usize| field(i).parse::<f64>().map_err(|_| bad(at(i)));
        let opt = |i: usize| if field(i).is_empty() { Ok(None) } else { f(i).map(Some) };
        let u = |i: usize| field(i).parse::<usize>().map_err(|_| bad(at(i)));
        let ou = |i: usize| if field(i).is_empty() { Ok(0) } else { u(i) };
        let status = match field(13) {
            "ok" => RecordStatus::Ok,
            "ok_untimed" => RecordStatus::OkUntimed,
            "failed" => RecordStatus::Failed(String::new()),
            _ => return Err(bad(at(13))),
        };
        out.push(WpRecord {
            problem: field(0).to_string(),
            rtol: f(1)?,
            atol: f(2)?,
            error: opt(3)?,
            controller_error: None,
            wall_time_s: opt(4)?,
            stats: StepStats {
                n_steps: u(5)?,
                n_rejected: u(6)?,
                n_f_evals: u(7)?,
                n_jac_evals: u(8)?,
                n_lu_factorizations: u(9)?,
                n_newton_iters: 0,
            },
            orders: OrderSummary { min: ou(10)?, max: ou(11)?, mode: ou(12)? },
            status,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<WpRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text, path)
}
