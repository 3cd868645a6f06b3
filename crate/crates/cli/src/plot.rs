//! Log-log work-precision diagrams as standalone SVG.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::sweep::WpRecord;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A labeled curve of `(error, wall time)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// Successful records with positive error and time, sorted by error.
    pub fn from_records(label: &str, records: &[WpRecord]) -> Series {
        let mut points: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.status.is_ok())
            .filter_map(|r| Some((r.error?, r.wall_time_s?)))
            .filter(|&(e, t)| e > 0.0 && t > 0.0 && e.is_finite() && t.is_finite())
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Series { label: label.to_string(), points }
    }
}

fn decades(vals: impl Iterator<Item = f64>) -> (i32, i32) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (lo, hi) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    if lo == hi {
        (lo, hi + 1)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(series: &[Series], title: &str) -> Result<String, CliError> {
    let fewest = series.iter().map(|s| s.points.len()).min().unwrap_or(0);
    if fewest < 2 {
        return Err(CliError::TooFewPoints(fewest));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = decades(all().map(|p| p.0));
    let (y0, y1) = decades(all().map(|p| p.1));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |e: f64| LEFT + (e.log10() - x0 as f64) / (x1 - x0) as f64 * pw;
    let sy = |t: f64| TOP + ph - (t.log10() - y0 as f64) / (y1 - y0) as f64 * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    for k in x0..=x1 {
        let x = sx(10f64.powi(k));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#, TOP + ph + 16.0);
    }
    for k in y0..=y1 {
        let y = sy(10f64.powi(k));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">error</text>"#, LEFT + pw / 2.0, H - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">wall time (s)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(e, t)| format!("{:.2},{:.2}", sx(e), sy(t))).collect();
        let _ = writeln!(s, r#"<g class="series" data-label="{}">"#, escape(&ser.label));
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        for &(e, t) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, sx(e), sy(t));
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(series: &[Series], title: &str, path: &Path) -> Result<(), CliError> {
    let svg = render_svg(series, title)?;
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, n: usize) -> Series {
        Series { label: label.into(), points: (0..n).map(|k| (10f64.powi(-(k as i32) - 2), 1e-3 * (k + 1) as f64)).collect() }
    }

    #[test]
    fn one_curve_one_marker_per_point() {
        let svg = render_svg(&[series("adaptive", 6)], "hires").unwrap();
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn overlays_are_labeled() {
        let svg = render_svg(&[series("adaptive", 6), series("order 5", 6)], "hires").unwrap();
        assert_eq!(svg.matches(r#"class="series""#).count(), 2);
        assert!(svg.contains(">order 5</text>"));
    }

    #[test]
    fn single_point_is_rejected() {
        assert!(matches!(render_svg(&[series("a", 1)], "t"), Err(CliError::TooFewPoints(1))));
        assert!(matches!(render_svg(&[], "t"), Err(CliError::TooFewPoints(0))));
    }

    #[test]
    fn points_stay_inside_the_frame() {
        let svg = render_svg(&[series("a", 4)], "t").unwrap();
        for c in svg.split("<circle").skip(1) {
            let grab = |k: &str| -> f64 {
                let i = c.find(k).unwrap() + k.len() + 2;
                c[i..].split('"').next().unwrap().parse().unwrap()
            };
            let (x, y) = (grab("cx"), grab("cy"));
            assert!((LEFT..=W - RIGHT).contains(&x) && (TOP..=H - BOTTOM).contains(&y), "{x} {y}");
        }
    }
}
