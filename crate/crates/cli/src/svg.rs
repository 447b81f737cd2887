//! Standalone SVG scatter plots with an optional fitted line.

use std::fmt::Write as _;

use muck_core::experiments::RateFit;
use muck_core::table::CsvTable;

use crate::error::{CliError, Result};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 64.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: &[f64], log: bool) -> Self {
        let t: Vec<f64> = values.iter().map(|&v| if log { v.log10() } else { v }).collect();
        let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // a degenerate range still needs a width
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Axis { lo: lo - pad, hi: hi + pad, log }
    }

    /// Fraction of the axis covered up to `v`.
    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }
}

fn column(table: &CsvTable, name: &str) -> Result<Vec<f64>> {
    table.column_f64(name).map_err(|e| CliError::Plot(e.to_string()))
}

/// Scatter of `y_col` against `x_col`, one `<circle>` per row; `fit` adds a
/// single `<line>` across the data range.
pub fn emit_svg_plot(
    table: &CsvTable,
    x_col: &str,
    y_col: &str,
    log_log: bool,
    fit: Option<&RateFit>,
) -> Result<String> {
    let xs = column(table, x_col)?;
    let ys = column(table, y_col)?;
    if xs.is_empty() {
        return Err(CliError::Plot("table has no rows".into()));
    }
    for (name, vals) in [(x_col, &xs), (y_col, &ys)] {
        if let Some(v) = vals.iter().find(|v| !v.is_finite() || (log_log && **v <= 0.0)) {
            let why = if log_log { "non-positive or non-finite" } else { "non-finite" };
            return Err(CliError::Plot(format!("column `{name}` has {why} value {v} on a log-log plot")));
        }
    }
    let mut y_range = ys.clone();
    let (x0, x1) = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if let Some(f) = fit {
        y_range.extend([f.predict(x0), f.predict(x1)].iter().filter(|v| v.is_finite() && **v > 0.0));
    }
    let ax = Axis::new(&xs, log_log);
    let ay = Axis::new(&y_range, log_log);
    let px = |x: f64| MARGIN + ax.frac(x) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - ay.frac(y) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
    let scale = if log_log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{x_col}{scale}</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 {})">{y_col}{scale}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{x:.3e}</text>"#,
            px(x),
            b + 16.0
        );
    }
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(*x), py(*y));
    }
    if let Some(f) = fit {
        let (y0, y1) = (f.predict(x0), f.predict(x1));
        if !(y0 > 0.0 && y1 > 0.0 && y0.is_finite() && y1.is_finite()) {
            return Err(CliError::Plot("fit line leaves the positive range".into()));
        }
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" data-slope="{}" data-intercept="{}" data-r2="{}"/>"#,
            px(x0),
            py(y0),
            px(x1),
            py(y1),
            f.slope,
            f.intercept,
            f.r_squared
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="12">slope {:.4}, r2 {:.4}</text>"#,
            r,
            t - 8.0,
            f.slope,
            f.r_squared
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
