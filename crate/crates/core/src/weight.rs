//! Weights on a dyadic grid and the algebraic maps between them.
//!
//! A weight class modulo positive constants is represented by its
//! geometric-mean-one member; [`Weight::normalized`] produces it.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{param, Error, Result};
use crate::grid::{Grid, GridFunction, Interval};
use crate::BmoFunction;

/// Largest `|exponent|` accepted before `exp` is evaluated.
pub const EXP_GUARD: f64 = 700.0;

/// Strictly positive cell-wise function.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    grid: Grid,
    values: Vec<f64>,
    normalized: bool,
}

impl Weight {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return param(format!("expected {} weight values, got {}", grid.cells(), values.len()));
        }
        if let Some(j) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return param(format!("weight value at cell {j} is not finite and positive: {}", values[j]));
        }
        Ok(Weight { grid, values, normalized: false })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cells()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.midpoints().into_iter().map(f).collect())
    }

    /// `exp(f)` cell-wise, with the overflow guard.
    pub fn exp_of(f: &GridFunction) -> Result<Self> {
        if let Some(j) = f.values().iter().position(|v| v.abs() > EXP_GUARD) {
            return Err(Error::Range(format!(
                "exponent {} at cell {j} exceeds the guard {EXP_GUARD}",
                f.values()[j]
            )));
        }
        Self::new(f.grid(), f.values().iter().map(|v| v.exp()).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn log(&self) -> BmoFunction {
        GridFunction::new(self.grid, self.values.iter().map(|v| v.ln()).collect())
            .expect("log of a positive finite weight is finite")
    }

    pub fn as_function(&self) -> GridFunction {
        GridFunction::new(self.grid, self.values.clone()).expect("weight values are finite")
    }

    /// `exp` of the mean of `log w` over `[0,1)`.
    pub fn geometric_mean(&self) -> f64 {
        self.log().average(&Interval::ROOT).expect("root interval").exp()
    }

    /// `c * w`. The result is not flagged as normalized.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    /// The geometric-mean-one representative of the class of `w`.
    pub fn normalized(&self) -> Self {
        let log = self.log();
        let mean = log.average(&Interval::ROOT).expect("root interval");
        let values = log.values().iter().map(|l| (l - mean).exp()).collect();
        Weight { grid: self.grid, values, normalized: true }
    }

    fn same_grid(&self, other: &Weight) -> Result<()> {
        if self.grid != other.grid {
            return param(format!(
                "weights live on different grids ({} vs {} levels)",
                self.grid.levels(),
                other.grid.levels()
            ));
        }
        Ok(())
    }

    /// Cell-wise product `w * v`.
    pub fn product(&self, other: &Weight) -> Result<Self> {
        self.same_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// Cell-wise quotient `w / v`.
    pub fn ratio(&self, other: &Weight) -> Result<Self> {
        self.same_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(a, b)| a / b).collect())
    }

    pub fn powf(&self, e: f64) -> Result<Self> {
        Self::exp_of(&self.log().map(|l| e * l)?)
    }

    /// Text form: header `muckweight v1 levels=N normalized=0|1`, then one
    /// value per line at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "muckweight v1 levels={} normalized={}\n",
            self.grid.levels(),
            u8::from(self.normalized)
        );
        for v in &self.values {
            let _ = writeln!(s, "{v:.16e}");
        }
        s
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty weight file".into()))??;
        let (levels, normalized) = parse_header(&header)?;
        let grid = Grid::new(levels)?;
        let mut values = Vec::with_capacity(grid.cells());
        for (k, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Format(format!("line {}: not a number: {t:?}", k + 2)))?;
            values.push(v);
        }
        let mut w = Weight::new(grid, values).map_err(|e| Error::Format(e.to_string()))?;
        w.normalized = normalized;
        Ok(w)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }
}

fn parse_header(header: &str) -> Result<(u32, bool)> {
    let bad = || Error::Format(format!("bad weight header: {header:?}"));
    let mut parts = header.split_whitespace();
    if parts.next() != Some("muckweight") || parts.next() != Some("v1") {
        return Err(bad());
    }
    let levels = parts
        .next()
        .and_then(|p| p.strip_prefix("levels="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad)?;
    let normalized = match parts.next().and_then(|p| p.strip_prefix("normalized=")) {
        Some("0") => false,
        Some("1") => true,
        _ => return Err(bad()),
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((levels, normalized))
}

/// Exact mean of `x^alpha` over `[a, b)`, stable when `b - a << a`.
fn power_cell_mean(alpha: f64, a: f64, b: f64) -> f64 {
    let e = alpha + 1.0;
    if a == 0.0 {
        return b.powf(alpha) / e;
    }
    let r = (b - a) / a;
    // ((b/a)^e - 1) / (e (b/a - 1)) * a^alpha
    a.powf(alpha) * (e * r.ln_1p()).exp_m1() / (e * r)
}

/// Exact mean of `ln x` over `[a, b)`.
pub(crate) fn log_cell_mean(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return b.ln() - 1.0;
    }
    let h = b - a;
    a.ln() + (b / h) * (h / a).ln_1p() - 1.0
}

/// The power weight `|x|^alpha`: each cell holds the exact mean of `x^alpha`
/// over the cell, then the result is normalized.
pub fn power_weight(alpha: f64, grid: Grid) -> Result<Weight> {
    Ok(power_weight_raw(alpha, grid)?.normalized())
}

/// Cell means of `x^alpha` before normalization.
pub fn power_weight_raw(alpha: f64, grid: Grid) -> Result<Weight> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return param(format!("power weight exponent must exceed -1 (integrability at 0), got {alpha}"));
    }
    let values = (0..grid.cells())
        .map(|j| {
            let (a, b) = grid.cell_bounds(j);
            power_cell_mean(alpha, a, b)
        })
        .collect();
    Weight::new(grid, values)
}

/// Cell means of `ln x`, the discretised logarithm of the power density.
pub fn log_power_density(grid: Grid) -> BmoFunction {
    let values = (0..grid.cells())
        .map(|j| {
            let (a, b) = grid.cell_bounds(j);
            log_cell_mean(a, b)
        })
        .collect();
    GridFunction::new(grid, values).expect("finite cell means")
}

/// `exp(lambda f)`, normalized.
pub fn exp_weight(f: &BmoFunction, lambda: f64) -> Result<Weight> {
    Ok(Weight::exp_of(&f.map(|v| lambda * v)?)?.normalized())
}

/// `u^t v^(1-t)`, normalized.
pub fn holder_interpolant(u: &Weight, v: &Weight, t: f64) -> Result<Weight> {
    u.same_grid(v)?;
    if !(0.0..=1.0).contains(&t) {
        return param(format!("interpolation parameter must lie in [0,1], got {t}"));
    }
    let log = u.log().zip_with(&v.log(), |a, b| t * a + (1.0 - t) * b)?;
    Ok(Weight::exp_of(&log)?.normalized())
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return param(format!("exponent must satisfy 1 < p < inf, got {p}"));
    }
    Ok(p / (p - 1.0))
}

/// `w^(1-p')`, normalized.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    let q = conjugate(p)?;
    Ok(w.powf(1.0 - q)?.normalized())
}

/// `c w` with `c` chosen so that the mean of `c w / w0` over `interval` is 1.
pub fn normalize_mean_ratio(w: &Weight, w0: &Weight, interval: &Interval) -> Result<Weight> {
    let mean = w.ratio(w0)?.as_function().average(interval)?;
    w.scaled(1.0 / mean)
}
