//! Supremum-type characteristics of weights and BMO functions.
//!
//! Every supremum runs over an interval [`Family`] on the weight's grid. The
//! reported witness is the first interval in canonical order attaining the
//! maximum, so parallel and sequential scans agree bit for bit.

use std::fmt;

use crate::error::{param, Result};
use crate::exec::Exec;
use crate::grid::{Family, Grid, GridFunction, Interval, Pyramid};
use crate::weight::{conjugate, Weight};
use crate::BmoFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharacteristicKind {
    A1,
    Ap(f64),
    AInfinity,
    Bmo,
    Blo,
}

impl fmt::Display for CharacteristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacteristicKind::A1 => f.write_str("A1"),
            CharacteristicKind::Ap(p) => write!(f, "A{p}"),
            CharacteristicKind::AInfinity => f.write_str("Ainf"),
            CharacteristicKind::Bmo => f.write_str("BMO"),
            CharacteristicKind::Blo => f.write_str("BLO"),
        }
    }
}

/// A supremum value together with the interval attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicReport {
    pub kind: CharacteristicKind,
    pub value: f64,
    pub witness: Interval,
    pub family: Family,
}

/// Family and execution policy shared by all characteristic computations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Analyzer {
    pub family: Family,
    pub exec: Exec,
}

impl Analyzer {
    pub fn new(family: Family) -> Self {
        Analyzer { family, exec: Exec::default() }
    }

    pub fn dyadic() -> Self {
        Self::new(Family::Dyadic)
    }

    pub fn shifted() -> Self {
        Self::new(Family::Shifted)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn scan(
        &self,
        grid: &Grid,
        kind: CharacteristicKind,
        f: impl Fn(&Interval) -> f64 + Sync + Send,
    ) -> CharacteristicReport {
        let family = self.family;
        let (i, value) = self
            .exec
            .argmax(family.len(grid), |i| f(&family.get(grid, i)))
            .expect("every family contains the root interval");
        CharacteristicReport { kind, value, witness: family.get(grid, i), family }
    }

    /// `sup_I <w>_I <w^(1-p')>_I^(p-1)`.
    pub fn ap(&self, w: &Weight, p: f64) -> Result<CharacteristicReport> {
        let q = conjugate(p)?;
        let grid = w.grid();
        let sums = Pyramid::sums(grid, w.values());
        let dual: Vec<f64> = w.values().iter().map(|v| v.powf(1.0 - q)).collect();
        let dual_sums = Pyramid::sums(grid, &dual);
        Ok(self.scan(&grid, CharacteristicKind::Ap(p), |iv| {
            sums.mean(iv) * dual_sums.mean(iv).powf(p - 1.0)
        }))
    }

    /// Discrete `A_1` constant `max_x (M w)(x) / w(x)` for the maximal
    /// operator of the family. Equals `max_I <w>_I / min_I w`; the witness is
    /// the deepest interval realising the maximum at the first arg-max cell.
    pub fn a1(&self, w: &Weight) -> CharacteristicReport {
        let grid = w.grid();
        let sums = Pyramid::sums(grid, w.values());
        let mins = Pyramid::minima(grid, w.values());
        let ratio = |iv: &Interval| sums.mean(iv) / mins.min(iv);
        let mut report = self.scan(&grid, CharacteristicKind::A1, ratio);
        let value = report.value;

        let family = self.family;
        let attaining: Vec<Interval> = self
            .exec
            .map(family.len(&grid), |i| {
                let iv = family.get(&grid, i);
                (ratio(&iv) == value).then_some(iv)
            })
            .into_iter()
            .flatten()
            .collect();
        let vals = w.values();
        let first_argmin = |iv: &Interval| {
            let m = mins.min(iv);
            iv.cell_range(&grid).find(|&j| vals[j] == m).expect("minimum is attained")
        };
        let cell = attaining.iter().map(first_argmin).min().expect("maximum is attained");
        let mut best: Option<Interval> = None;
        for iv in &attaining {
            if iv.cell_range(&grid).contains(&cell) && vals[cell] == mins.min(iv) {
                // canonical order already: keep the first among the deepest
                if best.is_none_or(|b| iv.level > b.level) {
                    best = Some(*iv);
                }
            }
        }
        report.witness = best.expect("arg-max cell lies in an attaining interval");
        report
    }

    /// `sup_I <w>_I / exp(<log w>_I)`.
    pub fn ainfty(&self, w: &Weight) -> CharacteristicReport {
        let grid = w.grid();
        let sums = Pyramid::sums(grid, w.values());
        let log = w.log();
        let log_sums = log.table();
        self.scan(&grid, CharacteristicKind::AInfinity, |iv| {
            sums.mean(iv) / log_sums.mean(iv).exp()
        })
    }

    /// `sup_I <|f - <f>_I|>_I`.
    pub fn bmo(&self, f: &BmoFunction) -> CharacteristicReport {
        let grid = f.grid();
        let sums = f.table();
        let vals = f.values();
        self.scan(&grid, CharacteristicKind::Bmo, |iv| mean_oscillation(vals, sums, &grid, iv))
    }

    /// `sup_I (<f>_I - min_I f)`.
    pub fn blo(&self, f: &BmoFunction) -> CharacteristicReport {
        let grid = f.grid();
        let sums = f.table();
        let mins = Pyramid::minima(grid, f.values());
        self.scan(&grid, CharacteristicKind::Blo, |iv| sums.mean(iv) - mins.min(iv))
    }

    /// `d_*(u, v) = ||log u - log v||_*`.
    pub fn d_star(&self, u: &Weight, v: &Weight) -> Result<f64> {
        if u.grid() != v.grid() {
            return param("d_star: weights live on different grids");
        }
        let diff = u.log().zip_with(&v.log(), |a, b| a - b)?;
        Ok(self.bmo(&diff).value)
    }

    /// `log [exp(lambda f)]_{A_2}` computed with log-sum-exp tables, so it
    /// stays finite for any `lambda`.
    pub fn log_a2_of_exp(&self, f: &BmoFunction, lambda: f64) -> f64 {
        let grid = f.grid();
        let plus: Vec<f64> = f.values().iter().map(|v| lambda * v).collect();
        let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
        let lp = Pyramid::log_sum_exp(grid, &plus);
        let lm = Pyramid::log_sum_exp(grid, &minus);
        self.scan(&grid, CharacteristicKind::Ap(2.0), |iv| {
            let log_cells = (iv.cell_range(&grid).len() as f64).ln();
            lp.log_sum(iv) + lm.log_sum(iv) - 2.0 * log_cells
        })
        .value
        .max(0.0)
    }

    /// Characteristic of the given kind for a weight.
    pub fn of_weight(&self, w: &Weight, kind: CharacteristicKind) -> Result<CharacteristicReport> {
        Ok(match kind {
            CharacteristicKind::A1 => self.a1(w),
            CharacteristicKind::Ap(p) => self.ap(w, p)?,
            CharacteristicKind::AInfinity => self.ainfty(w),
            CharacteristicKind::Bmo => self.bmo(&w.log()),
            CharacteristicKind::Blo => self.blo(&w.log()),
        })
    }
}

fn mean_oscillation(vals: &[f64], sums: &Pyramid, grid: &Grid, iv: &Interval) -> f64 {
    let mean = sums.mean(iv);
    let range = iv.cell_range(grid);
    let n = range.len() as f64;
    vals[range].iter().map(|v| (v - mean).abs()).sum::<f64>() / n
}

impl Pyramid {
    /// Tree of `log(sum exp(v))` over each node.
    pub fn log_sum_exp(grid: Grid, values: &[f64]) -> Self {
        Self::build(grid, values, log_add)
    }

    pub fn log_sum(&self, interval: &Interval) -> f64 {
        self.reduce(interval, log_add)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// The value of each characteristic on a single interval, evaluated
/// directly from the cell values (no tables). Used to re-check witnesses.
pub fn evaluate_on(kind: CharacteristicKind, values: &[f64], grid: &Grid, iv: &Interval) -> f64 {
    let cells = &values[iv.cell_range(grid)];
    let n = cells.len() as f64;
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / n;
    match kind {
        CharacteristicKind::Ap(p) => {
            let q = p / (p - 1.0);
            mean(&mut cells.iter().copied()) * mean(&mut cells.iter().map(|v| v.powf(1.0 - q))).powf(p - 1.0)
        }
        CharacteristicKind::A1 => {
            mean(&mut cells.iter().copied()) / cells.iter().copied().fold(f64::INFINITY, f64::min)
        }
        CharacteristicKind::AInfinity => {
            mean(&mut cells.iter().copied()) / mean(&mut cells.iter().map(|v| v.ln())).exp()
        }
        CharacteristicKind::Bmo => {
            let m = mean(&mut cells.iter().copied());
            mean(&mut cells.iter().map(|v| (v - m).abs()))
        }
        CharacteristicKind::Blo => {
            mean(&mut cells.iter().copied()) - cells.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }
}

pub fn ap_characteristic(w: &Weight, p: f64, family: Family) -> Result<CharacteristicReport> {
    Analyzer::new(family).ap(w, p)
}

pub fn a1_characteristic(w: &Weight, family: Family) -> CharacteristicReport {
    Analyzer::new(family).a1(w)
}

pub fn ainfty_characteristic(w: &Weight, family: Family) -> CharacteristicReport {
    Analyzer::new(family).ainfty(w)
}

pub fn bmo_norm(f: &BmoFunction, family: Family) -> CharacteristicReport {
    Analyzer::new(family).bmo(f)
}

pub fn blo_constant(f: &BmoFunction, family: Family) -> CharacteristicReport {
    Analyzer::new(family).blo(f)
}

pub fn d_star(u: &Weight, v: &Weight, family: Family) -> Result<f64> {
    Analyzer::new(family).d_star(u, v)
}

/// Both sides of the normalisation lemma on `interval`:
/// `lhs = <w0/w>_I + 1 - 2 <(w0/w)^(1/2)>_I` (the normalised squared
/// `L^2(w0, I)` distance between `w^(-1/2)` and `w0^(-1/2)`) and
/// `rhs = [w/w0]_{A_2} - 1`. Requires `<w/w0>_I = 1` up to `1e-9`.
pub fn lemma_gap_check(
    analyzer: &Analyzer,
    w: &Weight,
    w0: &Weight,
    interval: &Interval,
) -> Result<(f64, f64)> {
    let ratio = w.ratio(w0)?;
    let mean = ratio.as_function().average(interval)?;
    if (mean - 1.0).abs() > 1e-9 {
        return param(format!("lemma check needs <w/w0>_I = 1, got {mean}"));
    }
    let inv = GridFunction::new(w.grid(), ratio.values().iter().map(|r| 1.0 / r).collect())?;
    let inv_sqrt = inv.map(f64::sqrt)?;
    let lhs = inv.average(interval)? + 1.0 - 2.0 * inv_sqrt.average(interval)?;
    let mut an = *analyzer;
    if interval.shifted {
        an.family = Family::Shifted;
    }
    let rhs = an.ap(&ratio, 2.0)?.value - 1.0;
    Ok((lhs, rhs))
}

/// Largest `lambda` with `[exp(lambda f)]_{A_2} <= c_max`, to within `1e-7`.
/// Returns `f64::INFINITY` when the bound still holds at `lambda = 1e6`.
pub fn gj_lambda_star(analyzer: &Analyzer, f: &BmoFunction, c_max: f64) -> Result<f64> {
    if !(c_max > 1.0) {
        return param(format!("c_max must exceed 1, got {c_max}"));
    }
    let log_c = c_max.ln();
    let ok = |lambda: f64| analyzer.log_a2_of_exp(f, lambda) <= log_c;
    const CEILING: f64 = 1e6;
    if ok(CEILING) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while ok(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
