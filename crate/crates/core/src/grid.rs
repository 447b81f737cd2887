//! Dyadic discretisation of `[0,1)`, interval families and interval averages.

use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use crate::error::{param, Result};

pub const MAX_LEVELS: u32 = 24;

/// The dyadic grid of depth `levels`: `2^levels` equal half-open cells
/// partitioning `[0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    levels: u32,
}

impl Grid {
    pub fn new(levels: u32) -> Result<Self> {
        if !(1..=MAX_LEVELS).contains(&levels) {
            return param(format!("grid levels must lie in 1..={MAX_LEVELS}, got {levels}"));
        }
        Ok(Grid { levels })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn cells(&self) -> usize {
        1usize << self.levels
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.levels as f64)).exp2()
    }

    /// `[a, b)` endpoints of cell `j`.
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let h = self.cell_width();
        (j as f64 * h, (j + 1) as f64 * h)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.cell_width();
        (0..self.cells()).map(|j| (j as f64 + 0.5) * h).collect()
    }
}

/// Canonical dyadic grid at the requested depth.
pub fn make_grid(levels: u32) -> Result<Grid> {
    Grid::new(levels)
}

/// A dyadic interval `[k 2^-l, (k+1) 2^-l)`, or with `shifted` set, the same
/// interval translated right by half its length and clipped to `[0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub level: u32,
    pub index: usize,
    pub shifted: bool,
}

impl Interval {
    pub const ROOT: Interval = Interval { level: 0, index: 0, shifted: false };

    pub fn dyadic(level: u32, index: usize) -> Self {
        Interval { level, index, shifted: false }
    }

    pub fn shifted(level: u32, index: usize) -> Self {
        Interval { level, index, shifted: true }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        let n = grid.levels();
        let ok = if self.shifted {
            self.level < n && self.index < (1usize << self.level)
        } else {
            self.level <= n && self.index < (1usize << self.level)
        };
        if ok {
            Ok(())
        } else {
            param(format!("interval {self} does not live on a grid with {n} levels"))
        }
    }

    /// Cells covered by the interval (assumes the interval fits the grid).
    pub fn cell_range(&self, grid: &Grid) -> Range<usize> {
        let span = 1usize << (grid.levels() - self.level);
        let start = self.index * span;
        if self.shifted {
            let s = start + span / 2;
            s..(s + span).min(grid.cells())
        } else {
            start..start + span
        }
    }

    /// Lebesgue measure after clipping.
    pub fn measure(&self, grid: &Grid) -> f64 {
        self.cell_range(grid).len() as f64 * grid.cell_width()
    }

    pub fn bounds(&self, grid: &Grid) -> (f64, f64) {
        let r = self.cell_range(grid);
        let h = grid.cell_width();
        (r.start as f64 * h, r.end as f64 * h)
    }

    /// The two dyadic halves of a dyadic interval.
    pub fn children(&self) -> Option<(Interval, Interval)> {
        if self.shifted {
            return None;
        }
        Some((
            Interval::dyadic(self.level + 1, 2 * self.index),
            Interval::dyadic(self.level + 1, 2 * self.index + 1),
        ))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.shifted { "s" } else { "d" };
        write!(f, "{tag}{}:{}", self.level, self.index)
    }
}

/// Interval family over which every supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Family {
    #[default]
    Dyadic,
    /// Dyadic intervals plus the half-shifted intervals of levels `0..N`.
    Shifted,
}

impl Family {
    pub fn from_flag(shifted: bool) -> Self {
        if shifted {
            Family::Shifted
        } else {
            Family::Dyadic
        }
    }

    pub fn includes_shifted(&self) -> bool {
        matches!(self, Family::Shifted)
    }

    pub fn len(&self, grid: &Grid) -> usize {
        let dyadic = 2 * grid.cells() - 1;
        match self {
            Family::Dyadic => dyadic,
            Family::Shifted => dyadic + grid.cells() - 1,
        }
    }

    /// The `i`-th interval in canonical order: dyadic intervals by
    /// `(level, index)`, then shifted intervals by `(level, index)`.
    pub fn get(&self, grid: &Grid, i: usize) -> Interval {
        let dyadic = 2 * grid.cells() - 1;
        if i < dyadic {
            let (level, index) = split_heap_index(i);
            Interval::dyadic(level, index)
        } else {
            debug_assert!(self.includes_shifted());
            let (level, index) = split_heap_index(i - dyadic);
            Interval::shifted(level, index)
        }
    }

    /// Canonical position of `interval` inside this family.
    pub fn position(&self, grid: &Grid, interval: &Interval) -> Option<usize> {
        interval.check(grid).ok()?;
        let heap = (1usize << interval.level) - 1 + interval.index;
        if interval.shifted {
            self.includes_shifted().then(|| 2 * grid.cells() - 1 + heap)
        } else {
            Some(heap)
        }
    }

    pub fn intervals(&self, grid: &Grid) -> Vec<Interval> {
        (0..self.len(grid)).map(|i| self.get(grid, i)).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Dyadic => "dyadic",
            Family::Shifted => "dyadic+shifted",
        })
    }
}

fn split_heap_index(i: usize) -> (u32, usize) {
    let level = usize::BITS - 1 - (i + 1).leading_zeros();
    (level, i + 1 - (1usize << level))
}

/// All intervals of levels `0..=N` in canonical order, followed by the
/// shifted family when `shifted` is set.
pub fn dyadic_intervals(grid: &Grid, shifted: bool) -> Vec<Interval> {
    Family::from_flag(shifted).intervals(grid)
}

/// Bottom-up reduction tree over the cells of a grid. Level `N` holds the
/// cell values; each parent combines its two children, so sums are pairwise.
#[derive(Debug, Clone)]
pub struct Pyramid {
    grid: Grid,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub(crate) fn build(grid: Grid, values: &[f64], combine: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.levels() as usize;
        let mut levels = vec![Vec::new(); n + 1];
        levels[n] = values.to_vec();
        for l in (0..n).rev() {
            let child = &levels[l + 1];
            levels[l] = child.chunks_exact(2).map(|c| combine(c[0], c[1])).collect();
        }
        Pyramid { grid, levels }
    }

    pub fn sums(grid: Grid, values: &[f64]) -> Self {
        Self::build(grid, values, |a, b| a + b)
    }

    pub fn minima(grid: Grid, values: &[f64]) -> Self {
        Self::build(grid, values, f64::min)
    }

    pub fn node(&self, level: u32, index: usize) -> f64 {
        self.levels[level as usize][index]
    }

    /// Combination over the interval: one node for dyadic intervals, two
    /// adjacent nodes one level down for shifted ones.
    pub fn reduce(&self, interval: &Interval, combine: impl Fn(f64, f64) -> f64) -> f64 {
        if !interval.shifted {
            return self.node(interval.level, interval.index);
        }
        let l = interval.level + 1;
        let left = self.node(l, 2 * interval.index + 1);
        let right_idx = 2 * interval.index + 2;
        if right_idx < (1usize << l) {
            combine(left, self.node(l, right_idx))
        } else {
            left
        }
    }

    pub fn sum(&self, interval: &Interval) -> f64 {
        self.reduce(interval, |a, b| a + b)
    }

    pub fn min(&self, interval: &Interval) -> f64 {
        self.reduce(interval, f64::min)
    }

    /// Mean over the interval, assuming this is a sum pyramid.
    pub fn mean(&self, interval: &Interval) -> f64 {
        self.sum(interval) / interval.cell_range(&self.grid).len() as f64
    }
}

/// A real value per cell of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    sums: OnceLock<Pyramid>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return param(format!(
                "expected {} cell values, got {}",
                grid.cells(),
                values.len()
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return param(format!("cell {j} holds a non-finite value"));
        }
        Ok(GridFunction { grid, values, sums: OnceLock::new() })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.midpoints().into_iter().map(f).collect())
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.cells()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Pairwise sum table, built on first use.
    pub fn table(&self) -> &Pyramid {
        self.sums.get_or_init(|| Pyramid::sums(self.grid, &self.values))
    }

    pub fn average(&self, interval: &Interval) -> Result<f64> {
        interval.check(&self.grid)?;
        Ok(self.table().mean(interval))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return param("grid functions live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }
}

/// `(1/|I|) * integral of f over I`, read off the precomputed sum table.
pub fn average(f: &GridFunction, interval: &Interval) -> Result<f64> {
    f.average(interval)
}

/// `M` equispaced nodes on the unit circle, identified with the dyadic grid
/// of depth `log2 M` on `[0,1)` via `x -> exp(2 pi i x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CircleGrid {
    points: usize,
}

impl CircleGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 4 || !points.is_power_of_two() {
            return param(format!("circle points must be a power of two >= 4, got {points}"));
        }
        if points.trailing_zeros() > MAX_LEVELS {
            return param(format!("circle points {points} exceed 2^{MAX_LEVELS}"));
        }
        Ok(CircleGrid { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn grid(&self) -> Grid {
        Grid { levels: self.points.trailing_zeros() }
    }

    pub fn nodes(&self) -> Vec<num_complex::Complex64> {
        (0..self.points)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / self.points as f64;
                num_complex::Complex64::from_polar(1.0, theta)
            })
            .collect()
    }
}
