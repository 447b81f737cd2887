//! Brute-force oracles and proptest strategies shared by the integration
//! tests. Nothing here touches the prefix pyramids.
#![allow(dead_code)]

use muck_core::{Family, Grid, Interval, Weight};
use proptest::prelude::*;

pub fn grid(n: u32) -> Grid {
    Grid::new(n).unwrap()
}

pub fn intervals(grid: &Grid, family: Family) -> Vec<(Interval, std::ops::Range<usize>)> {
    family.intervals(grid).into_iter().map(|iv| (iv, iv.cell_range(grid))).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// `max_I avg(w) avg(w^{1/(1-p)})^{p-1}`, summed cell by cell.
pub fn ap(values: &[f64], grid: &Grid, family: Family, p: f64) -> f64 {
    intervals(grid, family)
        .into_iter()
        .map(|(_, r)| {
            let a = mean(values[r.clone()].iter().copied());
            let b = mean(values[r].iter().map(|w| w.powf(1.0 / (1.0 - p))));
            a * b.powf(p - 1.0)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn ainfty(values: &[f64], grid: &Grid, family: Family) -> f64 {
    intervals(grid, family)
        .into_iter()
        .map(|(_, r)| mean(values[r.clone()].iter().copied()) / mean(values[r].iter().map(|w| w.ln())).exp())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn bmo(values: &[f64], grid: &Grid, family: Family) -> f64 {
    intervals(grid, family)
        .into_iter()
        .map(|(_, r)| {
            let m = mean(values[r.clone()].iter().copied());
            mean(values[r].iter().map(|f| (f - m).abs()))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn blo(values: &[f64], grid: &Grid, family: Family) -> f64 {
    intervals(grid, family)
        .into_iter()
        .map(|(_, r)| {
            let m = mean(values[r.clone()].iter().copied());
            m - values[r].iter().copied().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_x max_{I ∋ x} avg_I(w) / w(x)`.
pub fn a1(values: &[f64], grid: &Grid, family: Family) -> f64 {
    let ivs = intervals(grid, family);
    (0..values.len())
        .map(|x| {
            ivs.iter()
                .filter(|(_, r)| r.contains(&x))
                .map(|(_, r)| mean(values[r.clone()].iter().copied()))
                .fold(f64::NEG_INFINITY, f64::max)
                / values[x]
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Log-values in `[-amp, amp]` on a grid with `1..=max_levels` levels.
pub fn log_values(max_levels: u32, amp: f64) -> impl Strategy<Value = (u32, Vec<f64>)> {
    (1..=max_levels).prop_flat_map(move |n| (Just(n), prop::collection::vec(-amp..amp, 1usize << n)))
}

pub fn weight_of(n: u32, logs: &[f64]) -> Weight {
    Weight::new(grid(n), logs.iter().map(|l| l.exp()).collect()).unwrap()
}

pub fn families() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Dyadic), Just(Family::Shifted)]
}
