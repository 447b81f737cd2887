//! Families of weights around a base weight `w0`.
//!
//! Every family is a list of log-directions `g`; member `(i, s)` is
//! `w0 exp(s g_i)`, normalized.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::grid::{Grid, GridFunction, Interval};
use crate::weight::Weight;
use crate::BmoFunction;

/// `x - 1/2` at cell midpoints.
pub fn ramp(grid: Grid) -> BmoFunction {
    GridFunction::from_fn(grid, |x| x - 0.5).expect("finite")
}

/// The root Haar function: `+1` on `[0, 1/2)`, `-1` on `[1/2, 1)`.
pub fn haar(grid: Grid) -> BmoFunction {
    GridFunction::from_fn(grid, |x| if x < 0.5 { 1.0 } else { -1.0 }).expect("finite")
}

/// `log|2 sin(pi x)|` at cell midpoints: the logarithm of the distance to the
/// base point on the circle, the circle analogue of `log|x|`.
pub fn logsin(grid: Grid) -> BmoFunction {
    GridFunction::from_fn(grid, |x| (2.0 * (PI * x).sin()).abs().ln()).expect("finite at midpoints")
}

/// Log-values i.i.d. uniform in `[-amplitude, amplitude]`, then one dyadic
/// averaging pass `g_j <- (g_j + mean of its sibling pair) / 2`.
pub fn random_log_shape(grid: Grid, rng: &mut ChaCha8Rng, amplitude: f64) -> BmoFunction {
    let raw: Vec<f64> = (0..grid.cells()).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
    let smooth = if raw.len() < 2 {
        raw
    } else {
        raw.chunks_exact(2)
            .flat_map(|c| {
                let m = 0.5 * (c[0] + c[1]);
                [0.5 * (c[0] + m), 0.5 * (c[1] + m)]
            })
            .collect()
    };
    GridFunction::new(grid, smooth).expect("finite")
}

/// A seeded random normalized weight, `exp` of [`random_log_shape`].
pub fn random_weight(grid: Grid, seed: u64, amplitude: f64) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_log_shape(grid, &mut rng, amplitude);
    Weight::exp_of(&g).expect("bounded amplitude").normalized()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// The single direction `f`.
    ExpBmoDirection(BmoFunction),
    /// Powers `|2 sin(pi x)|^s` of the distance to a point of the circle.
    PowerCircle,
    /// `count` seeded random directions.
    RandomCells { seed: u64, amplitude: f64, count: usize },
    /// Directions of all parts, in order.
    Mixture(Vec<FamilyKind>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    pub kind: FamilyKind,
    pub base: Weight,
}

impl WeightFamily {
    pub fn new(kind: FamilyKind, base: Weight) -> Result<Self> {
        let fam = WeightFamily { kind, base };
        fam.check(&fam.kind)?;
        Ok(fam)
    }

    fn check(&self, kind: &FamilyKind) -> Result<()> {
        match kind {
            FamilyKind::ExpBmoDirection(f) if f.grid() != self.base.grid() => {
                param("family direction and base weight live on different grids")
            }
            FamilyKind::RandomCells { amplitude, count, .. } if !(*amplitude > 0.0) || *count == 0 => {
                param("random family needs a positive amplitude and count")
            }
            FamilyKind::Mixture(parts) => parts.iter().try_for_each(|k| self.check(k)),
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> Grid {
        self.base.grid()
    }

    /// The log-directions with a short identifier each.
    pub fn directions(&self) -> Vec<(String, BmoFunction)> {
        let mut out = Vec::new();
        self.collect(&self.kind, &mut out);
        out
    }

    fn collect(&self, kind: &FamilyKind, out: &mut Vec<(String, BmoFunction)>) {
        let grid = self.grid();
        match kind {
            FamilyKind::ExpBmoDirection(f) => out.push((format!("dir{}", out.len()), f.clone())),
            FamilyKind::PowerCircle => out.push(("logsin".to_owned(), logsin(grid))),
            FamilyKind::RandomCells { seed, amplitude, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for k in 0..*count {
                    out.push((format!("rand{seed}-{k}"), random_log_shape(grid, &mut rng, *amplitude)));
                }
            }
            FamilyKind::Mixture(parts) => parts.iter().for_each(|k| self.collect(k, out)),
        }
    }

    /// `w0 exp(s g)`, normalized.
    pub fn member(&self, direction: &BmoFunction, s: f64) -> Result<Weight> {
        let log = self.base.log().zip_with(direction, |a, g| a + s * g)?;
        let mean = log.average(&Interval::ROOT)?;
        Ok(Weight::exp_of(&log.map(|l| l - mean)?)?.normalized())
    }
}

/// Default family for the circle sharpness experiments: the ramp, the root
/// Haar function and the logarithmic singularity.
pub fn sharpness_family(base: Weight) -> WeightFamily {
    let grid = base.grid();
    let kind = FamilyKind::Mixture(vec![
        FamilyKind::ExpBmoDirection(ramp(grid)),
        FamilyKind::ExpBmoDirection(haar(grid)),
        FamilyKind::PowerCircle,
    ]);
    WeightFamily { kind, base }
}
