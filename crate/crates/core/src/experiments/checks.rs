//! Algebraic property checks and the randomized trial batteries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characteristic::{Analyzer, CharacteristicKind};
use crate::error::{param, Result};
use crate::experiments::{random_weight, SweepContext};
use crate::grid::{CircleGrid, Grid};
use crate::interpolation::{continuity_upper_bound, factorize, stein_weiss_check};
use crate::norms::weighted_l2_norm;
use crate::operators::{czo_bound_f, OperatorSpec, SignPattern};
use crate::table::CsvTable;
use crate::weight::{conjugate, dual_weight, holder_interpolant, log_power_density, power_weight_raw, Weight};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

fn kind_for(p: f64) -> CharacteristicKind {
    if p == 1.0 {
        CharacteristicKind::A1
    } else {
        CharacteristicKind::Ap(p)
    }
}

/// `[u^t v^(1-t)] <= [u]^t [v]^(1-t)` for `A_p` (`A_1` when `p = 1`).
pub fn convexity_check(u: &Weight, v: &Weight, t: f64, p: f64, analyzer: &Analyzer) -> Result<CheckOutcome> {
    if !(p >= 1.0) {
        return param(format!("convexity check needs p >= 1, got {p}"));
    }
    let kind = kind_for(p);
    let lhs = analyzer.of_weight(&holder_interpolant(u, v, t)?, kind)?.value;
    let cu = analyzer.of_weight(u, kind)?.value;
    let cv = analyzer.of_weight(v, kind)?.value;
    let rhs = cu.powf(t) * cv.powf(1.0 - t);
    Ok(CheckOutcome { lhs, rhs, ok: lhs <= rhs + 1e-10 })
}

/// `[w^(1-p')]_{A_p'} = [w]_{A_p}^(p'-1)`.
pub fn duality_check(w: &Weight, p: f64, analyzer: &Analyzer) -> Result<CheckOutcome> {
    let q = conjugate(p)?;
    let lhs = analyzer.ap(&dual_weight(w, p)?, q)?.value;
    let rhs = analyzer.ap(w, p)?.value.powf(q - 1.0);
    Ok(CheckOutcome { lhs, rhs, ok: (lhs - rhs).abs() <= 1e-9 * rhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTrial {
    pub index: usize,
    pub levels: u32,
    pub p: f64,
    pub t: f64,
    pub outcome: CheckOutcome,
}

impl CheckTrial {
    pub fn table(trials: &[CheckTrial]) -> CsvTable {
        let mut table = CsvTable::new(&["trial", "levels", "p", "t", "lhs", "rhs", "ok"]);
        for c in trials {
            table
                .push(vec![
                    c.index.into(),
                    (c.levels as usize).into(),
                    c.p.into(),
                    c.t.into(),
                    c.outcome.lhs.into(),
                    c.outcome.rhs.into(),
                    c.outcome.ok.into(),
                ])
                .expect("fixed width");
        }
        table
    }
}

struct TrialSpec {
    levels: u32,
    seeds: [u64; 2],
    amplitudes: [f64; 2],
    p: f64,
    t: f64,
}

fn trial_specs(count: usize, seed: u64, max_levels: u32, p1_share: bool) -> Vec<TrialSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let levels = rng.random_range(2..=max_levels.max(2));
            let seeds = [rng.random(), rng.random()];
            let amplitudes = [rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)];
            let p = if p1_share && rng.random_bool(0.2) { 1.0 } else { rng.random_range(1.1..5.0) };
            let t = rng.random_range(0.0..=1.0);
            TrialSpec { levels, seeds, amplitudes, p, t }
        })
        .collect()
}

/// Seeded random convexity checks on grids of at most `max_levels`; one in
/// five uses `A_1`.
pub fn convexity_trials(count: usize, seed: u64, max_levels: u32, ctx: &SweepContext) -> Result<Vec<CheckTrial>> {
    let specs = trial_specs(count, seed, max_levels, true);
    let out = ctx.exec().map_items(&specs, |s| {
        let grid = Grid::new(s.levels)?;
        let u = random_weight(grid, s.seeds[0], s.amplitudes[0]);
        let v = random_weight(grid, s.seeds[1], s.amplitudes[1]);
        Ok((s.levels, s.p, s.t, convexity_check(&u, &v, s.t, s.p, &ctx.analyzer)?))
    });
    collect_trials(out)
}

pub fn duality_trials(count: usize, seed: u64, max_levels: u32, ctx: &SweepContext) -> Result<Vec<CheckTrial>> {
    let specs = trial_specs(count, seed, max_levels, false);
    let out = ctx.exec().map_items(&specs, |s| {
        let grid = Grid::new(s.levels)?;
        let w = random_weight(grid, s.seeds[0], s.amplitudes[0]);
        Ok((s.levels, s.p, f64::NAN, duality_check(&w, s.p, &ctx.analyzer)?))
    });
    collect_trials(out)
}

fn collect_trials(out: Vec<Result<(u32, f64, f64, CheckOutcome)>>) -> Result<Vec<CheckTrial>> {
    out.into_iter()
        .enumerate()
        .map(|(index, r)| r.map(|(levels, p, t, outcome)| CheckTrial { index, levels, p, t, outcome }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinWeissTrial {
    pub index: usize,
    pub operator: String,
    pub levels: u32,
    pub t: f64,
    pub k0: f64,
    pub k1: f64,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub converged: bool,
}

impl SteinWeissTrial {
    pub fn table(trials: &[SteinWeissTrial]) -> CsvTable {
        let mut table = CsvTable::new(&[
            "trial", "operator", "levels", "t", "k0", "k1", "measured", "bound", "slack", "converged",
        ]);
        for r in trials {
            table
                .push(vec![
                    r.index.into(),
                    r.operator.as_str().into(),
                    (r.levels as usize).into(),
                    r.t.into(),
                    r.k0.into(),
                    r.k1.into(),
                    r.measured.into(),
                    r.bound.into(),
                    r.slack.into(),
                    r.converged.into(),
                ])
                .expect("fixed width");
        }
        table
    }
}

fn random_operator(kind: usize, grid: Grid, seed: u64) -> Result<OperatorSpec> {
    Ok(match kind {
        0 => OperatorSpec::martingale(SignPattern::random(grid, seed)),
        1 => OperatorSpec::PeriodicHilbert(CircleGrid::new(grid.cells())?),
        2 => OperatorSpec::RieszProjection(CircleGrid::new(grid.cells())?),
        _ => {
            let n = grid.cells();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries = (0..n * n).map(|_| Complex64::from(rng.random_range(-1.0..1.0))).collect();
            OperatorSpec::dense(n, entries)?
        }
    })
}

/// Randomized `(operator, w0, w1, t)` interpolation trials at `p = 2` on
/// grids of 4 to `2^max_levels` cells.
pub fn stein_weiss_trials(
    count: usize,
    seed: u64,
    max_levels: u32,
    ctx: &SweepContext,
) -> Result<Vec<SteinWeissTrial>> {
    let specs = trial_specs(count, seed, max_levels, false);
    let out = ctx.exec().map_items(&specs.iter().enumerate().collect::<Vec<_>>(), |&(index, s)| {
        let grid = Grid::new(s.levels)?;
        let op = random_operator(index % 4, grid, s.seeds[0] ^ s.seeds[1])?;
        let w0 = random_weight(grid, s.seeds[0], s.amplitudes[0]);
        let w1 = random_weight(grid, s.seeds[1], s.amplitudes[1]);
        let r = stein_weiss_check(&op, &w0, &w1, 2.0, s.t, &ctx.norm, ctx.lp_budget)?;
        Ok(SteinWeissTrial {
            index,
            operator: op.tag().to_owned(),
            levels: s.levels,
            t: s.t,
            k0: r.k0,
            k1: r.k1,
            measured: r.measured,
            bound: r.bound,
            slack: r.slack,
            converged: r.converged,
        })
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationTrial {
    pub index: usize,
    pub levels: u32,
    pub t: f64,
    pub char_w: f64,
    /// Norm of the alternating martingale transform on `L^2(w0)`.
    pub gamma: f64,
    /// `gamma^(1-t) F([W])^t` with `c = 1`.
    pub bound: f64,
    /// The same norm on `L^2(w)`.
    pub measured: f64,
    pub reconstruction_error: f64,
    /// `|t d_*(W, w0) - d_*(w, w0)|`
    pub scaling_error: f64,
}

impl FactorizationTrial {
    pub fn table(trials: &[FactorizationTrial]) -> CsvTable {
        let mut table = CsvTable::new(&[
            "trial",
            "levels",
            "t",
            "char_W",
            "gamma",
            "bound",
            "measured",
            "reconstruction_error",
            "scaling_error",
        ]);
        for r in trials {
            table
                .push(vec![
                    r.index.into(),
                    (r.levels as usize).into(),
                    r.t.into(),
                    r.char_w.into(),
                    r.gamma.into(),
                    r.bound.into(),
                    r.measured.into(),
                    r.reconstruction_error.into(),
                    r.scaling_error.into(),
                ])
                .expect("fixed width");
        }
        table
    }
}

/// Seeded factorisations `w = w0^(1-t) W^t` with `w` a small random
/// perturbation of a random `w0`.
pub fn factorization_trials(
    count: usize,
    seed: u64,
    max_levels: u32,
    ctx: &SweepContext,
) -> Result<Vec<FactorizationTrial>> {
    let specs = trial_specs(count, seed, max_levels, false);
    let an = ctx.analyzer;
    let out = ctx.exec().map_items(&specs.iter().enumerate().collect::<Vec<_>>(), |&(index, s)| {
        let grid = Grid::new(s.levels)?;
        let w0 = random_weight(grid, s.seeds[0], s.amplitudes[0]);
        let bump = random_weight(grid, s.seeds[1], 0.1);
        let w = w0.product(&bump)?;
        let t = 0.05 + 0.95 * s.t;
        let f = factorize(&w, &w0, t, 2.0, &an)?;
        let back = f.reconstruct(&w0)?;
        let reconstruction_error = back
            .values()
            .iter()
            .zip(w.normalized().values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scaling_error = (t * an.d_star(&f.big_w, &w0)? - an.d_star(&w, &w0)?).abs();
        let op = OperatorSpec::martingale(SignPattern::alternating(grid));
        let gamma = weighted_l2_norm(&op, &w0, &ctx.norm)?.value;
        let measured = weighted_l2_norm(&op, &w, &ctx.norm)?.value;
        let bound = continuity_upper_bound(gamma, 1.0, czo_bound_f(2.0, f.characteristic_of_w.value)?, t)?;
        Ok(FactorizationTrial {
            index,
            levels: s.levels,
            t,
            char_w: f.characteristic_of_w.value,
            gamma,
            bound,
            measured,
            reconstruction_error,
            scaling_error,
        })
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncompletenessRow {
    pub n: usize,
    pub r: f64,
    /// `d_*(w_n, w_{n+1})`; NaN on the last row.
    pub d_star_to_next: f64,
    pub a1_char: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoncompletenessResult {
    pub rows: Vec<NoncompletenessRow>,
    /// `||log x||_*` on the grid.
    pub unit: f64,
    /// Worst relative deviation of `d_*(w_n, w_m)` from `|r_n - r_m| unit`
    /// over all pairs.
    pub max_proportionality_error: f64,
}

impl NoncompletenessResult {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["n", "r", "d_star_to_next", "a1_char"]);
        for r in &self.rows {
            t.push(vec![r.n.into(), r.r.into(), r.d_star_to_next.into(), r.a1_char.into()]).expect("fixed width");
        }
        t
    }

    pub fn a1_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].a1_char > w[0].a1_char)
    }

    pub fn a1_growth(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.a1_char / a.a1_char,
            _ => 1.0,
        }
    }
}

/// Power weights `|x|^r_n` with `r_n` decreasing towards `-1`: a Cauchy
/// sequence for `d_*` whose `A_1` constants blow up.
///
/// Distances use the cell means `L` of `log x`, so `log w_r = r L` exactly
/// and `d_*(w_r, w_s) = |r - s| ||L||_*` holds to rounding. The `A_1`
/// constants use the exact cell means of `x^r`.
pub fn noncompleteness_demo(r_values: &[f64], grid: Grid, analyzer: &Analyzer) -> Result<NoncompletenessResult> {
    let floor = -1.0 + (grid.levels() as f64).exp2().recip();
    if r_values.iter().any(|&r| !(r > floor && r < 0.0)) {
        return param(format!("exponents must lie in ({floor}, 0) for this grid"));
    }
    if r_values.windows(2).any(|w| w[1] > w[0]) {
        return param("exponents must be non-increasing");
    }
    let log = log_power_density(grid);
    let unit = analyzer.bmo(&log).value;
    let dist = |a: f64, b: f64| -> Result<f64> { Ok(analyzer.bmo(&log.map(|l| (a - b) * l)?).value) };

    let a1 = analyzer.exec.map_items(r_values, |&r| -> Result<f64> { Ok(analyzer.a1(&power_weight_raw(r, grid)?).value) });
    let mut rows = Vec::with_capacity(r_values.len());
    for (n, (&r, a1)) in r_values.iter().zip(a1).enumerate() {
        let d = match r_values.get(n + 1) {
            Some(&next) => dist(r, next)?,
            None => f64::NAN,
        };
        rows.push(NoncompletenessRow { n: n + 1, r, d_star_to_next: d, a1_char: a1? });
    }
    let mut worst: f64 = 0.0;
    for (i, &a) in r_values.iter().enumerate() {
        for &b in &r_values[i + 1..] {
            let d = dist(a, b)?;
            let expected = (a - b).abs() * unit;
            let err = if expected == 0.0 { d } else { (d - expected).abs() / expected };
            worst = worst.max(err);
        }
    }
    Ok(NoncompletenessResult { rows, unit, max_proportionality_error: worst })
}
