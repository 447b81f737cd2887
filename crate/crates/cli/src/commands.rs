use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::ValueEnum;
use muck_core::experiments::{
    bridge_fit, continuity_sweep, convexity_trials, duality_trials, factorization_trials, haar, log_spaced, logsin,
    noncompleteness_demo, ramp, random_weight, sharpness_family, stein_weiss_trials, theorem2_sweep, CheckTrial,
    FactorizationTrial, FamilyKind, RateFit, SteinWeissTrial, SweepContext, WeightFamily,
};
use muck_core::norms::weighted_norm;
use muck_core::table::CsvTable;
use muck_core::weight::power_weight;
use muck_core::{
    characteristic::gj_lambda_star, Analyzer, BmoFunction, CircleGrid, Grid, NormOptions, OperatorSpec, SignPattern,
    Weight,
};

use crate::config::{Direction, OperatorKind, RunConfig, WeightSpec};
use crate::error::{CliError, Result};
use crate::svg::emit_svg_plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Characteristic,
    Metric,
    Norm,
    Continuity,
    Theorem2,
    Sharpness,
    Noncompleteness,
    Convexity,
    Duality,
    SteinWeiss,
    Factorize,
    Gj,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_owned()
    }
}

/// Target range of the `theorem2` sweep; `count` log-spaced points.
const THEOREM2_RANGE: (f64, f64) = (1e-4, 0.5);

struct Run<'a> {
    cmd: Command,
    cfg: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl Run<'_> {
    fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.cfg.grid_levels)?)
    }

    /// Grid of the configured operator: the circle for `hilbert`/`riesz`.
    fn work_grid(&self) -> Result<Grid> {
        match self.cfg.operator {
            OperatorKind::Hilbert | OperatorKind::Riesz => Ok(CircleGrid::new(self.cfg.circle_points)?.grid()),
            _ => self.grid(),
        }
    }

    fn operator(&self) -> Result<OperatorSpec> {
        let cfg = self.cfg;
        Ok(match cfg.operator {
            OperatorKind::Martingale => {
                let signs = SignPattern::named(&cfg.signs, self.grid()?, cfg.seed)
                    .map_err(|e| CliError::config("signs", e.to_string()))?;
                OperatorSpec::martingale(signs)
            }
            OperatorKind::Hilbert => OperatorSpec::PeriodicHilbert(CircleGrid::new(cfg.circle_points)?),
            OperatorKind::Riesz => OperatorSpec::RieszProjection(CircleGrid::new(cfg.circle_points)?),
            OperatorKind::Maximal => OperatorSpec::DyadicMaximal { grid: self.grid()?, family: cfg.interval_family },
        })
    }

    fn weight(&self, spec: &WeightSpec, key: &str) -> Result<Weight> {
        let grid = self.work_grid()?;
        let w = match spec {
            WeightSpec::One => Weight::constant(grid, 1.0)?,
            WeightSpec::TwoValued => Weight::from_fn(grid, |x| if x < 0.5 { 2.0 } else { 1.0 })?,
            WeightSpec::Power(a) => power_weight(*a, grid)?,
            WeightSpec::Random(a) => random_weight(grid, self.cfg.seed, *a),
            WeightSpec::File(path) => {
                let file = fs::File::open(path)
                    .map_err(|e| CliError::config(key, format!("cannot open {}: {e}", path.display())))?;
                Weight::read_from(BufReader::new(file))?
            }
        };
        if w.grid() != grid {
            return Err(CliError::config(
                key,
                format!("weight has {} levels, the run uses {}", w.grid().levels(), grid.levels()),
            ));
        }
        Ok(w)
    }

    fn direction(&self, grid: Grid) -> BmoFunction {
        match self.cfg.direction {
            Direction::Haar => haar(grid),
            Direction::Ramp => ramp(grid),
            Direction::Logsin => logsin(grid),
        }
    }

    fn analyzer(&self) -> Analyzer {
        Analyzer::new(self.cfg.interval_family)
    }

    fn norm_options(&self) -> NormOptions {
        NormOptions::default().with_tol(self.cfg.norm_tol).with_max_iter(self.cfg.norm_budget)
    }

    fn context(&self) -> SweepContext {
        SweepContext { analyzer: self.analyzer(), norm: self.norm_options(), lp_budget: self.cfg.lp_budget }
    }

    fn count(&self, default: usize) -> usize {
        self.cfg.count.unwrap_or(default)
    }

    /// `{command}_{operator}_p{p}_N{levels}_s{seed}`
    fn stem(&self) -> Result<String> {
        let op = self.operator()?;
        Ok(format!(
            "{}_{}_p{}_N{}_s{}",
            self.cmd.name(),
            op.tag(),
            self.cfg.p,
            self.work_grid()?.levels(),
            self.cfg.seed
        ))
    }

    fn write_table(&mut self, table: &CsvTable) -> Result<()> {
        fs::create_dir_all(&self.cfg.output_dir)?;
        let path = self.cfg.output_dir.join(format!("{}.csv", self.stem()?));
        table.write(&path)?;
        self.written.push(path);
        Ok(())
    }

    fn write_svg(&mut self, table: &CsvTable, x: &str, y: &str, fit: Option<&RateFit>) -> Result<()> {
        if !self.cfg.svg {
            return Ok(());
        }
        let svg = emit_svg_plot(table, x, y, true, fit)?;
        let path = self.cfg.output_dir.join(format!("{}.svg", self.stem()?));
        fs::write(&path, svg)?;
        self.written.push(path);
        Ok(())
    }
}

fn violation<T>(msg: String) -> Result<T> {
    Err(CliError::Violation(msg))
}

/// Runs `cmd`, writes its CSV (and SVG when asked) and returns the written
/// paths with a one-line summary. Outputs are written before any invariant
/// violation is reported.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<(Vec<PathBuf>, String)> {
    let mut r = Run { cmd, cfg, written: Vec::new() };
    let summary = dispatch(&mut r)?;
    Ok((r.written, summary))
}

fn dispatch(r: &mut Run) -> Result<String> {
    let cfg = r.cfg;
    match r.cmd {
        Command::Characteristic => {
            let w = r.weight(&cfg.weight, "weight")?;
            let rep = r.analyzer().of_weight(&w, cfg.kind)?;
            let mut t = CsvTable::new(&["kind", "weight", "value", "witness", "family"]);
            t.push(vec![
                rep.kind.to_string().into(),
                cfg.weight.id().into(),
                rep.value.into(),
                rep.witness.to_string().into(),
                format!("{:?}", rep.family).to_lowercase().into(),
            ])?;
            r.write_table(&t)?;
            Ok(format!("{} = {} (witness {})", rep.kind, rep.value, rep.witness))
        }
        Command::Metric => {
            let u = r.weight(&cfg.weight, "weight")?;
            let v = r.weight(&cfg.other_weight, "other_weight")?;
            let d = r.analyzer().d_star(&u, &v)?;
            let mut t = CsvTable::new(&["weight", "other_weight", "d_star"]);
            t.push(vec![cfg.weight.id().into(), cfg.other_weight.id().into(), d.into()])?;
            r.write_table(&t)?;
            Ok(format!("d_* = {d}"))
        }
        Command::Norm => {
            let op = r.operator()?;
            let w = r.weight(&cfg.weight, "weight")?;
            let est = weighted_norm(&op, &w, cfg.p, &r.norm_options(), cfg.lp_budget)?;
            let mut t = CsvTable::new(&["operator", "p", "weight_id", "value", "iterations", "converged"]);
            t.push(vec![
                op.tag().into(),
                cfg.p.into(),
                cfg.weight.id().into(),
                est.value.into(),
                est.iterations.into(),
                est.converged.into(),
            ])?;
            r.write_table(&t)?;
            if !est.converged {
                return Err(CliError::NotConverged(format!(
                    "lower bound {} after {} iterations; raise norm_budget or lp_budget",
                    est.value, est.iterations
                )));
            }
            Ok(format!("||{}||_(L^{}(w)) = {}", op.tag(), cfg.p, est.value))
        }
        Command::Continuity => {
            let op = r.operator()?;
            let w0 = r.weight(&cfg.weight, "weight")?;
            let fam = WeightFamily::new(FamilyKind::ExpBmoDirection(r.direction(w0.grid())), w0.clone())?;
            let res = continuity_sweep(&op, &w0, &fam, &cfg.delta_grid, cfg.p, &r.context())?;
            let t = res.to_table();
            r.write_table(&t)?;
            let fit = res.rate_fit().ok();
            r.write_svg(&t, "d_star_actual", "gap", fit.as_ref())?;
            Ok(match fit {
                Some(f) => format!("rate slope {:.4}, r2 {:.5}, constant {:.4}", f.slope, f.r_squared, f.constant()),
                None => "too few positive gaps for a rate fit".to_owned(),
            })
        }
        Command::Theorem2 => {
            let grid = r.grid()?;
            let count = r.count(200);
            let kind = FamilyKind::RandomCells { seed: cfg.seed, amplitude: cfg.amplitude, count };
            let fam = WeightFamily::new(kind, Weight::constant(grid, 1.0)?)?;
            let deltas = log_spaced(THEOREM2_RANGE.0, THEOREM2_RANGE.1, count);
            let res = theorem2_sweep(&deltas, &fam, &r.context())?;
            let t = res.to_table();
            r.write_table(&t)?;
            r.write_svg(&t, "ainfty_minus_1", "bmo_of_log", None)?;
            if res.violations() > 0 {
                return violation(format!("{} rows breach bmo <= 32 sqrt(delta)", res.violations()));
            }
            Ok(format!("0 violations in {} rows, max bmo/sqrt(delta) = {:.4}", res.rows.len(), res.max_ratio_sqrt()))
        }
        Command::Sharpness => {
            let op = r.operator()?;
            let fam = sharpness_family(Weight::constant(r.work_grid()?, 1.0)?);
            let res = bridge_fit(&op, &cfg.delta_grid, &fam, cfg.search_budget, &r.context())?;
            let t = res.to_table();
            r.write_table(&t)?;
            r.write_svg(&t, "d_star", "gap", Some(&res.vs_metric))?;
            Ok(format!(
                "gap exponent {:.4} against [w]_A2 - 1, {:.4} against d_*",
                res.vs_char.slope, res.vs_metric.slope
            ))
        }
        Command::Noncompleteness => {
            let rs: Vec<f64> = (1..=cfg.terms).map(|n| -1.0 + (-(n as f64)).exp2()).collect();
            let res = noncompleteness_demo(&rs, r.grid()?, &r.analyzer())?;
            r.write_table(&res.to_table())?;
            if res.max_proportionality_error > cfg.char_tol {
                return violation(format!("proportionality error {}", res.max_proportionality_error));
            }
            if !res.a1_strictly_increasing() {
                return violation("A1 characteristics are not strictly increasing".into());
            }
            Ok(format!("A1 grows by {:.3} across {} terms", res.a1_growth(), rs.len()))
        }
        Command::Convexity | Command::Duality => {
            let trials = if r.cmd == Command::Convexity {
                convexity_trials(r.count(100), cfg.seed, cfg.grid_levels, &r.context())?
            } else {
                duality_trials(r.count(100), cfg.seed, cfg.grid_levels, &r.context())?
            };
            r.write_table(&CheckTrial::table(&trials))?;
            let bad = trials.iter().filter(|t| !t.outcome.ok).count();
            if bad > 0 {
                return violation(format!("{bad} of {} trials fail the identity", trials.len()));
            }
            Ok(format!("{} trials, all hold", trials.len()))
        }
        Command::SteinWeiss => {
            let trials = stein_weiss_trials(r.count(50), cfg.seed, cfg.grid_levels, &r.context())?;
            r.write_table(&SteinWeissTrial::table(&trials))?;
            let bad = trials.iter().filter(|t| t.slack < -1e-8).count();
            if bad > 0 {
                return violation(format!("{bad} of {} trials exceed K0^(1-t) K1^t", trials.len()));
            }
            let min = trials.iter().map(|t| t.slack).fold(f64::INFINITY, f64::min);
            Ok(format!("{} trials, min slack {min:e}", trials.len()))
        }
        Command::Factorize => {
            let trials = factorization_trials(r.count(100), cfg.seed, cfg.grid_levels, &r.context())?;
            r.write_table(&FactorizationTrial::table(&trials))?;
            let worst = trials.iter().map(|t| t.reconstruction_error.max(t.scaling_error)).fold(0.0, f64::max);
            if worst > cfg.char_tol {
                return violation(format!("factorization error {worst:e}"));
            }
            Ok(format!("{} trials, worst error {worst:e}", trials.len()))
        }
        Command::Gj => {
            let f = r.direction(r.grid()?);
            let lambda = gj_lambda_star(&r.analyzer(), &f, cfg.c_max)?;
            let mut t = CsvTable::new(&["direction", "c_max", "lambda_star"]);
            t.push(vec![format!("{:?}", cfg.direction).to_lowercase().into(), cfg.c_max.into(), lambda.into()])?;
            r.write_table(&t)?;
            Ok(format!("lambda* = {lambda}"))
        }
    }
}
