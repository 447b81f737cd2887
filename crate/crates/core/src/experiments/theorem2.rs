use crate::characteristic::Analyzer;
use crate::error::{param, Error, Result};
use crate::experiments::{SweepContext, WeightFamily};
use crate::table::CsvTable;
use crate::BmoFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Row {
    pub weight_id: String,
    pub delta_target: f64,
    /// `[w]_{A_inf} - 1` at the chosen scale.
    pub ainfty_minus_1: f64,
    pub bmo_of_log: f64,
    /// `bmo / (32 sqrt(ainfty_minus_1))`; must stay `<= 1`.
    pub ratio_to_32sqrt: f64,
    pub scale: f64,
    /// The scale search hit the target within 1%.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Result {
    pub rows: Vec<Theorem2Row>,
}

impl Theorem2Result {
    pub const COLUMNS: [&'static str; 7] =
        ["weight_id", "delta", "ainfty_minus_1", "bmo_of_log", "ratio_to_32sqrt", "scale", "converged"];

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&Self::COLUMNS);
        for r in &self.rows {
            t.push(vec![
                r.weight_id.as_str().into(),
                r.delta_target.into(),
                r.ainfty_minus_1.into(),
                r.bmo_of_log.into(),
                r.ratio_to_32sqrt.into(),
                r.scale.into(),
                r.converged.into(),
            ])
            .expect("fixed width");
        }
        t
    }

    /// Rows breaching `||log w||_* <= 32 sqrt(delta)`.
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.bmo_of_log > 32.0 * r.ainfty_minus_1.sqrt() * (1.0 + 1e-12)).count()
    }

    /// `max ||log w||_* / sqrt(delta)`.
    pub fn max_ratio_sqrt(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.ainfty_minus_1 > 0.0)
            .map(|r| r.bmo_of_log / r.ainfty_minus_1.sqrt())
            .fold(0.0, f64::max)
    }
}

/// Largest scale `s` with `excess(s) <= target`, assuming `excess` is
/// non-decreasing in `s >= 0`. `None` if the target is never reached.
pub(crate) fn boundary_scale(excess: impl Fn(f64) -> Result<f64>, target: f64) -> Result<Option<f64>> {
    let mut hi = 1.0;
    let mut lo = 0.0;
    let mut doublings = 0;
    loop {
        match excess(hi) {
            Ok(e) if e > target => break,
            Ok(_) => {}
            // the member overflowed before reaching the target
            Err(Error::Range(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 40 {
            return Ok(None);
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(Some(lo))
}

fn row(an: &Analyzer, fam: &WeightFamily, id: &str, g: &BmoFunction, delta: f64) -> Result<Theorem2Row> {
    let excess = |s: f64| Ok(an.ainfty(&fam.member(g, s)?).value - 1.0);
    let scale = if delta == 0.0 { Some(0.0) } else { boundary_scale(excess, delta)? };
    let (scale, found) = match scale {
        Some(s) => (s, true),
        None => (0.0, false),
    };
    let w = fam.member(g, scale)?;
    let a = an.ainfty(&w).value - 1.0;
    let bmo = an.bmo(&w.log()).value;
    let converged = found && (a - delta).abs() <= 0.01 * delta;
    Ok(Theorem2Row {
        weight_id: id.to_owned(),
        delta_target: delta,
        ainfty_minus_1: a,
        bmo_of_log: bmo,
        ratio_to_32sqrt: if a > 0.0 { bmo / (32.0 * a.sqrt()) } else { 0.0 },
        scale,
        converged,
    })
}

/// For each target `delta`, scales the next family direction until
/// `[w]_{A_inf} = 1 + delta` and records `||log w||_*`. Directions are used
/// cyclically.
pub fn theorem2_sweep(deltas: &[f64], fam: &WeightFamily, ctx: &SweepContext) -> Result<Theorem2Result> {
    if deltas.iter().any(|d| !(0.0..1.0).contains(d)) {
        return param("theorem2 deltas must lie in [0, 1)");
    }
    let dirs = fam.directions();
    let jobs: Vec<(usize, f64)> = deltas.iter().copied().enumerate().collect();
    let an = ctx.analyzer;
    let rows = ctx.exec().map_items(&jobs, |&(i, delta)| {
        let (id, g) = &dirs[i % dirs.len()];
        row(&an, fam, id, g, delta)
    });
    Ok(Theorem2Result { rows: rows.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{haar, FamilyKind};
    use crate::grid::{Grid, GridFunction};
    use crate::weight::Weight;

    #[test]
    fn two_valued_closed_form() {
        let g = Grid::new(5).unwrap();
        let one = Weight::constant(g, 1.0).unwrap();
        let fam = WeightFamily::new(FamilyKind::ExpBmoDirection(haar(g)), one).unwrap();
        // the (2,1) weight: A_inf = 1.5 / sqrt 2
        let delta = 1.5 / 2f64.sqrt() - 1.0;
        let r = theorem2_sweep(&[delta], &fam, &SweepContext::default()).unwrap();
        let row = &r.rows[0];
        assert!(row.converged);
        assert!((row.bmo_of_log - 2f64.ln() / 2.0).abs() < 1e-9, "{row:?}");
        assert!((row.scale - 2f64.ln() / 2.0).abs() < 1e-9);
        assert_eq!(r.violations(), 0);
    }

    #[test]
    fn constant_and_zero_rows() {
        let g = Grid::new(4).unwrap();
        let one = Weight::constant(g, 1.0).unwrap();
        let flat = GridFunction::constant(g, 1.0).unwrap();
        let fam = WeightFamily::new(FamilyKind::ExpBmoDirection(flat), one).unwrap();
        let r = theorem2_sweep(&[0.0, 0.1], &fam, &SweepContext::default()).unwrap();
        assert_eq!(r.rows[0].bmo_of_log, 0.0);
        assert!(r.rows[0].converged);
        assert!(!r.rows[1].converged);
        assert_eq!(r.violations(), 0);
        assert!(theorem2_sweep(&[1.5], &fam, &SweepContext::default()).is_err());
    }

    #[test]
    fn random_sweep_has_no_violations() {
        let g = Grid::new(6).unwrap();
        let one = Weight::constant(g, 1.0).unwrap();
        let fam =
            WeightFamily::new(FamilyKind::RandomCells { seed: 7, amplitude: 1.0, count: 10 }, one).unwrap();
        let deltas = crate::experiments::log_spaced(1e-4, 0.5, 10);
        let r = theorem2_sweep(&deltas, &fam, &SweepContext::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.converged));
        assert_eq!(r.violations(), 0);
        assert!(r.max_ratio_sqrt() < 32.0);
    }
}
