use crate::error::{param, Result};
use crate::experiments::{fit_loglog, RateFit, SweepContext, WeightFamily};
use crate::norms::weighted_norm;
use crate::operators::OperatorSpec;
use crate::table::CsvTable;
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityRow {
    pub delta_target: f64,
    pub d_star_actual: f64,
    pub char_ap: f64,
    pub norm: f64,
    /// `norm - norm_at_w0`
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityResult {
    pub op_tag: String,
    pub p: f64,
    pub norm_at_w0: f64,
    /// Sorted by `d_star_actual`.
    pub rows: Vec<ContinuityRow>,
}

/// Linear envelope `gap <= C d` with `C` taken from the largest distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub c: f64,
    /// `max gap / (C d)` over the rows.
    pub worst: f64,
}

impl Envelope {
    pub fn holds(&self, slack: f64) -> bool {
        self.worst <= 1.0 + slack
    }
}

impl ContinuityResult {
    pub const COLUMNS: [&'static str; 8] =
        ["operator", "p", "delta_target", "d_star_actual", "char_Ap", "norm", "gap", "converged"];

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&Self::COLUMNS);
        for r in &self.rows {
            t.push(vec![
                self.op_tag.as_str().into(),
                self.p.into(),
                r.delta_target.into(),
                r.d_star_actual.into(),
                r.char_ap.into(),
                r.norm.into(),
                r.gap.into(),
                r.converged.into(),
            ])
            .expect("fixed width");
        }
        t
    }

    fn usable(&self) -> impl Iterator<Item = &ContinuityRow> {
        self.rows.iter().filter(|r| r.converged)
    }

    /// Slope of `log gap` against `log d_*` over converged rows.
    pub fn rate_fit(&self) -> Result<RateFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self.usable().map(|r| (r.d_star_actual, r.gap)).unzip();
        fit_loglog(&xs, &ys)
    }

    pub fn envelope(&self) -> Option<Envelope> {
        let last = self.usable().filter(|r| r.d_star_actual > 0.0).last()?;
        let c = last.gap / last.d_star_actual;
        let worst = self
            .usable()
            .filter(|r| r.d_star_actual > 0.0)
            .map(|r| r.gap / (c * r.d_star_actual))
            .fold(f64::NEG_INFINITY, f64::max);
        Some(Envelope { c, worst })
    }

    /// `|gap|` is non-increasing as `d_*` decreases over the four smallest
    /// distances, up to `slack`.
    pub fn tail_monotone(&self, slack: f64) -> bool {
        let tail: Vec<f64> = self.rows.iter().take(4).map(|r| r.gap.abs()).collect();
        tail.windows(2).all(|w| w[0] <= w[1] + slack)
    }
}

/// Moves away from `w0` along the first direction `g` of the family:
/// `w = w0 exp(s g)` with `s = delta / ||g||_*`, which puts `d_*(w, w0)`
/// exactly on the target.
pub fn continuity_sweep(
    op: &OperatorSpec,
    w0: &Weight,
    fam: &WeightFamily,
    deltas: &[f64],
    p: f64,
    ctx: &SweepContext,
) -> Result<ContinuityResult> {
    if deltas.iter().any(|d| !(*d >= 0.0)) || deltas.windows(2).any(|w| w[1] <= w[0]) {
        return param("deltas must be non-negative and increasing");
    }
    let (_, g) = fam.directions().into_iter().next().expect("families are non-empty");
    if g.grid() != w0.grid() {
        return param("family direction and w0 live on different grids");
    }
    let an = ctx.analyzer;
    let unit = an.bmo(&g).value;
    if unit == 0.0 && deltas.iter().any(|&d| d > 0.0) {
        return param("family direction is constant, so d_* cannot move");
    }
    let base = weighted_norm(op, w0, p, &ctx.norm, ctx.lp_budget)?;
    let direction = WeightFamily { kind: fam.kind.clone(), base: w0.clone() };
    let rows = ctx.exec().map_items(deltas, |&delta| -> Result<ContinuityRow> {
        let w = if delta == 0.0 { w0.clone() } else { direction.member(&g, delta / unit)? };
        let est = weighted_norm(op, &w, p, &ctx.norm, ctx.lp_budget)?;
        Ok(ContinuityRow {
            delta_target: delta,
            d_star_actual: an.d_star(&w, w0)?,
            char_ap: an.ap(&w, p)?.value,
            norm: est.value,
            gap: est.value - base.value,
            converged: est.converged,
        })
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.d_star_actual.total_cmp(&b.d_star_actual));
    Ok(ContinuityResult { op_tag: op.tag().to_owned(), p, norm_at_w0: base.value, rows })
}
