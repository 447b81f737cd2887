use crate::error::{param, Error, Result};
use crate::experiments::theorem2::boundary_scale;
use crate::experiments::{fit_loglog, RateFit, SweepContext, WeightFamily};
use crate::norms::weighted_l2_norm;
use crate::operators::OperatorSpec;
use crate::table::CsvTable;

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessResult {
    pub delta: f64,
    pub best_weight_id: String,
    pub gap: f64,
    pub d_star: f64,
    /// `[w]_{A_2}` of the witness.
    pub char_a2: f64,
    pub scale: f64,
    pub evaluations: usize,
}

impl SharpnessResult {
    pub const COLUMNS: [&'static str; 7] =
        ["delta", "best_weight_id", "gap", "d_star", "char_A2", "scale", "evaluations"];

    fn cells(&self) -> Vec<crate::table::Cell> {
        vec![
            self.delta.into(),
            self.best_weight_id.as_str().into(),
            self.gap.into(),
            self.d_star.into(),
            self.char_a2.into(),
            self.scale.into(),
            self.evaluations.into(),
        ]
    }

    pub fn to_table(results: &[SharpnessResult]) -> CsvTable {
        let mut t = CsvTable::new(&Self::COLUMNS);
        for r in results {
            t.push(r.cells()).expect("fixed width");
        }
        t
    }
}

/// Maximises `||T||_{L^2(w)} - ||T||_{L^2(w0)}` over family members with
/// `[w]_{A_2} <= 1 + delta`.
///
/// Each direction `g` of the family is tried with both signs; since
/// `[w0 e^{sg}]_{A_2}` grows with `s` for `w0 = 1`, the candidate is the
/// member on the boundary of the `A_2` ball, found by bisection. `budget`
/// caps the number of norm evaluations (one per candidate).
pub fn sharpness_search(
    op: &OperatorSpec,
    delta: f64,
    fam: &WeightFamily,
    budget: usize,
    ctx: &SweepContext,
) -> Result<SharpnessResult> {
    if !(0.0..1.0).contains(&delta) {
        return param(format!("sharpness delta must lie in [0, 1), got {delta}"));
    }
    let an = ctx.analyzer;
    let w0 = &fam.base;
    if an.ap(w0, 2.0)?.value > 1.0 + delta {
        return Err(Error::Search(format!("no family member has [w]_A2 <= {}", 1.0 + delta)));
    }
    let base = weighted_l2_norm(op, w0, &ctx.norm)?.value;

    let mut candidates = Vec::new();
    for (id, g) in fam.directions() {
        if an.bmo(&g).value == 0.0 {
            continue;
        }
        for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
            let g = g.map(|v| sign * v)?;
            candidates.push((format!("{id}{tag}"), g));
        }
    }
    candidates.truncate(budget);

    let evaluated = ctx.exec().map_items(&candidates, |(id, g)| -> Result<SharpnessResult> {
        let excess = |s: f64| Ok(an.ap(&fam.member(g, s)?, 2.0)?.value - 1.0);
        let scale = if delta == 0.0 { 0.0 } else { boundary_scale(excess, delta)?.unwrap_or(0.0) };
        let w = fam.member(g, scale)?;
        let norm = weighted_l2_norm(op, &w, &ctx.norm)?.value;
        Ok(SharpnessResult {
            delta,
            best_weight_id: id.clone(),
            gap: if scale == 0.0 { 0.0 } else { norm - base },
            d_star: an.d_star(&w, w0)?,
            char_a2: an.ap(&w, 2.0)?.value,
            scale,
            evaluations: 1,
        })
    });
    let mut best = SharpnessResult {
        delta,
        best_weight_id: "base".into(),
        gap: 0.0,
        d_star: 0.0,
        char_a2: an.ap(w0, 2.0)?.value,
        scale: 0.0,
        evaluations: 0,
    };
    let count = evaluated.len();
    for r in evaluated {
        let r = r?;
        if r.gap > best.gap {
            best = r;
        }
    }
    best.evaluations = count;
    Ok(best)
}

/// Sharpness witnesses over a δ-grid with two rate fits: gap against the
/// characteristic distance `[w]_{A_2} - 1` and against `d_*(w, w0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeResult {
    pub rows: Vec<SharpnessResult>,
    pub vs_char: RateFit,
    pub vs_metric: RateFit,
}

impl BridgeResult {
    pub fn to_table(&self) -> CsvTable {
        SharpnessResult::to_table(&self.rows)
    }
}

pub fn bridge_fit(
    op: &OperatorSpec,
    deltas: &[f64],
    fam: &WeightFamily,
    budget: usize,
    ctx: &SweepContext,
) -> Result<BridgeResult> {
    let rows = deltas
        .iter()
        .map(|&d| sharpness_search(op, d, fam, budget, ctx))
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let chars: Vec<f64> = rows.iter().map(|r| r.char_a2 - 1.0).collect();
    let metric: Vec<f64> = rows.iter().map(|r| r.d_star).collect();
    Ok(BridgeResult { vs_char: fit_loglog(&chars, &gaps)?, vs_metric: fit_loglog(&metric, &gaps)?, rows })
}
