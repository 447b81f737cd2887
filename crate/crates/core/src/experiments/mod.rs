//! Runnable sweeps and property checks built on the library.
//!
//! Each sweep returns a typed result with a `to_table` rendering; rows are
//! computed independently (in parallel under [`Exec::Parallel`]) and always
//! gathered in input order, so tables are byte-identical across runs.

mod checks;
mod continuity;
mod family;
mod sharpness;
mod theorem2;

pub use checks::{
    convexity_check, convexity_trials, duality_check, duality_trials, factorization_trials,
    noncompleteness_demo, stein_weiss_trials, CheckOutcome, CheckTrial, FactorizationTrial, NoncompletenessResult,
    NoncompletenessRow, SteinWeissTrial,
};
pub use continuity::{continuity_sweep, ContinuityResult, ContinuityRow, Envelope};
pub use family::{
    haar, logsin, ramp, random_log_shape, random_weight, sharpness_family, FamilyKind, WeightFamily,
};
pub use sharpness::{bridge_fit, sharpness_search, BridgeResult, SharpnessResult};
pub use theorem2::{theorem2_sweep, Theorem2Result, Theorem2Row};

use crate::characteristic::Analyzer;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::norms::NormOptions;

/// Settings shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepContext {
    pub analyzer: Analyzer,
    pub norm: NormOptions,
    /// Operator applications allowed per `p != 2` norm estimate.
    pub lp_budget: usize,
}

impl Default for SweepContext {
    fn default() -> Self {
        SweepContext { analyzer: Analyzer::default(), norm: NormOptions::default(), lp_budget: 2000 }
    }
}

impl SweepContext {
    pub fn exec(&self) -> Exec {
        self.analyzer.exec
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// Default δ-grid: 8 log-spaced points in `[1e-3, 0.2]`.
pub fn default_deltas() -> Vec<f64> {
    log_spaced(1e-3, 0.2, 8)
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    /// `log` of the fitted constant.
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

impl RateFit {
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Fits `log y = intercept + slope log x` over the points with `x > 0` and
/// `y > 1e-13`; at least four are required.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|&(&x, &y)| x > 0.0 && y > 1e-13 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 positive points, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).exp();
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(RateFit { slope, intercept, r_squared, window: (lo, hi) })
}
