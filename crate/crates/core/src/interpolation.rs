//! Interpolation with change of measure, and the factorisation
//! `w = w0^(1-t) W^t` used to transfer bounds from a fixed `A_2` ball.

use crate::characteristic::{Analyzer, CharacteristicReport};
use crate::error::{param, Result};
use crate::norms::{weighted_norm, NormOptions};
use crate::operators::{czo_bound_f, OperatorSpec};
use crate::weight::Weight;

/// Exponents of an interpolation pair and the derived quantities at `t`.
/// Infinite exponents are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    pub p0: f64,
    pub p1: f64,
    pub q0: f64,
    pub q1: f64,
    pub t: f64,
    pub p_t: f64,
    pub q_t: f64,
    /// `t p_t / p1`
    pub s: f64,
    /// `t q_t / q1`
    pub r: f64,
}

fn unit(t: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return param(format!("{what} must lie in [0,1], got {t}"));
    }
    Ok(())
}

pub fn interpolation_params(p0: f64, p1: f64, q0: f64, q1: f64, t: f64) -> Result<InterpolationParams> {
    for (name, e) in [("p0", p0), ("p1", p1), ("q0", q0), ("q1", q1)] {
        if !(e >= 1.0) {
            return param(format!("exponent {name} must be >= 1, got {e}"));
        }
    }
    unit(t, "t")?;
    let mix = |a: f64, b: f64| 1.0 / ((1.0 - t) / a + t / b);
    let p_t = mix(p0, p1);
    let q_t = mix(q0, q1);
    Ok(InterpolationParams { p0, p1, q0, q1, t, p_t, q_t, s: t * p_t / p1, r: t * q_t / q1 })
}

/// Density of `mu_s`: cell-wise `w0^(1-s) w1^s`. Not normalized.
pub fn interpolated_weight(w0: &Weight, w1: &Weight, s: f64) -> Result<Weight> {
    unit(s, "s")?;
    if w0.grid() != w1.grid() {
        return param("interpolated_weight: weights live on different grids");
    }
    let values = w0.values().iter().zip(w1.values()).map(|(a, b)| a.powf(1.0 - s) * b.powf(s)).collect();
    Weight::new(w0.grid(), values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinWeissReport {
    pub k0: f64,
    pub k1: f64,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`
    pub slack: f64,
    pub converged: bool,
}

impl SteinWeissReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

/// Diagonal interpolation `p0 = p1 = q0 = q1 = p`: compares the norm on
/// `L^p(w0^(1-t) w1^t)` with `K0^(1-t) K1^t`.
pub fn stein_weiss_check(
    op: &OperatorSpec,
    w0: &Weight,
    w1: &Weight,
    p: f64,
    t: f64,
    opts: &NormOptions,
    budget: usize,
) -> Result<SteinWeissReport> {
    unit(t, "t")?;
    let k0 = weighted_norm(op, w0, p, opts, budget)?;
    let k1 = weighted_norm(op, w1, p, opts, budget)?;
    let mid = weighted_norm(op, &interpolated_weight(w0, w1, t)?, p, opts, budget)?;
    let bound = k0.value.powf(1.0 - t) * k1.value.powf(t);
    Ok(SteinWeissReport {
        k0: k0.value,
        k1: k1.value,
        measured: mid.value,
        bound,
        slack: bound - mid.value,
        converged: k0.converged && k1.converged && mid.converged,
    })
}

/// `(gamma, c F([W]), gamma^(1-t) (c F([W]))^t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundChain {
    pub gamma: f64,
    pub c_f: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult {
    pub big_w: Weight,
    pub t: f64,
    pub characteristic_of_w: CharacteristicReport,
}

impl FactorizationResult {
    /// `w0^(1-t) W^t`, normalized.
    pub fn reconstruct(&self, w0: &Weight) -> Result<Weight> {
        let t = self.t;
        let log = w0.log().zip_with(&self.big_w.log(), |a, b| (1.0 - t) * a + t * b)?;
        Ok(Weight::exp_of(&log)?.normalized())
    }

    /// Continuity chain with `F = czo_bound_f(p, .)` at the measured
    /// characteristic of `W`.
    pub fn bound_chain(&self, gamma: f64, c: f64, p: f64) -> Result<BoundChain> {
        let c_f = c * czo_bound_f(p, self.characteristic_of_w.value)?;
        let bound = continuity_upper_bound(gamma, c, c_f / c, self.t)?;
        Ok(BoundChain { gamma, c_f, bound })
    }
}

/// `W = (w / w0)^(1/t) w0`, normalized, with its `A_p` characteristic.
pub fn factorize(w: &Weight, w0: &Weight, t: f64, p: f64, analyzer: &Analyzer) -> Result<FactorizationResult> {
    if !(t > 0.0 && t <= 1.0) {
        return param(format!("t must lie in (0,1], got {t}"));
    }
    if w.grid() != w0.grid() {
        return param("factorize: weights live on different grids");
    }
    let log = w.log().zip_with(&w0.log(), |a, b| (a - b) / t + b)?;
    // exp_of reports the overflow as a range error
    let big_w = Weight::exp_of(&log)?.normalized();
    let characteristic_of_w = analyzer.ap(&big_w, p)?;
    Ok(FactorizationResult { big_w, t, characteristic_of_w })
}

pub fn t_of_delta(delta: f64, c0: f64) -> Result<f64> {
    if !(delta > 0.0) || !(c0 > 0.0) {
        return param(format!("delta and c0 must be positive, got {delta}, {c0}"));
    }
    let t = delta / c0;
    if t > 1.0 {
        return param(format!("t = delta / c0 = {t} exceeds 1"));
    }
    Ok(t)
}

pub const DEFAULT_C0: f64 = 0.25;

/// `gamma^(1-t) (c F)^t`.
pub fn continuity_upper_bound(gamma: f64, c: f64, f_of_w: f64, t: f64) -> Result<f64> {
    if !(gamma > 0.0 && c > 0.0 && f_of_w > 0.0) {
        return param("continuity bound inputs must be positive");
    }
    unit(t, "t")?;
    Ok(gamma.powf(1.0 - t) * (c * f_of_w).powf(t))
}
