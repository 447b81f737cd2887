//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities, then asserts.

use std::time::{Duration, Instant};

use muck_core::characteristic::gj_lambda_star;
use muck_core::experiments::{
    bridge_fit, continuity_sweep, convexity_trials, default_deltas, duality_trials, factorization_trials, haar,
    log_spaced, noncompleteness_demo, ramp, sharpness_family, sharpness_search, stein_weiss_trials, theorem2_sweep,
    ContinuityResult, FamilyKind, SharpnessResult, SweepContext, WeightFamily,
};
use muck_core::norms::weighted_l2_norm;
use muck_core::weight::power_weight;
use muck_core::{
    Analyzer, CircleGrid, Exec, Grid, GridFunction, NormOptions, OperatorSpec, SignPattern, Weight,
};

fn report(id: &str, name: &str, pass: bool, elapsed: Duration, limit_secs: f64, detail: &str) {
    let within = elapsed.as_secs_f64() < limit_secs;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    println!(
        "criterion {id} [{verdict}] {name}: {detail} ({:.2}s, limit {limit_secs}s)",
        elapsed.as_secs_f64()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its runtime limit");
}

fn grid(n: u32) -> Grid {
    Grid::new(n).unwrap()
}

#[test]
fn criterion_01_identity_suite() {
    let start = Instant::now();
    let g = grid(12);
    let one = Weight::constant(g, 1.0).unwrap();
    let an = Analyzer::shifted();
    let chars = [
        an.a1(&one).value,
        an.ap(&one, 2.0).unwrap().value,
        an.ap(&one, 3.5).unwrap().value,
        an.ainfty(&one).value,
    ];
    let bmo = an.bmo(&one.log()).value;
    let chars_ok = chars.iter().all(|c| (c - 1.0).abs() <= 1e-12) && bmo.abs() <= 1e-12;

    let c = CircleGrid::new(4096).unwrap();
    let ops = [
        OperatorSpec::PeriodicHilbert(c),
        OperatorSpec::RieszProjection(c),
        OperatorSpec::martingale(SignPattern::identity(g)),
        OperatorSpec::martingale(SignPattern::alternating(g)),
        OperatorSpec::martingale(SignPattern::alternating(g).negated()),
        OperatorSpec::martingale(SignPattern::random(g, 11)),
    ];
    let opts = NormOptions::default();
    let worst = ops
        .iter()
        .map(|op| (weighted_l2_norm(op, &one, &opts).unwrap().value - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = chars_ok && worst <= 1e-9;
    report(
        "1",
        "identity suite",
        pass,
        start.elapsed(),
        1.0,
        &format!("characteristics {chars:?}, bmo {bmo:e}, worst |norm - 1| = {worst:e}"),
    );
}

#[test]
fn criterion_02_two_valued_and_gj() {
    let start = Instant::now();
    let an = Analyzer::dyadic();
    let g = grid(8);
    let w = Weight::from_fn(g, |x| if x < 0.5 { 2.0 } else { 1.0 }).unwrap();
    // independent closed forms on the root interval
    let a2 = (1.5f64 * 0.75) / 1.0;
    let ainf = 1.5 / 2f64.sqrt();
    let a1 = 1.5;
    let bmo = 2f64.ln() / 2.0;
    let got = [an.ap(&w, 2.0).unwrap().value, an.ainfty(&w).value, an.a1(&w).value, an.bmo(&w.log()).value];
    let oracle = [a2, ainf, a1, bmo];
    let displayed = [1.125, 1.060660, 1.5, 0.346574];
    let closed_ok = got.iter().zip(&oracle).all(|(x, y)| (x - y).abs() <= 1e-12)
        && got.iter().zip(&displayed).all(|(x, y)| (x - y).abs() <= 1e-6);

    let f = GridFunction::from_fn(grid(10), |x| if x < 0.5 { 1.0 } else { -1.0 }).unwrap();
    let lambda = gj_lambda_star(&an, &f, 2.0).unwrap();
    let gj_oracle = 2f64.sqrt().acosh();
    let gj_ok = (lambda - gj_oracle).abs() <= 1e-5 && (gj_oracle - 0.881374).abs() < 1e-6;
    report(
        "2a",
        "two-valued closed forms and gj threshold",
        closed_ok && gj_ok,
        start.elapsed(),
        10.0,
        &format!("[A2, Ainf, A1, bmo] = {got:?}; lambda* = {lambda:.9} vs {gj_oracle:.9}"),
    );
}

fn power_weight_case(label: &str, alpha: f64) {
    let start = Instant::now();
    let w = power_weight(alpha, grid(12)).unwrap();
    let value = Analyzer::dyadic().ap(&w, 2.0).unwrap().value;
    let limit = 1.0 / (1.0 - alpha * alpha);
    let rel = (value - limit) / limit;
    report(
        label,
        &format!("power weight A2 at N=12, alpha={alpha}"),
        rel.abs() <= 0.02,
        start.elapsed(),
        10.0,
        &format!("A2 = {value:.6}, 1/(1-alpha^2) = {limit:.6}, relative error {:+.3}%", 100.0 * rel),
    );
}

#[test]
fn criterion_02_power_weight_quarter() {
    power_weight_case("2b", 0.25);
}

#[test]
fn criterion_02_power_weight_half() {
    power_weight_case("2c", 0.5);
}

#[test]
fn criterion_02_power_weight_three_quarters() {
    power_weight_case("2d", 0.75);
}

#[test]
fn criterion_03_algebraic_identities() {
    let start = Instant::now();
    let ctx = SweepContext::default();
    let conv = convexity_trials(100, 31, 10, &ctx).unwrap();
    let dual = duality_trials(100, 32, 10, &ctx).unwrap();
    let conv_fail = conv.iter().filter(|c| !c.outcome.ok).count();
    let dual_fail = dual.iter().filter(|c| !c.outcome.ok).count();
    let worst_dual = dual
        .iter()
        .map(|c| (c.outcome.lhs - c.outcome.rhs).abs() / c.outcome.rhs)
        .fold(0.0, f64::max);
    report(
        "3",
        "duality and convexity identities",
        conv_fail == 0 && dual_fail == 0,
        start.elapsed(),
        30.0,
        &format!(
            "convexity failures {conv_fail}/100, duality failures {dual_fail}/100, worst duality rel err {worst_dual:e}"
        ),
    );
}

fn theorem2_table(exec: Exec) -> (String, usize, f64, usize) {
    let g = grid(10);
    let one = Weight::constant(g, 1.0).unwrap();
    let fam = WeightFamily::new(FamilyKind::RandomCells { seed: 2024, amplitude: 1.0, count: 200 }, one).unwrap();
    let ctx = SweepContext { analyzer: Analyzer::dyadic().with_exec(exec), ..SweepContext::default() };
    let res = theorem2_sweep(&log_spaced(1e-4, 0.5, 200), &fam, &ctx).unwrap();
    let flagged = res.rows.iter().filter(|r| !r.converged).count();
    (res.to_table().to_csv().unwrap(), res.violations(), res.max_ratio_sqrt(), flagged)
}

#[test]
fn criterion_04_theorem2_sweep() {
    let start = Instant::now();
    let (_, violations, max_ratio, flagged) = theorem2_table(Exec::default());
    report(
        "4",
        "bmo(log w) <= 32 sqrt(delta) on 200 weights",
        violations == 0 && max_ratio <= 32.0 && flagged == 0,
        start.elapsed(),
        60.0,
        &format!("violations {violations}, max bmo/sqrt(delta) = {max_ratio:.4}, unconverged rows {flagged}"),
    );
}

fn stein_weiss_table(exec: Exec) -> (String, usize, f64) {
    let ctx = SweepContext { analyzer: Analyzer::dyadic().with_exec(exec), ..SweepContext::default() };
    let trials = stein_weiss_trials(50, 77, 8, &ctx).unwrap();
    let bad = trials.iter().filter(|t| t.slack < -1e-8).count();
    let min_slack = trials.iter().map(|t| t.slack).fold(f64::INFINITY, f64::min);
    (muck_core::experiments::SteinWeissTrial::table(&trials).to_csv().unwrap(), bad, min_slack)
}

#[test]
fn criterion_05_stein_weiss() {
    let start = Instant::now();
    let (_, bad, min_slack) = stein_weiss_table(Exec::default());
    report(
        "5",
        "interpolation bound on 50 random trials",
        bad == 0,
        start.elapsed(),
        120.0,
        &format!("violations {bad}/50, min slack {min_slack:e}"),
    );
}

fn continuity_runs(exec: Exec) -> Vec<ContinuityResult> {
    let g = grid(10);
    let ctx = SweepContext { analyzer: Analyzer::dyadic().with_exec(exec), ..SweepContext::default() };
    let op = OperatorSpec::martingale(SignPattern::alternating(g));
    [Weight::constant(g, 1.0).unwrap(), power_weight(0.5, g).unwrap()]
        .iter()
        .map(|w0| {
            let fam = WeightFamily::new(FamilyKind::ExpBmoDirection(ramp(g)), w0.clone()).unwrap();
            continuity_sweep(&op, w0, &fam, &default_deltas(), 2.0, &ctx).unwrap()
        })
        .collect()
}

#[test]
fn criterion_06_continuity() {
    let start = Instant::now();
    let runs = continuity_runs(Exec::default());
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, r) in ["w0=1", "w0=pw(0.5)"].iter().zip(&runs) {
        let fit = r.rate_fit().unwrap();
        let env = r.envelope().unwrap();
        let small = r.rows[0].gap / r.norm_at_w0;
        let decreasing = r.rows.windows(2).all(|w| w[0].gap < w[1].gap) && r.rows.iter().all(|x| x.converged);
        let ok = small < 1e-3
            && (0.9..=1.3).contains(&fit.slope)
            && fit.r_squared >= 0.98
            && env.holds(0.05)
            && decreasing
            && r.tail_monotone(1e-10);
        pass &= ok;
        detail.push(format!(
            "{name}: norm {:.6}, small gap/norm {small:.2e}, slope {:.4}, r2 {:.5}, envelope {:.4}",
            r.norm_at_w0, fit.slope, fit.r_squared, env.worst
        ));
    }
    report("6", "continuity rate of the martingale transform", pass, start.elapsed(), 300.0, &detail.join("; "));
}

struct Sharpness {
    hilbert: Vec<SharpnessResult>,
    riesz: Vec<SharpnessResult>,
    bridge: muck_core::experiments::BridgeResult,
}

fn sharpness_runs(exec: Exec) -> Sharpness {
    let c = CircleGrid::new(512).unwrap();
    let fam = sharpness_family(Weight::constant(c.grid(), 1.0).unwrap());
    let ctx = SweepContext { analyzer: Analyzer::dyadic().with_exec(exec), ..SweepContext::default() };
    let h = OperatorSpec::PeriodicHilbert(c);
    let p = OperatorSpec::RieszProjection(c);
    let grid3 = [0.025, 0.05, 0.1];
    let run = |op: &OperatorSpec| {
        grid3.iter().map(|&d| sharpness_search(op, d, &fam, 64, &ctx).unwrap()).collect::<Vec<_>>()
    };
    let bridge = bridge_fit(&h, &[0.00625, 0.0125, 0.025, 0.05, 0.1], &fam, 64, &ctx).unwrap();
    Sharpness { hilbert: run(&h), riesz: run(&p), bridge }
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[test]
fn criterion_07_sharpness() {
    let start = Instant::now();
    let s = sharpness_runs(Exec::default());
    let h: Vec<f64> = s.hilbert.iter().map(|r| r.gap / r.delta.sqrt()).collect();
    let p: Vec<f64> = s.riesz.iter().map(|r| r.gap / r.delta).collect();
    let (vc, vm) = (s.bridge.vs_char.slope, s.bridge.vs_metric.slope);
    let pass = h.iter().chain(&p).all(|x| *x > 0.0)
        && spread(&h) <= 2.0
        && spread(&p) <= 2.0
        && (0.35..=0.65).contains(&vc)
        && (0.9..=1.3).contains(&vm);
    report(
        "7",
        "sharpness proxies on the 512-point circle",
        pass,
        start.elapsed(),
        600.0,
        &format!("H gap/sqrt(d) {h:.4?}; P+ gap/d {p:.4?}; bridge slopes {vc:.4} (char), {vm:.4} (metric)"),
    );
}

#[test]
fn criterion_08_noncompleteness() {
    let start = Instant::now();
    let r: Vec<f64> = (1..=6).map(|n| -1.0 + (-(n as f64)).exp2()).collect();
    let res = noncompleteness_demo(&r, grid(16), &Analyzer::dyadic()).unwrap();
    let a1: Vec<f64> = res.rows.iter().map(|x| x.a1_char).collect();
    let pass = res.max_proportionality_error <= 1e-10 && res.a1_strictly_increasing() && res.a1_growth() >= 10.0;
    report(
        "8",
        "non-completeness of the power family",
        pass,
        start.elapsed(),
        60.0,
        &format!(
            "proportionality error {:e}, A1 {a1:.4?}, growth {:.2}",
            res.max_proportionality_error,
            res.a1_growth()
        ),
    );
}

#[test]
fn criterion_09_factorization() {
    let start = Instant::now();
    let trials = factorization_trials(100, 99, 8, &SweepContext::default()).unwrap();
    let rec = trials.iter().map(|t| t.reconstruction_error).fold(0.0, f64::max);
    let sc = trials.iter().map(|t| t.scaling_error).fold(0.0, f64::max);
    report(
        "9",
        "factorization reconstruction and metric scaling",
        rec <= 1e-10 && sc <= 1e-10,
        start.elapsed(),
        30.0,
        &format!("max reconstruction error {rec:e}, max scaling error {sc:e}"),
    );
}

fn tables_4_to_7(exec: Exec) -> Vec<String> {
    let mut out = vec![theorem2_table(exec).0, stein_weiss_table(exec).0];
    out.extend(continuity_runs(exec).iter().map(|r| r.to_table().to_csv().unwrap()));
    let s = sharpness_runs(exec);
    out.push(SharpnessResult::to_table(&s.hilbert).to_csv().unwrap());
    out.push(SharpnessResult::to_table(&s.riesz).to_csv().unwrap());
    out.push(s.bridge.to_table().to_csv().unwrap());
    out
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let first = tables_4_to_7(Exec::default());
    let second = tables_4_to_7(Exec::default());
    let sequential = tables_4_to_7(Exec::Sequential);
    let same = first == second;
    let same_seq = first == sequential;
    report(
        "10",
        "byte-identical CSVs for criteria 4-7",
        same && same_seq,
        start.elapsed(),
        1800.0,
        &format!(
            "{} tables, {} bytes; repeat identical: {same}; sequential identical: {same_seq}",
            first.len(),
            first.iter().map(String::len).sum::<usize>()
        ),
    );
}

#[test]
fn haar_direction_two_valued_member() {
    // the family member at scale ln2/2 along the root Haar function is the
    // (2,1) weight up to normalisation
    let g = grid(6);
    let fam = WeightFamily::new(FamilyKind::ExpBmoDirection(haar(g)), Weight::constant(g, 1.0).unwrap()).unwrap();
    let w = fam.member(&haar(g), 2f64.ln() / 2.0).unwrap();
    assert!((Analyzer::dyadic().ap(&w, 2.0).unwrap().value - 1.125).abs() < 1e-12);
}
