//! Weighted operator norms.
//!
//! `||T||_{L^p(w)}` equals the unweighted `l^p` norm of the conjugated
//! operator `A = W^(1/p) T W^(-1/p)`. At `p = 2` the top singular value of
//! `A` is found by Lanczos on `A*A` (or plain power iteration on request);
//! the returned value is always the realised ratio `||A y|| / ||y||`, so it
//! is a certified lower bound whatever the convergence status.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::grid::Family;
use crate::operators::{maximal, OperatorSpec};
use crate::weight::{conjugate, Weight};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NormMethod {
    #[default]
    Lanczos,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    /// Relative stopping tolerance.
    pub tol: f64,
    /// Cap on applications of `A*A` per run.
    pub max_iter: usize,
    pub method: NormMethod,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tol: 1e-10, max_iter: 100_000, method: NormMethod::Lanczos, seed: 0x5eed }
    }
}

impl NormOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_method(mut self, method: NormMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Function on the grid realising `value` as a norm ratio.
    pub certificate: Vec<Complex64>,
    pub iterations: usize,
    pub tol: f64,
    pub converged: bool,
}

type CVec = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn norm_p(a: &[Complex64], p: f64) -> f64 {
    let m = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    m * a.iter().map(|z| (z.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn scale(a: &mut [Complex64], c: f64) {
    a.iter_mut().for_each(|z| *z *= c);
}

/// `A = diag(left) T diag(right)` with `left = w^(1/p)`, `right = w^(-1/p)`.
struct Conjugated<'a> {
    op: &'a OperatorSpec,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl<'a> Conjugated<'a> {
    fn new(op: &'a OperatorSpec, w: &Weight, p: f64) -> Result<Self> {
        if w.values().len() != op.dim() {
            return param(format!(
                "{} acts on {} cells, weight has {}",
                op.tag(),
                op.dim(),
                w.values().len()
            ));
        }
        let left: Vec<f64> = w.values().iter().map(|v| v.powf(1.0 / p)).collect();
        let right = left.iter().map(|v| 1.0 / v).collect();
        Ok(Conjugated { op, left, right })
    }

    fn mul(d: &[f64], x: &[Complex64]) -> CVec {
        d.iter().zip(x).map(|(a, z)| z * a).collect()
    }

    fn apply(&self, x: &[Complex64]) -> CVec {
        let y = self.op.apply(&Self::mul(&self.right, x)).expect("dimension checked");
        Self::mul(&self.left, &y)
    }

    fn adjoint(&self, y: &[Complex64]) -> CVec {
        let x = self.op.apply_adjoint(&Self::mul(&self.left, y)).expect("linear operator");
        Self::mul(&self.right, &x)
    }

    fn normal(&self, x: &[Complex64]) -> CVec {
        self.adjoint(&self.apply(x))
    }

    fn dim(&self) -> usize {
        self.left.len()
    }
}

fn random_start(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::from(rng.random_range(-1.0..1.0))).collect()
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn top_eigenpair(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], vec![1.0]);
    }
    let off = |i: usize| if i < k - 1 { beta[i].abs() } else { 0.0 };
    let prev = |i: usize| if i > 0 { beta[i - 1].abs() } else { 0.0 };
    let mut lo = (0..k).map(|i| alpha[i] - off(i) - prev(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| alpha[i] + off(i) + prev(i)).fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo).abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    hi += spread * 1e-14;
    lo -= spread * 1e-14;
    // number of eigenvalues below x
    let count = |x: f64| {
        let mut c = 0;
        let mut q = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            q = alpha[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * spread;
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    while hi - lo > 4.0 * f64::EPSILON * spread {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let diag: Vec<f64> = alpha.iter().map(|a| a - lambda).collect();
    let mut v = vec![1.0; k];
    for _ in 0..3 {
        solve_tridiagonal(&diag, beta, &mut v, spread);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
    }
    (lambda, v)
}

/// In-place solve of a symmetric tridiagonal system by Gaussian elimination
/// with partial pivoting. Exact zero pivots are nudged to `eps * scale`.
fn solve_tridiagonal(diag: &[f64], off: &[f64], b: &mut [f64], scale: f64) {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut dl = off.to_vec();
    let mut du = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    let tiny = f64::EPSILON * scale;
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swapped[i] = true;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    for i in 0..n - 1 {
        if swapped[i] {
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        } else {
            b[i + 1] -= dl[i] * b[i];
        }
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

struct Run {
    vector: CVec,
    converged: bool,
}

const RESTART: usize = 48;

/// Lanczos with full reorthogonalisation and explicit restarts from the
/// current Ritz vector.
fn lanczos(a: &Conjugated, start: CVec, tol: f64, cap: usize, used: &mut usize) -> Run {
    let n = a.dim();
    let m = RESTART.min(n);
    let mut q = start;
    loop {
        let nq = norm2(&q);
        if nq == 0.0 {
            return Run { vector: q, converged: true };
        }
        scale(&mut q, 1.0 / nq);
        let mut basis: Vec<CVec> = Vec::with_capacity(m);
        let (mut alpha, mut beta) = (Vec::with_capacity(m), Vec::with_capacity(m));
        loop {
            if *used >= cap {
                let ritz = if basis.is_empty() { q } else { ritz_vector(&basis, &top_eigenpair(&alpha, &beta).1) };
                return Run { vector: ritz, converged: false };
            }
            let mut z = a.normal(&q);
            *used += 1;
            let al = dot(&q, &z).re;
            basis.push(std::mem::take(&mut q));
            alpha.push(al);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &z);
                    z.iter_mut().zip(v).for_each(|(zi, vi)| *zi -= c * vi);
                }
            }
            let b = norm2(&z);
            let (theta, s) = top_eigenpair(&alpha, &beta);
            let residual = b * s[s.len() - 1].abs();
            let exhausted = basis.len() == n || b <= 1e-13 * theta.abs().max(f64::MIN_POSITIVE);
            if residual <= tol * theta.abs() || exhausted {
                return Run { vector: ritz_vector(&basis, &s), converged: true };
            }
            if basis.len() == m {
                q = ritz_vector(&basis, &s);
                break;
            }
            beta.push(b);
            scale(&mut z, 1.0 / b);
            q = z;
        }
    }
}

fn ritz_vector(basis: &[CVec], s: &[f64]) -> CVec {
    let mut y = vec![Complex64::default(); basis[0].len()];
    for (v, &c) in basis.iter().zip(s) {
        y.iter_mut().zip(v).for_each(|(yi, vi)| *yi += vi * c);
    }
    y
}

fn power(a: &Conjugated, start: CVec, tol: f64, cap: usize, used: &mut usize) -> Run {
    let mut v = start;
    let nv = norm2(&v);
    scale(&mut v, 1.0 / nv);
    let mut previous = 0.0;
    while *used < cap {
        let mut z = a.normal(&v);
        *used += 1;
        let theta = dot(&v, &z).re;
        let nz = norm2(&z);
        if nz == 0.0 || (theta - previous).abs() <= tol * theta.abs() {
            return Run { vector: v, converged: true };
        }
        previous = theta;
        scale(&mut z, 1.0 / nz);
        v = z;
    }
    Run { vector: v, converged: false }
}

fn check_common(op: &OperatorSpec, tol: f64) -> Result<()> {
    if !op.is_linear() {
        return param(format!("{} is not linear; use the L^p ascent", op.tag()));
    }
    if !(tol > 0.0) {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// `||T||_{L^2(w) -> L^2(w)}`.
pub fn weighted_l2_norm(op: &OperatorSpec, w: &Weight, opts: &NormOptions) -> Result<NormEstimate> {
    check_common(op, opts.tol)?;
    let a = Conjugated::new(op, w, 2.0)?;
    let n = a.dim();
    let mut used = 0;
    let mut best: Option<(f64, CVec)> = None;
    let mut converged = false;
    for attempt in 0..2u64 {
        let start = random_start(n, opts.seed.wrapping_add(attempt));
        let run = match opts.method {
            NormMethod::Lanczos => lanczos(&a, start, opts.tol, opts.max_iter, &mut used),
            NormMethod::Power => power(&a, start, opts.tol, opts.max_iter, &mut used),
        };
        converged |= run.converged;
        let value = norm2(&a.apply(&run.vector)) / norm2(&run.vector);
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, run.vector));
        }
        // the second seed only guards against a stalled first run
        if run.converged && opts.method == NormMethod::Lanczos {
            break;
        }
    }
    let (value, y) = best.expect("at least one run");
    let certificate = Conjugated::mul(&a.right, &y);
    Ok(NormEstimate { value, certificate, iterations: used, tol: opts.tol, converged })
}

/// `||T f||_{L^p(w)} / ||f||_{L^p(w)}` evaluated directly.
pub fn weighted_ratio(op: &OperatorSpec, w: &Weight, p: f64, f: &[Complex64]) -> Result<f64> {
    let tf = op.apply(f)?;
    if w.values().len() != f.len() {
        return param("weight and function live on different grids");
    }
    let wnorm = |v: &[Complex64]| {
        let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * v.iter().zip(w.values()).map(|(z, wi)| (z.norm() / m).powf(p) * wi).sum::<f64>().powf(1.0 / p)
    };
    Ok(wnorm(&tf) / wnorm(f))
}

/// `|y|^(p-2) y / ||y||_p^(p-1)`: the norming functional of `y` in `l^p`.
fn dual_map(y: &[Complex64], p: f64) -> CVec {
    let ny = norm_p(y, p);
    if ny == 0.0 {
        return vec![Complex64::default(); y.len()];
    }
    y.iter()
        .map(|z| {
            let r = z.norm() / ny;
            if r == 0.0 {
                Complex64::default()
            } else {
                z / z.norm() * r.powf(p - 1.0)
            }
        })
        .collect()
}

/// Gradient of `||A x||_p` at `x` with `y = A x`, normalised so that
/// `<grad, x> = ||y||_p`.
fn ascent_direction(a: &Conjugated, x: &[Complex64], y: &[Complex64], p: f64) -> CVec {
    let d = dual_map(y, p);
    match a.op {
        OperatorSpec::DyadicMaximal { grid, family } => {
            let u: Vec<f64> = x.iter().zip(&a.right).map(|(z, r)| z.norm() * r).collect();
            let (_, active) = maximal(*grid, *family, &u);
            let n = grid.cells();
            // spread v_i / |I(i)| over the active interval of each cell
            let mut diff = vec![0.0; n + 1];
            for (i, iv) in active.iter().enumerate() {
                let v = d[i].re * a.left[i];
                let range = iv.cell_range(grid);
                let c = v / range.len() as f64;
                diff[range.start] += c;
                diff[range.end] -= c;
            }
            let mut acc = 0.0;
            (0..n)
                .map(|j| {
                    acc += diff[j];
                    Complex64::from(acc * a.right[j])
                })
                .collect()
        }
        _ => a.adjoint(&d),
    }
}

/// Certified lower bound for `||T||_{L^p(w) -> L^p(w)}`.
///
/// Runs the `l^p` power method (a fixed-point ascent on the norming
/// functionals) from several starts: the constant function, the `L^2`
/// extremal of the same conjugated operator when `T` is linear, and seeded
/// random vectors. `budget` bounds the total number of operator
/// applications; the best realised ratio wins.
pub fn weighted_lp_norm(
    op: &OperatorSpec,
    w: &Weight,
    p: f64,
    budget: usize,
    opts: &NormOptions,
) -> Result<NormEstimate> {
    let q = conjugate(p)?;
    if budget == 0 {
        return param("budget must be positive");
    }
    if p == 2.0 && op.is_linear() {
        let capped = opts.with_max_iter((budget / 2).max(1));
        let mut est = weighted_l2_norm(op, w, &capped)?;
        est.iterations *= 2;
        return Ok(est);
    }
    let a = Conjugated::new(op, w, p)?;
    let n = a.dim();
    let mut used = 0;

    let mut starts: Vec<CVec> = vec![vec![Complex64::from(1.0); n]];
    if op.is_linear() {
        let capped = opts.with_max_iter((budget / 8).max(1));
        let l2 = weighted_l2_norm(op, w, &capped)?;
        used += 2 * l2.iterations;
        starts.push(Conjugated::mul(&a.left, &l2.certificate));
    }
    for k in 0..4 {
        let mut s = random_start(n, opts.seed.wrapping_add(100 + k));
        if !op.is_linear() {
            s.iter_mut().for_each(|z| *z = Complex64::from(z.norm()));
        }
        starts.push(s);
    }

    let mut best = (f64::NEG_INFINITY, CVec::new(), false);
    let count = starts.len();
    for (k, mut x) in starts.into_iter().enumerate() {
        let share = (budget.saturating_sub(used)) / (count - k);
        let limit = used + share.max(1);
        let nx = norm_p(&x, p);
        if nx == 0.0 {
            continue;
        }
        scale(&mut x, 1.0 / nx);
        let mut converged = false;
        while used < limit {
            let y = a.apply(&x);
            used += 1;
            let ratio = norm_p(&y, p);
            if ratio > best.0 {
                best = (ratio, x.clone(), false);
            }
            if used >= limit {
                break;
            }
            let z = ascent_direction(&a, &x, &y, p);
            used += 1;
            if norm_p(&z, q) - ratio <= opts.tol * ratio {
                converged = true;
                break;
            }
            x = dual_map(&z, q);
        }
        if converged && best.1 == x {
            best.2 = true;
        }
        if used >= budget {
            break;
        }
    }
    let (value, x, converged) = best;
    let certificate = Conjugated::mul(&a.right, &x);
    Ok(NormEstimate { value: value.max(0.0), certificate, iterations: used, tol: opts.tol, converged })
}

/// Exact `L^2` engine for linear operators at `p = 2`, the certified `L^p`
/// lower bound otherwise.
pub fn weighted_norm(
    op: &OperatorSpec,
    w: &Weight,
    p: f64,
    opts: &NormOptions,
    budget: usize,
) -> Result<NormEstimate> {
    if p == 2.0 && op.is_linear() {
        weighted_l2_norm(op, w, opts)
    } else {
        weighted_lp_norm(op, w, p, budget, opts)
    }
}

/// Convenience: the maximal operator of a family on the weight's grid.
pub fn maximal_operator(w: &Weight, family: Family) -> OperatorSpec {
    OperatorSpec::DyadicMaximal { grid: w.grid(), family }
}
