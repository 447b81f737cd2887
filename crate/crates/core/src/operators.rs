//! Concrete operators on grid functions.
//!
//! All operators act on complex cell vectors so Fourier multipliers and real
//! operators share one code path. The maximal operator is sublinear and only
//! supports [`OperatorSpec::apply`].

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Error, Result};
use crate::grid::{CircleGrid, Family, Grid, GridFunction, Interval, Pyramid};

/// One sign per dyadic interval of level `< N`, in canonical (heap) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        let n = signs.len() + 1;
        if !n.is_power_of_two() || n < 2 {
            return param(format!("{} signs is not 2^N - 1 for any N >= 1", signs.len()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return param("signs must be +1 or -1");
        }
        Ok(SignPattern { signs })
    }

    pub fn identity(grid: Grid) -> Self {
        SignPattern { signs: vec![1; grid.cells() - 1] }
    }

    /// `(-1)^j` for the `j`-th interval in canonical order; the root is `+1`.
    pub fn alternating(grid: Grid) -> Self {
        let signs = (0..grid.cells() - 1).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect();
        SignPattern { signs }
    }

    pub fn random(grid: Grid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs = (0..grid.cells() - 1).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        SignPattern { signs }
    }

    /// `identity`, `alternating`, `random` (uses `seed`) or an explicit
    /// `+-` string.
    pub fn named(name: &str, grid: Grid, seed: u64) -> Result<Self> {
        let pattern = match name {
            "identity" => Self::identity(grid),
            "alternating" => Self::alternating(grid),
            "random" => Self::random(grid, seed),
            other => other.parse()?,
        };
        if pattern.grid() != grid {
            return param(format!(
                "sign pattern has {} signs, grid needs {}",
                pattern.signs.len(),
                grid.cells() - 1
            ));
        }
        Ok(pattern)
    }

    pub fn negated(&self) -> Self {
        SignPattern { signs: self.signs.iter().map(|s| -s).collect() }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn grid(&self) -> Grid {
        let levels = (self.signs.len() + 1).trailing_zeros();
        Grid::new(levels).expect("validated at construction")
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Parameter(format!("bad sign character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        SignPattern::new(signs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `f -> <f> + sum_I eps_I <f, h_I> h_I`.
    MartingaleTransform(SignPattern),
    /// Fourier multiplier `-i sgn(k)`; zero at `k = 0` and at the Nyquist
    /// frequency, which makes it real and antisymmetric.
    PeriodicHilbert(CircleGrid),
    /// Fourier multiplier keeping `0 <= k < M/2`.
    RieszProjection(CircleGrid),
    /// `f -> max_{I ∋ x} <|f|>_I` over the family.
    DyadicMaximal { grid: Grid, family: Family },
    /// Row-major `dim x dim` matrix.
    DenseMatrix { dim: usize, entries: Vec<Complex64> },
}

impl OperatorSpec {
    pub fn martingale(signs: SignPattern) -> Self {
        OperatorSpec::MartingaleTransform(signs)
    }

    pub fn dense(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return param(format!("dense matrix needs {dim}x{dim} entries, got {}", entries.len()));
        }
        Ok(OperatorSpec::DenseMatrix { dim, entries })
    }

    /// Short tag used in file names and CSV rows.
    pub fn tag(&self) -> &'static str {
        match self {
            OperatorSpec::MartingaleTransform(_) => "mt",
            OperatorSpec::PeriodicHilbert(_) => "hilbert",
            OperatorSpec::RieszProjection(_) => "riesz",
            OperatorSpec::DyadicMaximal { .. } => "maximal",
            OperatorSpec::DenseMatrix { .. } => "dense",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::MartingaleTransform(s) => s.signs.len() + 1,
            OperatorSpec::PeriodicHilbert(c) | OperatorSpec::RieszProjection(c) => c.points(),
            OperatorSpec::DyadicMaximal { grid, .. } => grid.cells(),
            OperatorSpec::DenseMatrix { dim, .. } => *dim,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, OperatorSpec::DyadicMaximal { .. })
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return param(format!("{} acts on {} cells, got {len}", self.tag(), self.dim()));
        }
        Ok(())
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(f.len())?;
        Ok(match self {
            OperatorSpec::MartingaleTransform(s) => martingale(&s.signs, f),
            OperatorSpec::PeriodicHilbert(_) => multiplier(f, hilbert_symbol),
            OperatorSpec::RieszProjection(_) => multiplier(f, riesz_symbol),
            OperatorSpec::DyadicMaximal { grid, family } => {
                let abs: Vec<f64> = f.iter().map(|z| z.norm()).collect();
                maximal(*grid, *family, &abs).0.into_iter().map(Complex64::from).collect()
            }
            OperatorSpec::DenseMatrix { dim, entries } => entries
                .chunks_exact(*dim)
                .map(|row| row.iter().zip(f).map(|(a, x)| a * x).sum())
                .collect(),
        })
    }

    /// `T*` with respect to the unweighted inner product.
    pub fn apply_adjoint(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(f.len())?;
        match self {
            OperatorSpec::PeriodicHilbert(_) => {
                Ok(multiplier(f, hilbert_symbol).into_iter().map(|z| -z).collect())
            }
            OperatorSpec::DyadicMaximal { .. } => param("the maximal operator has no adjoint"),
            OperatorSpec::DenseMatrix { dim, entries } => {
                let mut out = vec![Complex64::default(); *dim];
                for (row, x) in entries.chunks_exact(*dim).zip(f) {
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a.conj() * x;
                    }
                }
                Ok(out)
            }
            _ => self.apply(f),
        }
    }

    /// Applies the operator to a real grid function.
    pub fn apply_function(&self, f: &GridFunction) -> Result<Vec<Complex64>> {
        let v: Vec<Complex64> = f.values().iter().map(|&x| Complex64::from(x)).collect();
        self.apply(&v)
    }
}

fn martingale(signs: &[i8], f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let levels = n.trailing_zeros() as usize;
    // pairwise means, finest level last
    let mut means: Vec<Vec<Complex64>> = vec![Vec::new(); levels + 1];
    means[levels] = f.to_vec();
    for l in (0..levels).rev() {
        means[l] = means[l + 1].chunks_exact(2).map(|c| (c[0] + c[1]) * 0.5).collect();
    }
    let mut out = vec![means[0][0]];
    for l in 0..levels {
        let mut next = Vec::with_capacity(out.len() * 2);
        for (k, v) in out.iter().enumerate() {
            let d = (means[l + 1][2 * k] - means[l + 1][2 * k + 1]) * 0.5;
            let e = f64::from(signs[(1 << l) - 1 + k]);
            next.push(v + d * e);
            next.push(v - d * e);
        }
        out = next;
    }
    out
}

fn hilbert_symbol(k: usize, m: usize) -> Complex64 {
    use std::cmp::Ordering::*;
    match (2 * k).cmp(&m) {
        _ if k == 0 => Complex64::default(),
        Less => Complex64::new(0.0, -1.0),
        Equal => Complex64::default(),
        Greater => Complex64::new(0.0, 1.0),
    }
}

fn riesz_symbol(k: usize, m: usize) -> Complex64 {
    Complex64::from(if 2 * k < m { 1.0 } else { 0.0 })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(m), p.plan_fft_inverse(m))
    })
}

fn multiplier(f: &[Complex64], symbol: fn(usize, usize) -> Complex64) -> Vec<Complex64> {
    let m = f.len();
    let (fwd, inv) = plans(m);
    let mut buf = f.to_vec();
    fwd.process(&mut buf);
    let scale = 1.0 / m as f64;
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= symbol(k, m) * scale;
    }
    inv.process(&mut buf);
    buf
}

/// Dyadic (optionally shifted) maximal function of a non-negative vector,
/// with the first interval in canonical order attaining the maximum at
/// each cell.
pub fn maximal(grid: Grid, family: Family, values: &[f64]) -> (Vec<f64>, Vec<Interval>) {
    let n = grid.cells();
    let levels = grid.levels();
    let sums = Pyramid::sums(grid, values);
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut active = vec![Interval::ROOT; n];
    let offer = |iv: Interval, best: &mut [f64], active: &mut [Interval]| {
        let m = sums.mean(&iv);
        for j in iv.cell_range(&grid) {
            if m > best[j] {
                best[j] = m;
                active[j] = iv;
            }
        }
    };
    for l in 0..=levels {
        for k in 0..1usize << l {
            offer(Interval::dyadic(l, k), &mut best, &mut active);
        }
    }
    if family.includes_shifted() {
        for l in 0..levels {
            for k in 0..1usize << l {
                let iv = Interval::shifted(l, k);
                if !iv.cell_range(&grid).is_empty() {
                    offer(iv, &mut best, &mut active);
                }
            }
        }
    }
    (best, active)
}

fn bound_domain(p: f64, x: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return param(format!("p must lie in (1, inf), got {p}"));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return param(format!("characteristic must be >= 1, got {x}"));
    }
    Ok(())
}

/// `x^max(1, 1/(p-1))`, the growth of Calderón–Zygmund norms in `[w]_{A_p}`.
pub fn czo_bound_f(p: f64, x: f64) -> Result<f64> {
    bound_domain(p, x)?;
    Ok(x.powf(f64::max(1.0, 1.0 / (p - 1.0))))
}

/// `x^(1/(p-1))`, the growth of the maximal operator norm in `[w]_{A_p}`.
pub fn maximal_bound_f(p: f64, x: f64) -> Result<f64> {
    bound_domain(p, x)?;
    Ok(x.powf(1.0 / (p - 1.0)))
}
