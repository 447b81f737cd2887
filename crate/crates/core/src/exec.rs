//! Execution policy for the data-parallel inner loops.

/// How index-parallel work is scheduled.
///
/// `Parallel` uses the rayon global pool when the `parallel` feature is
/// enabled and silently degrades to `Sequential` otherwise. Results never
/// depend on the policy: reductions break ties by the lowest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// Below this many items the rayon split overhead dominates.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 512;

impl Exec {
    #[cfg(feature = "parallel")]
    fn parallel_for(self, n: usize) -> bool {
        self == Exec::Parallel && n >= PAR_THRESHOLD
    }

    /// `(0..n).map(f).collect()`, order preserved.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel_for(n) {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Map over a slice of independent jobs (used for sweeps where each job
    /// is expensive, so no size threshold applies).
    pub fn map_items<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Index and value of the maximum of `f` over `0..n`; the lowest index
    /// wins ties. Returns `None` for `n == 0`.
    pub fn argmax<F>(self, n: usize, f: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        if n == 0 {
            return None;
        }
        #[cfg(feature = "parallel")]
        if self.parallel_for(n) {
            return (0..n)
                .into_par_iter()
                .map(|i| (i, f(i)))
                .reduce_with(pick_first_max);
        }
        (0..n).map(|i| (i, f(i))).reduce(pick_first_max)
    }
}

fn pick_first_max(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    // NaN never wins.
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) || (a.1.is_nan() && !b.1.is_nan()) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_first_index_on_ties() {
        let vals: Vec<f64> = (0..5000).map(|i| if i % 1000 == 7 { 3.0 } else { 1.0 }).collect();
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(exec.argmax(vals.len(), |i| vals[i]), Some((7, 3.0)));
        }
        assert_eq!(Exec::Sequential.argmax(0, |_| 0.0), None);
    }

    #[test]
    fn map_preserves_order() {
        let out = Exec::Parallel.map(2000, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 2 * i));
    }
}
