//! OSPA error and cardinality statistics.

use crate::assignment::{solve, CostMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaResult<T> {
    pub total: T,
    pub localization: T,
    pub cardinality: T,
    pub order: T,
    pub cutoff: T,
}

/// OSPA distance between two finite sets of planar positions.
///
/// `total^p = localization^p + cardinality^p`. Two empty sets are at distance zero.
pub fn ospa<T: Scalar>(x: &[[T; 2]], y: &[[T; 2]], order: T, cutoff: T) -> OspaResult<T> {
    assert!(order >= T::one(), "OSPA order must be at least 1");
    assert!(cutoff > T::zero(), "OSPA cutoff must be positive");
    let zero = OspaResult {
        total: T::zero(),
        localization: T::zero(),
        cardinality: T::zero(),
        order,
        cutoff,
    };
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return zero;
    }
    let cost = CostMatrix::from_fn(m, n, |i, j| {
        let dx = small[i][0] - large[j][0];
        let dy = small[i][1] - large[j][1];
        dx.hypot(dy).min(cutoff).powf(order)
    });
    let loc_sum = if m == 0 {
        T::zero()
    } else {
        solve(&cost).expect("finite cost matrix always has an assignment").cost
    };
    let card_sum = cutoff.powf(order) * T::of((n - m) as f64);
    let nf = T::of(n as f64);
    let inv_p = T::one() / order;
    OspaResult {
        total: ((loc_sum + card_sum) / nf).powf(inv_p),
        localization: (loc_sum / nf).powf(inv_p),
        cardinality: (card_sum / nf).powf(inv_p),
        ..zero
    }
}

/// Per-step summary of estimated cardinality across Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityStats {
    pub truth: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
}

/// `runs[r][k]` is the estimated cardinality of run `r` at step `k`.
pub fn cardinality_stats(runs: &[Vec<usize>], truth: &[usize]) -> Vec<CardinalityStats> {
    assert!(!runs.is_empty(), "at least one run is required");
    assert!(runs.iter().all(|r| r.len() == truth.len()), "every run must cover every step");
    truth
        .iter()
        .enumerate()
        .map(|(k, &n_true)| {
            let (mean, std) = mean_std(runs.iter().map(|r| r[k] as f64));
            CardinalityStats { truth: n_true, mean, std }
        })
        .collect()
}

/// Sample mean and sample standard deviation (n − 1 denominator).
pub fn mean_std(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
