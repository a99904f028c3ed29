//! Paired comparison of result directories produced from the same scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::{read_records, write_csv, RunRecord};
use crate::error::{Error, Result};
use crate::metrics::mean_std;

/// Difference `other − baseline` at step `k`, paired by run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// Index of the compared directory; the baseline is directory 0.
    pub mode: usize,
    pub k: u32,
    pub ospa_diff_mean: f64,
    pub ospa_diff_std: f64,
    /// Difference of signed cardinality errors `n_est − n_true`.
    pub card_err_diff_mean: f64,
    pub card_err_diff_std: f64,
}

/// Compares every directory after the first against the first.
pub fn compare_records(sets: &[Vec<RunRecord>]) -> Result<Vec<ComparisonRow>> {
    let Some((base, rest)) = sets.split_first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for (m, other) in rest.iter().enumerate() {
        let mode = m + 1;
        if other.len() != base.len() {
            return Err(Error::ShapeMismatch(format!(
                "directory {mode} has {} records, baseline has {}",
                other.len(),
                base.len()
            )));
        }
        let mut steps: Vec<u32> = base.iter().map(|r| r.k).collect();
        steps.sort_unstable();
        steps.dedup();
        let mut diffs: Vec<(u32, f64, f64)> = Vec::with_capacity(base.len());
        for (a, b) in base.iter().zip(other) {
            if (a.run, a.k, a.n_true) != (b.run, b.k, b.n_true) {
                return Err(Error::ShapeMismatch(format!(
                    "directory {mode}: record (run {}, k {}, n_true {}) pairs with (run {}, k {}, n_true {})",
                    b.run, b.k, b.n_true, a.run, a.k, a.n_true
                )));
            }
            let card = (b.n_est as f64 - b.n_true as f64) - (a.n_est as f64 - a.n_true as f64);
            diffs.push((a.k, b.ospa - a.ospa, card));
        }
        for k in steps {
            let at = diffs.iter().filter(|d| d.0 == k);
            let (ospa_diff_mean, ospa_diff_std) = mean_std(at.clone().map(|d| d.1));
            let (card_err_diff_mean, card_err_diff_std) = mean_std(at.map(|d| d.2));
            out.push(ComparisonRow {
                mode,
                k,
                ospa_diff_mean,
                ospa_diff_std,
                card_err_diff_mean,
                card_err_diff_std,
            });
        }
    }
    Ok(out)
}

/// Reads `records.csv` from each directory and writes the comparison to `output`.
pub fn compare(dirs: &[&Path], output: &Path) -> Result<Vec<ComparisonRow>> {
    let sets = dirs.iter().map(|d| read_records(d)).collect::<Result<Vec<_>>>()?;
    let rows = compare_records(&sets)?;
    write_csv(output, &rows)?;
    Ok(rows)
}
