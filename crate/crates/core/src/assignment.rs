//! Linear assignment: an optimal solver for rectangular cost matrices and
//! Murty's ranked enumeration of the best `k` assignments.
//!
//! Every row must be assigned to a distinct column; `rows <= cols`. Entries
//! equal to `+inf` are forbidden pairings.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.cols + col] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Column chosen for every row, and the summed cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub columns: Vec<usize>,
    pub cost: T,
}

/// Minimum-cost assignment of every row to a distinct column.
///
/// Shortest augmenting path with row/column potentials, `O(rows² · cols)`.
/// Returns `None` when no assignment avoids the forbidden (`+inf`) entries.
pub fn solve<T: Scalar>(cost: &CostMatrix<T>) -> Option<Assignment<T>> {
    let n = cost.rows;
    let m = cost.cols;
    assert!(n <= m, "assignment requires rows <= cols");
    if n == 0 {
        return Some(Assignment {
            columns: Vec::new(),
            cost: T::zero(),
        });
    }

    let inf = T::infinity();
    // 1-based with a virtual column 0, following the classic formulation.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![inf; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = inf);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let c = cost.get(i0 - 1, j - 1);
                if c < inf {
                    let reduced = c - u[i0] - v[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return None;
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else if minv[j] < inf {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            columns[owner[j] - 1] = j - 1;
        }
    }
    let total = columns
        .iter()
        .enumerate()
        .map(|(i, &j)| cost.get(i, j))
        .sum();
    Some(Assignment {
        columns,
        cost: total,
    })
}

struct Node<T> {
    cost: T,
    seq: usize,
    columns: Vec<usize>,
    /// Rows whose column is fixed in this subproblem, in branching order.
    fixed_rows: usize,
    forbidden: Vec<(usize, usize)>,
    order: Vec<usize>,
}

impl<T: Scalar> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Node<T> {}
impl<T: Scalar> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Node<T> {
    // BinaryHeap is a max-heap: invert so the cheapest, then earliest, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .as_f64()
            .total_cmp(&self.cost.as_f64())
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Solves the subproblem where rows `order[..fixed]` keep `columns` and the
/// listed pairs are forbidden.
fn solve_constrained<T: Scalar>(
    cost: &CostMatrix<T>,
    order: &[usize],
    fixed: usize,
    fixed_columns: &[usize],
    forbidden: &[(usize, usize)],
) -> Option<Assignment<T>> {
    let mut taken = vec![false; cost.cols];
    let mut fixed_cost = T::zero();
    for &row in &order[..fixed] {
        let col = fixed_columns[row];
        taken[col] = true;
        fixed_cost = fixed_cost + cost.get(row, col);
    }
    let free_rows = &order[fixed..];
    let free_cols: Vec<usize> = (0..cost.cols).filter(|&c| !taken[c]).collect();
    let mut sub = CostMatrix::from_fn(free_rows.len(), free_cols.len(), |i, j| {
        cost.get(free_rows[i], free_cols[j])
    });
    for &(row, col) in forbidden {
        if let (Some(i), Some(j)) = (
            free_rows.iter().position(|&r| r == row),
            free_cols.iter().position(|&c| c == col),
        ) {
            sub.set(i, j, T::infinity());
        }
    }
    let partial = solve(&sub)?;
    let mut columns = fixed_columns.to_vec();
    for (i, &j) in partial.columns.iter().enumerate() {
        columns[free_rows[i]] = free_cols[j];
    }
    Some(Assignment {
        columns,
        cost: fixed_cost + partial.cost,
    })
}

/// The `k` cheapest feasible assignments in non-decreasing cost order (Murty).
///
/// Ties are broken by discovery order, so the output is deterministic.
pub fn murty_k_best<T: Scalar>(cost: &CostMatrix<T>, k: usize) -> Vec<Assignment<T>> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let Some(first) = solve(cost) else {
        return out;
    };
    let n = cost.rows;
    let mut seq = 0usize;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        cost: first.cost,
        seq,
        columns: first.columns,
        fixed_rows: 0,
        forbidden: Vec::new(),
        order: (0..n).collect(),
    });

    while let Some(node) = heap.pop() {
        out.push(Assignment {
            columns: node.columns.clone(),
            cost: node.cost,
        });
        if out.len() == k {
            break;
        }
        // Partition the remaining solution space of this node: child t keeps
        // free rows [0, t) at the node's columns and forbids row t's column.
        for t in node.fixed_rows..n {
            let row = node.order[t];
            let mut forbidden = node.forbidden.clone();
            forbidden.push((row, node.columns[row]));
            // Prior forbids on rows now fixed are implied; drop them to keep the list short.
            forbidden.retain(|&(r, _)| !node.order[..t].contains(&r));
            if let Some(sol) = solve_constrained(cost, &node.order, t, &node.columns, &forbidden) {
                seq += 1;
                heap.push(Node {
                    cost: sol.cost,
                    seq,
                    columns: sol.columns,
                    fixed_rows: t,
                    forbidden,
                    order: node.order.clone(),
                });
            }
        }
    }
    out
}
