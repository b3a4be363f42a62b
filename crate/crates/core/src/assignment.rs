//! Exact linear assignment (Hungarian method, shortest augmenting paths with
//! potentials), `O(n^3)`.

use crate::error::{Error, Result};

/// Optimal permutation for a square cost matrix given row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `row_to_col[i]` is the column matched to row `i`.
    pub row_to_col: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost perfect matching of an `n x n` matrix.
pub fn solve(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    if n == 0 {
        return Err(Error::EmptyInput("assignment needs a nonempty matrix".into()));
    }
    if let Some(row) = cost.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch(row.len(), n));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::NumericalDomain("non-finite assignment cost".into()));
    }

    // 1-based potentials; column 0 is the virtual root of each augmenting tree
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[matched_row[j] - 1] = j - 1;
    }
    let total = row_to_col.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(Assignment { row_to_col, cost: total })
}
