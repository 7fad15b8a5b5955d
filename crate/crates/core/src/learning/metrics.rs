//! Partition agreement metrics: optimal-assignment accuracy and NMI.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn contingency(pred: &[usize], truth: &[usize]) -> Result<DMatrix<f64>> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("pred", "label vectors must be non-empty"));
    }
    let rows = pred.iter().max().unwrap() + 1;
    let cols = truth.iter().max().unwrap() + 1;
    let mut table = DMatrix::zeros(rows, cols);
    for (&p, &t) in pred.iter().zip(truth) {
        table[(p, t)] += 1.0;
    }
    Ok(table)
}

/// Minimum-cost assignment on a square cost matrix via the shortest
/// augmenting path algorithm with potentials; returns the column assigned to
/// each row.
fn min_cost_assignment(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    debug_assert_eq!(n, cost.ncols());
    // 1-based potentials; p[j] = row matched to column j (0 = none)
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Best fraction of agreeing labels over all injective mappings from
/// predicted clusters to true classes, solved exactly as an assignment
/// problem on the contingency table.
pub fn clustering_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let side = table.nrows().max(table.ncols());
    // negated counts padded to a square minimization problem
    let cost = DMatrix::from_fn(side, side, |r, c| {
        if r < table.nrows() && c < table.ncols() {
            -table[(r, c)]
        } else {
            0.0
        }
    });
    let assignment = min_cost_assignment(&cost);
    let mut matched = 0.0;
    for (r, &c) in assignment.iter().enumerate() {
        if r < table.nrows() && c < table.ncols() {
            matched += table[(r, c)];
        }
    }
    Ok(matched / pred.len() as f64)
}

fn entropy(counts: impl Iterator<Item = f64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0.0)
        .map(|c| {
            let p = c / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(pred; truth) / sqrt(H(pred) H(truth))`
/// with natural-log entropies. Two single-cluster partitions score 1;
/// exactly one degenerate partition scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = pred.len() as f64;
    let row_sums: Vec<f64> = (0..table.nrows()).map(|r| table.row(r).sum()).collect();
    let col_sums: Vec<f64> = (0..table.ncols()).map(|c| table.column(c).sum()).collect();

    let h_pred = entropy(row_sums.iter().copied(), n);
    let h_truth = entropy(col_sums.iter().copied(), n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_truth == 0.0 {
        return Ok(0.0);
    }

    let mut mi = 0.0;
    for r in 0..table.nrows() {
        for c in 0..table.ncols() {
            let joint = table[(r, c)];
            if joint > 0.0 {
                mi += (joint / n) * ((n * joint) / (row_sums[r] * col_sums[c])).ln();
            }
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}
