//! Symmetric nonnegative sample similarities from regression coefficients.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::regression::CoefficientMatrix;

/// Symmetric nonnegative `n x n` similarity matrix. `normalized` records
/// whether the degree normalization has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    s: DMatrix<f64>,
    normalized: bool,
}

impl SimilarityMatrix {
    /// Wraps an existing matrix, enforcing exact symmetry, nonnegativity and
    /// finite entries.
    pub fn from_raw(s: DMatrix<f64>, normalized: bool) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::invalid("similarity", "matrix must be square"));
        }
        if s != s.transpose() {
            return Err(Error::invalid("similarity", "matrix must be symmetric"));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "similarity matrix".into(),
            });
        }
        if s.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("similarity", "entries must be nonnegative"));
        }
        Ok(Self { s, normalized })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Builds the similarity matrix from leave-one-out coefficients:
/// `s_ij = (|c_ij| + |c_ji|) / 2` off the diagonal, and each self-similarity
/// is the sum of that row's off-diagonal similarities.
pub fn similarity_from_coefficients(c: &CoefficientMatrix) -> SimilarityMatrix {
    let n = c.n();
    let m = c.matrix();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m[(i, j)].abs() + m[(j, i)].abs()) / 2.0;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    for i in 0..n {
        s[(i, i)] = s.row(i).sum();
    }
    SimilarityMatrix {
        s,
        normalized: false,
    }
}

fn row_sums_checked(s: &SimilarityMatrix) -> Result<Vec<f64>> {
    if s.is_normalized() {
        return Err(Error::invalid("similarity", "already normalized"));
    }
    let n = s.n();
    let mut sums = Vec::with_capacity(n);
    for i in 0..n {
        let m = s.matrix().row(i).sum();
        if m <= 0.0 {
            return Err(Error::ZeroSimilarityRow { index: i });
        }
        sums.push(m);
    }
    Ok(sums)
}

/// Degree normalization `M^{-1/2} S M^{-1/2}` with `M = diag(row sums)`,
/// i.e. `s_ij / sqrt(m_ii * m_jj)`. Fails naming the first sample whose row
/// sum is zero.
pub fn normalize_similarity(s: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let sums = row_sums_checked(s)?;
    let n = s.n();
    let inv_sqrt: Vec<f64> = sums.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = s.matrix()[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(SimilarityMatrix {
        s: out,
        normalized: true,
    })
}

/// The literal scaling `sqrt(M) S sqrt(M)` (`s_ij * sqrt(m_ii * m_jj)`),
/// kept for comparison; it amplifies rather than normalizes.
pub fn normalize_similarity_literal(s: &SimilarityMatrix) -> Result<SimilarityMatrix> {
    let sums = row_sums_checked(s)?;
    let n = s.n();
    let sqrt: Vec<f64> = sums.iter().map(|m| m.sqrt()).collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = s.matrix()[(i, j)] * sqrt[i] * sqrt[j];
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(SimilarityMatrix {
        s: out,
        normalized: true,
    })
}
