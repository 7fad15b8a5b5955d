//! Leave-one-out regression solvers.
//!
//! Every sample is regressed on all remaining samples; the coefficient
//! magnitudes act as correlations later turned into similarities. Two
//! penalties are supported for the objective `||y - Ac||^2 + beta * phi(c)`:
//! `phi = ||c||_1` (sparse, solved by cyclic coordinate descent) and
//! `phi = ||c||_2^2` (ridge, solved by the normal equations).

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionModel {
    /// L1 penalty (sparse representation).
    L1,
    /// Squared L2 penalty (ridge / collaborative representation).
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionConfig {
    pub model: RegressionModel,
    /// Regularization weight; must be positive.
    pub beta: f64,
    /// Coordinate-descent stop: max absolute coefficient change per sweep.
    pub tol: f64,
    /// Coordinate-descent sweep limit.
    pub max_iter: usize,
    /// Scale dictionary columns and target to unit L2 norm before solving.
    pub normalize_columns: bool,
}

impl RegressionConfig {
    pub const DEFAULT_TOL: f64 = 1e-7;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    pub fn new(model: RegressionModel, beta: f64) -> Result<Self> {
        let cfg = Self {
            model,
            beta,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            normalize_columns: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn l1(beta: f64) -> Result<Self> {
        Self::new(RegressionModel::L1, beta)
    }

    pub fn l2(beta: f64) -> Result<Self> {
        Self::new(RegressionModel::L2, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::invalid("tol", "must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// `n x n` leave-one-out coefficients; entry `(j, i)` is the coefficient of
/// sample `j` in the regression of target `i`. The diagonal is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    coeffs: DMatrix<f64>,
    converged: bool,
}

impl CoefficientMatrix {
    pub fn new(coeffs: DMatrix<f64>, converged: bool) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() {
            return Err(Error::invalid("coeffs", "matrix must be square"));
        }
        if (0..coeffs.nrows()).any(|i| coeffs[(i, i)] != 0.0) {
            return Err(Error::invalid("coeffs", "diagonal must be zero"));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "coefficient matrix".into(),
            });
        }
        Ok(Self { coeffs, converged })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    /// False when any coordinate-descent solve hit its sweep limit.
    pub fn converged(&self) -> bool {
        self.converged
    }
}

fn check_finite(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if a.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "regression inputs".into(),
        });
    }
    if a.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: a.nrows(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Minimizes `||y - Ac||^2 + beta * ||c||^2` through the normal equations
/// `(A^T A + beta I) c = A^T y`, factored by Cholesky (`beta > 0` makes the
/// system positive definite).
pub fn solve_ridge(a: &DMatrix<f64>, y: &DVector<f64>, beta: f64) -> Result<DVector<f64>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta", "must be positive and finite"));
    }
    check_finite(a, y)?;
    let p = a.ncols();
    let mut gram = a.transpose() * a;
    for j in 0..p {
        gram[(j, j)] += beta;
    }
    let rhs = a.transpose() * y;
    let chol = Cholesky::new(gram.clone()).ok_or_else(|| Error::Numerical {
        context: "ridge normal equations".into(),
    })?;
    let c = chol.solve(&rhs);
    debug_assert!(
        (&gram * &c - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()),
        "normal-equation residual out of tolerance"
    );
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub coeffs: DVector<f64>,
    /// False when the sweep limit was reached before the tolerance.
    pub converged: bool,
    pub sweeps: usize,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

#[cfg(debug_assertions)]
fn lasso_objective(a: &DMatrix<f64>, y: &DVector<f64>, c: &DVector<f64>, beta: f64) -> f64 {
    (y - a * c).norm_squared() + beta * c.iter().map(|v| v.abs()).sum::<f64>()
}

/// Minimizes `||y - Ac||^2 + beta * ||c||_1` by cyclic coordinate descent
/// with soft-thresholding updates. Zero-norm columns are skipped and keep a
/// zero coefficient. Terminates when the largest absolute coefficient change
/// over a full sweep is at most `tol`, or after `max_iter` sweeps (reported
/// through `converged`).
pub fn solve_lasso(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoSolution> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta", "must be positive and finite"));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid("tol", "must be positive and finite"));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be at least 1"));
    }
    check_finite(a, y)?;

    let p = a.ncols();
    let norms_sq: Vec<f64> = (0..p).map(|j| a.column(j).norm_squared()).collect();
    let mut c = DVector::zeros(p);
    let mut residual = y.clone();
    let mut converged = false;
    let mut sweeps = 0;

    #[cfg(debug_assertions)]
    let mut prev_obj = lasso_objective(a, y, &c, beta);

    for sweep in 1..=max_iter {
        sweeps = sweep;
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            if norms_sq[j] == 0.0 {
                continue;
            }
            let old = c[j];
            let z = a.column(j).dot(&residual) + norms_sq[j] * old;
            let new = soft_threshold(z, beta / 2.0) / norms_sq[j];
            if new != old {
                residual.axpy(old - new, &a.column(j).into_owned(), 1.0);
                c[j] = new;
                max_delta = max_delta.max((new - old).abs());
            }
        }
        #[cfg(debug_assertions)]
        {
            let obj = lasso_objective(a, y, &c, beta);
            debug_assert!(
                obj <= prev_obj + 1e-10 * (1.0 + prev_obj.abs()),
                "objective increased: {prev_obj} -> {obj}"
            );
            prev_obj = obj;
        }
        if max_delta <= tol {
            converged = true;
            break;
        }
    }

    Ok(LassoSolution {
        coeffs: c,
        converged,
        sweeps,
    })
}

/// Solves the leave-one-out regression for every sample: column `i` of the
/// result holds the coefficients of the regression of sample `i` on all
/// other samples, scattered back to their sample indices. The `n` solves are
/// independent and run in parallel.
pub fn leave_one_out_coefficients(
    x: &SampleMatrix,
    cfg: &RegressionConfig,
) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    let n = x.n_samples();
    let d = x.n_features();
    let base = if cfg.normalize_columns {
        x.normalized_columns()
    } else {
        x.data().clone()
    };

    let columns: Vec<(DVector<f64>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(DVector<f64>, bool)> {
            let target = base.column(i).into_owned();
            if target.norm() == 0.0 {
                // a zero sample has no meaningful regression; report zeros
                return Ok((DVector::zeros(n), true));
            }
            let mut dict = DMatrix::zeros(d, n - 1);
            for (pos, j) in (0..n).filter(|&j| j != i).enumerate() {
                dict.set_column(pos, &base.column(j));
            }
            let (solution, converged) = match cfg.model {
                RegressionModel::L2 => (solve_ridge(&dict, &target, cfg.beta), true),
                RegressionModel::L1 => {
                    match solve_lasso(&dict, &target, cfg.beta, cfg.tol, cfg.max_iter) {
                        Ok(sol) => {
                            let conv = sol.converged;
                            (Ok(sol.coeffs), conv)
                        }
                        Err(e) => (Err(e), false),
                    }
                }
            };
            let coeffs = solution.map_err(|e| Error::Solver {
                target: i,
                source: Box::new(e),
            })?;
            let mut scattered = DVector::zeros(n);
            for (pos, j) in (0..n).filter(|&j| j != i).enumerate() {
                scattered[j] = coeffs[pos];
            }
            Ok((scattered, converged))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut coeffs = DMatrix::zeros(n, n);
    let mut converged = true;
    for (i, (col, conv)) in columns.iter().enumerate() {
        coeffs.set_column(i, col);
        converged &= conv;
    }
    CoefficientMatrix::new(coeffs, converged)
}
