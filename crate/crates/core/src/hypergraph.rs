//! Hyperedge generation, incidence structure and the normalized hypergraph
//! Laplacian.
//!
//! Every vertex anchors one hyperedge containing itself and its `t - 1` most
//! similar vertices, so an `n`-vertex hypergraph always has `n` hyperedges of
//! equal size `t`. Two edge sources exist: similarity rankings from the
//! regression pipeline (`build_rh_edges`) and raw Euclidean nearest neighbors
//! (`build_knn_edges`, the baseline).

use nalgebra::{DMatrix, DVector};

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};
use crate::learning::CutMatrix;
use crate::similarity::SimilarityMatrix;

/// Uniform hypergraph: edge `i` is a sorted vertex set of size `t`
/// containing vertex `i`. Weights may be attached later.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    n_vertices: usize,
    t: usize,
    edges: Vec<Vec<usize>>,
    weights: Option<Vec<f64>>,
}

impl Hypergraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Hyperedge size.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: self.edges.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights", "must be finite and nonnegative"));
        }
        Ok(Self {
            weights: Some(weights),
            ..self.clone()
        })
    }
}

fn check_edge_size(t: usize, n: usize) -> Result<()> {
    if t < 2 || t > n {
        return Err(Error::invalid(
            "t",
            format!("hyperedge size must satisfy 2 <= t <= n, got t={t}, n={n}"),
        ));
    }
    Ok(())
}

/// Top `t - 1` ranking by score descending with ties broken by ascending
/// index; returns the anchor plus the selected indices, sorted.
fn anchored_top(anchor: usize, scores: impl Fn(usize) -> f64, n: usize, t: usize) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..n).filter(|&j| j != anchor).collect();
    candidates.sort_by(|&a, &b| scores(b).total_cmp(&scores(a)).then(a.cmp(&b)));
    let mut edge: Vec<usize> = candidates.into_iter().take(t - 1).collect();
    edge.push(anchor);
    edge.sort_unstable();
    edge
}

/// Edge `i` = vertex `i` plus its `t - 1` most similar vertices under `s`.
/// Diagonal entries never enter the ranking. Weights are left unset.
pub fn build_rh_edges(s: &SimilarityMatrix, t: usize) -> Result<Hypergraph> {
    let n = s.n();
    check_edge_size(t, n)?;
    let m = s.matrix();
    let edges = (0..n)
        .map(|i| anchored_top(i, |j| m[(i, j)], n, t))
        .collect();
    Ok(Hypergraph {
        n_vertices: n,
        t,
        edges,
        weights: None,
    })
}

/// Mean pairwise similarity over each edge's `t (t - 1) / 2` vertex pairs;
/// the diagonal of `s` never enters.
pub fn rh_edge_weights(s: &SimilarityMatrix, hg: &Hypergraph) -> Result<Hypergraph> {
    if s.n() != hg.n_vertices {
        return Err(Error::LengthMismatch {
            left: s.n(),
            right: hg.n_vertices,
        });
    }
    let m = s.matrix();
    let pairs = (hg.t * (hg.t - 1) / 2) as f64;
    let weights = hg
        .edges
        .iter()
        .map(|e| {
            let mut total = 0.0;
            for a in 0..e.len() {
                for b in (a + 1)..e.len() {
                    total += m[(e[a], e[b])];
                }
            }
            total / pairs
        })
        .collect();
    hg.with_weights(weights)
}

/// Diagnostics from the kNN baseline construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnDiagnostics {
    /// Gaussian kernel bandwidth: mean pairwise distance of the dataset.
    pub sigma: f64,
    /// True when all samples coincide and the bandwidth fell back to 1.
    pub sigma_fallback: bool,
}

/// Baseline hypergraph: edge `i` = sample `i` plus its `t - 1` Euclidean
/// nearest neighbors (distance ties by ascending index). Weights are mean
/// Gaussian-kernel values `exp(-dist^2 / sigma^2)` over the edge's vertex
/// pairs, with `sigma` the mean pairwise distance.
pub fn build_knn_edges(x: &SampleMatrix, t: usize) -> Result<(Hypergraph, KnnDiagnostics)> {
    let n = x.n_samples();
    check_edge_size(t, n)?;

    let mut dist = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (x.column(i) - x.column(j)).norm();
            dist[(i, j)] = d;
            dist[(j, i)] = d;
            total += d;
        }
    }
    let mean = total / (n * (n - 1) / 2) as f64;
    let sigma_fallback = mean == 0.0;
    let sigma = if sigma_fallback { 1.0 } else { mean };

    let edges: Vec<Vec<usize>> = (0..n)
        .map(|i| anchored_top(i, |j| -dist[(i, j)], n, t))
        .collect();

    let kernel = |a: usize, b: usize| (-(dist[(a, b)] * dist[(a, b)]) / (sigma * sigma)).exp();
    let pairs = (t * (t - 1) / 2) as f64;
    let weights = edges
        .iter()
        .map(|e| {
            let mut total = 0.0;
            for a in 0..e.len() {
                for b in (a + 1)..e.len() {
                    total += kernel(e[a], e[b]);
                }
            }
            total / pairs
        })
        .collect();

    Ok((
        Hypergraph {
            n_vertices: n,
            t,
            edges,
            weights: Some(weights),
        },
        KnnDiagnostics {
            sigma,
            sigma_fallback,
        },
    ))
}

/// Vertex-edge incidence with degree and weight vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceStructure {
    h: DMatrix<f64>,
    dv: DVector<f64>,
    de: DVector<f64>,
    w: DVector<f64>,
}

impl IncidenceStructure {
    /// Binary vertex (rows) by hyperedge (columns) membership matrix.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Vertex degrees: sum of weights of incident edges.
    pub fn vertex_degrees(&self) -> &DVector<f64> {
        &self.dv
    }

    /// Hyperedge degrees: vertex count per edge.
    pub fn edge_degrees(&self) -> &DVector<f64> {
        &self.de
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn n_vertices(&self) -> usize {
        self.h.nrows()
    }
}

pub fn incidence(hg: &Hypergraph) -> Result<IncidenceStructure> {
    let weights = hg.weights().ok_or(Error::WeightsUnset)?;
    let n = hg.n_vertices();
    let m = hg.edges().len();
    let mut h = DMatrix::zeros(n, m);
    for (j, edge) in hg.edges().iter().enumerate() {
        for &v in edge {
            h[(v, j)] = 1.0;
        }
    }
    let w = DVector::from_column_slice(weights);
    let de = DVector::from_fn(m, |j, _| hg.edges()[j].len() as f64);
    let dv = &h * &w;
    Ok(IncidenceStructure { h, dv, de, w })
}

/// Symmetric normalized hypergraph Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    l: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    /// Test/diagnostic constructor for matrices built elsewhere.
    pub fn from_raw(l: DMatrix<f64>) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::invalid("laplacian", "matrix must be square"));
        }
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "laplacian".into(),
            });
        }
        Ok(Self { l })
    }
}

/// `L = I - Dv^{-1/2} H W De^{-1} H^T Dv^{-1/2}`, symmetrized as
/// `(L + L^T) / 2` to remove round-off asymmetry.
pub fn laplacian(inc: &IncidenceStructure) -> Result<LaplacianMatrix> {
    let n = inc.n_vertices();
    if let Some(index) = inc.dv.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroVertexDegree { index });
    }
    // Theta = B B^T with B[(i, j)] = H(i, j) sqrt(w_j / de_j) / sqrt(dv_i)
    let m = inc.h.ncols();
    let mut b = DMatrix::zeros(n, m);
    for j in 0..m {
        let scale = (inc.w[j] / inc.de[j]).sqrt();
        for i in 0..n {
            if inc.h[(i, j)] != 0.0 {
                b[(i, j)] = scale / inc.dv[i].sqrt();
            }
        }
    }
    let theta = &b * b.transpose();
    let mut l = DMatrix::identity(n, n) - theta;
    let lt = l.transpose();
    l = (l + lt) / 2.0;
    Ok(LaplacianMatrix { l })
}

/// Normalized hypergraph cut cost
/// `1/2 sum_e sum_{(u,v) in e, u != v} (w_e / de_e) * ||F(u)/sqrt(d(u)) - F(v)/sqrt(d(v))||^2`
/// over ordered vertex pairs, which reproduces `trace(F^T L F)` exactly.
pub fn partition_cost(f: &CutMatrix, inc: &IncidenceStructure) -> Result<f64> {
    let n = inc.n_vertices();
    if f.n_rows() != n {
        return Err(Error::LengthMismatch {
            left: f.n_rows(),
            right: n,
        });
    }
    if let Some(index) = inc.dv.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroVertexDegree { index });
    }
    let fm = f.matrix();
    let m = f.n_cols();
    let mut cost = 0.0;
    for (j, edge) in edges_of(inc).iter().enumerate() {
        let factor = inc.w[j] / inc.de[j];
        for &u in edge {
            for &v in edge {
                if u == v {
                    continue;
                }
                let du = inc.dv[u].sqrt();
                let dvv = inc.dv[v].sqrt();
                let mut sq = 0.0;
                for c in 0..m {
                    let diff = fm[(u, c)] / du - fm[(v, c)] / dvv;
                    sq += diff * diff;
                }
                cost += factor * sq;
            }
        }
    }
    Ok(cost / 2.0)
}

/// Recovers vertex sets from the incidence columns.
fn edges_of(inc: &IncidenceStructure) -> Vec<Vec<usize>> {
    (0..inc.h.ncols())
        .map(|j| {
            (0..inc.h.nrows())
                .filter(|&i| inc.h[(i, j)] != 0.0)
                .collect()
        })
        .collect()
}
