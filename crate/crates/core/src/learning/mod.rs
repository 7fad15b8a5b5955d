//! Learning on hypergraphs: spectral clustering, transduction, metrics.

mod kmeans;
mod metrics;

pub use kmeans::{kmeans, ClusterResult};
pub use metrics::{clustering_accuracy, nmi};

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::SampleMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::{
    build_knn_edges, build_rh_edges, incidence, laplacian, rh_edge_weights, Hypergraph,
    IncidenceStructure, LaplacianMatrix,
};
use crate::regression::{leave_one_out_coefficients, RegressionConfig};
use crate::similarity::{
    normalize_similarity, normalize_similarity_literal, similarity_from_coefficients,
    SimilarityMatrix,
};

/// `n x m` matrix of hypergraph cuts: rows are per-vertex score vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMatrix {
    f: DMatrix<f64>,
}

impl CutMatrix {
    pub fn new(f: DMatrix<f64>) -> Result<Self> {
        if f.ncols() == 0 || f.nrows() == 0 {
            return Err(Error::invalid("cuts", "matrix must be non-empty"));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "cut matrix".into(),
            });
        }
        Ok(Self { f })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn n_rows(&self) -> usize {
        self.f.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.f.ncols()
    }
}

/// `n x c` label indicator matrix: a labeled row carries `+1` at its class
/// and `-1` elsewhere; unlabeled rows are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    y: DMatrix<f64>,
}

impl LabelMatrix {
    pub fn new(y: DMatrix<f64>) -> Result<Self> {
        if y.ncols() == 0 {
            return Err(Error::invalid("labels", "need at least one class"));
        }
        for i in 0..y.nrows() {
            let row = y.row(i);
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            let plus = row.iter().filter(|&&v| v == 1.0).count();
            let minus = row.iter().filter(|&&v| v == -1.0).count();
            let labeled = plus == 1 && minus == y.ncols() - 1;
            let unlabeled = zeros == y.ncols();
            if !labeled && !unlabeled {
                return Err(Error::invalid(
                    "labels",
                    format!("row {i} is neither a one-vs-rest labeling nor all zeros"),
                ));
            }
        }
        Ok(Self { y })
    }

    /// Encodes ground-truth labels, zeroing the rows where `labeled` is false.
    pub fn from_labels(labels: &[usize], labeled: &[bool], n_classes: usize) -> Result<Self> {
        if labels.len() != labeled.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: labeled.len(),
            });
        }
        if n_classes == 0 {
            return Err(Error::invalid("n_classes", "must be positive"));
        }
        let mut y = DMatrix::zeros(labels.len(), n_classes);
        for (i, (&label, &is_labeled)) in labels.iter().zip(labeled).enumerate() {
            if label >= n_classes {
                return Err(Error::invalid(
                    "labels",
                    format!("label {label} out of range for {n_classes} classes"),
                ));
            }
            if is_labeled {
                for c in 0..n_classes {
                    y[(i, c)] = if c == label { 1.0 } else { -1.0 };
                }
            }
        }
        LabelMatrix::new(y)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n_rows(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.y.ncols()
    }
}

/// Relative threshold under which an eigenvalue counts as numerically zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

struct SortedEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn sorted_symmetric_eigen(l: &LaplacianMatrix) -> SortedEigen {
    let eig = SymmetricEigen::new(l.matrix().clone());
    let n = l.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (pos, &i) in order.iter().enumerate() {
        vectors.set_column(pos, &eig.eigenvectors.column(i));
    }
    SortedEigen { values, vectors }
}

/// Fixes each column's sign so its largest-magnitude entry is positive
/// (first occurrence wins on exact magnitude ties).
fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn embed_from(eigen: &SortedEigen, selected: &[usize]) -> Result<CutMatrix> {
    let n = eigen.vectors.nrows();
    let mut f = DMatrix::zeros(n, selected.len());
    for (pos, &idx) in selected.iter().enumerate() {
        f.set_column(pos, &eigen.vectors.column(idx));
    }
    fix_signs(&mut f);
    CutMatrix::new(f)
}

/// Eigenvectors of the `m` smallest eigenvalues at or above the zero
/// threshold, unit-norm, in ascending eigenvalue order. The threshold is
/// `zero_tol` relative to the largest eigenvalue (absolute when the spectrum
/// is confined below 1). Fails reporting the spectrum when fewer than `m`
/// eigenvalues survive.
pub fn spectral_embed(l: &LaplacianMatrix, m: usize, zero_tol: f64) -> Result<CutMatrix> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let eigen = sorted_symmetric_eigen(l);
    let lambda_max = eigen.values.last().copied().unwrap_or(0.0);
    let threshold = zero_tol * lambda_max.max(1.0);
    let kept: Vec<usize> = (0..eigen.values.len())
        .filter(|&i| eigen.values[i] >= threshold)
        .collect();
    if kept.len() < m {
        return Err(Error::SpectrumTooSmall {
            requested: m,
            available: kept.len(),
            spectrum: eigen.values.clone(),
        });
    }
    embed_from(&eigen, &kept[..m])
}

/// Eigenvectors of the `m` smallest eigenvalues with no zero filtering.
/// Near-null eigenvectors indicate connected components, which is exactly
/// the structure clustering needs, so the clustering pipeline uses this
/// variant rather than `spectral_embed`.
pub fn spectral_embed_smallest(l: &LaplacianMatrix, m: usize) -> Result<CutMatrix> {
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if m > l.n() {
        return Err(Error::invalid(
            "m",
            format!("{m} exceeds matrix size {}", l.n()),
        ));
    }
    let eigen = sorted_symmetric_eigen(l);
    let selected: Vec<usize> = (0..m).collect();
    embed_from(&eigen, &selected)
}

/// Semi-supervised cuts from the regularized partition objective: solves
/// `(L + lambda I) F = Y` by Cholesky. The objective's two `1/(1+lambda)`
/// prefactors cancel exactly, so no extra scaling is applied; the argmax
/// labeling is invariant to positive scaling anyway.
pub fn transduce(l: &LaplacianMatrix, y: &LabelMatrix, lambda: f64) -> Result<CutMatrix> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", "must be positive and finite"));
    }
    if y.n_rows() != l.n() {
        return Err(Error::LengthMismatch {
            left: y.n_rows(),
            right: l.n(),
        });
    }
    let mut a = l.matrix().clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let chol = Cholesky::new(a.clone()).ok_or_else(|| Error::Numerical {
        context: "regularized transduction solve".into(),
    })?;
    let f = chol.solve(y.matrix());
    debug_assert!(
        (&a * &f - y.matrix()).norm() <= 1e-8 * (1.0 + y.matrix().norm()),
        "transduction residual out of tolerance"
    );
    CutMatrix::new(f)
}

/// Per-row argmax labeling; ties resolve to the smallest class index.
pub fn classify(f: &CutMatrix) -> Vec<usize> {
    let m = f.matrix();
    (0..m.nrows())
        .map(|i| {
            let mut best = 0;
            for c in 1..m.ncols() {
                if m[(i, c)] > m[(i, best)] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Per-class labeled/unlabeled split: marks `round(fraction * class size)`
/// indices of each class (at least one) as labeled, chosen by a seeded
/// shuffle.
pub fn stratified_split(labels: &[usize], fraction: f64, seed: u64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("label_fraction", "must be in (0, 1]"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("labels", "must be non-empty"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![false; labels.len()];
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        for k in (1..members.len()).rev() {
            let j = rng.gen_range(0..=k);
            members.swap(k, j);
        }
        let take = ((fraction * members.len() as f64).round() as usize)
            .clamp(1, members.len());
        for &i in members.iter().take(take) {
            mask[i] = true;
        }
    }
    Ok(mask)
}

/// Complementary half splits for two-fold evaluation. Every class needs at
/// least two samples.
pub fn two_fold_masks(labels: &[usize], seed: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    if labels.is_empty() {
        return Err(Error::invalid("labels", "must be non-empty"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    for class in 0..n_classes {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < 2 {
            return Err(Error::invalid(
                "labels",
                format!("class {class} has {count} sample(s); two-fold evaluation needs 2"),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first = vec![false; labels.len()];
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        for k in (1..members.len()).rev() {
            let j = rng.gen_range(0..=k);
            members.swap(k, j);
        }
        let half = members.len().div_ceil(2);
        for &i in members.iter().take(half) {
            first[i] = true;
        }
    }
    let second = first.iter().map(|&b| !b).collect();
    Ok((first, second))
}

/// Hypergraph source for the shared pipeline.
#[derive(Debug, Clone, Copy)]
pub enum GraphMethod<'a> {
    /// Regression similarities (sparse or ridge per the config).
    Regression(&'a RegressionConfig),
    /// Euclidean nearest-neighbor baseline.
    Knn,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GraphOptions {
    /// Apply the literal `sqrt(M) S sqrt(M)` scaling instead of the inverse
    /// normalization (comparison mode).
    pub literal_normalization: bool,
    /// Rank and weigh edges on raw (un-normalized) similarities.
    pub raw_similarities: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GraphFlags {
    /// False when any coordinate-descent solve hit its sweep limit.
    pub regression_converged: bool,
    /// True when the kNN kernel bandwidth fell back to 1.
    pub sigma_fallback: bool,
}

/// Everything the pipeline produces on the way to a Laplacian; kept so
/// callers can inspect or dump intermediates.
#[derive(Debug, Clone)]
pub struct GraphArtifacts {
    pub hypergraph: Hypergraph,
    pub incidence: IncidenceStructure,
    pub laplacian: LaplacianMatrix,
    /// Similarity matrix used for ranking and weights (regression methods).
    pub similarity: Option<SimilarityMatrix>,
    pub flags: GraphFlags,
}

/// Shared construction path: samples -> hypergraph -> incidence -> Laplacian.
pub fn build_graph(
    x: &SampleMatrix,
    method: GraphMethod<'_>,
    t: usize,
    opts: GraphOptions,
) -> Result<GraphArtifacts> {
    let mut flags = GraphFlags {
        regression_converged: true,
        sigma_fallback: false,
    };
    let (hypergraph, similarity) = match method {
        GraphMethod::Regression(cfg) => {
            let coeffs =
                leave_one_out_coefficients(x, cfg).map_err(|e| Error::stage("regression", e))?;
            flags.regression_converged = coeffs.converged();
            let raw = similarity_from_coefficients(&coeffs);
            let sim = if opts.raw_similarities {
                raw
            } else if opts.literal_normalization {
                normalize_similarity_literal(&raw).map_err(|e| Error::stage("similarity", e))?
            } else {
                normalize_similarity(&raw).map_err(|e| Error::stage("similarity", e))?
            };
            let edges = build_rh_edges(&sim, t).map_err(|e| Error::stage("hypergraph", e))?;
            let weighted =
                rh_edge_weights(&sim, &edges).map_err(|e| Error::stage("hypergraph", e))?;
            (weighted, Some(sim))
        }
        GraphMethod::Knn => {
            let (hg, diag) = build_knn_edges(x, t).map_err(|e| Error::stage("hypergraph", e))?;
            flags.sigma_fallback = diag.sigma_fallback;
            (hg, None)
        }
    };
    let incidence = incidence(&hypergraph).map_err(|e| Error::stage("incidence", e))?;
    let laplacian = laplacian(&incidence).map_err(|e| Error::stage("laplacian", e))?;
    Ok(GraphArtifacts {
        hypergraph,
        incidence,
        laplacian,
        similarity,
        flags,
    })
}

/// Default k-means restart count for the clustering pipelines.
pub const DEFAULT_RESTARTS: usize = 10;

/// Regression-hypergraph spectral clustering: leave-one-out regression,
/// similarity normalization, hyperedges and weights, normalized Laplacian,
/// spectral embedding into `k` dimensions, k-means.
pub fn rhsc(
    x: &SampleMatrix,
    cfg: &RegressionConfig,
    t: usize,
    k: usize,
    seed: u64,
) -> Result<ClusterResult> {
    let graph = build_graph(x, GraphMethod::Regression(cfg), t, GraphOptions::default())?;
    cluster_graph(&graph.laplacian, k, seed)
}

/// The same spectral pipeline over the kNN baseline hypergraph.
pub fn knn_spectral_clustering(
    x: &SampleMatrix,
    t: usize,
    k: usize,
    seed: u64,
) -> Result<ClusterResult> {
    let graph = build_graph(x, GraphMethod::Knn, t, GraphOptions::default())?;
    cluster_graph(&graph.laplacian, k, seed)
}

/// Embedding plus k-means over an already-built Laplacian.
pub fn cluster_graph(l: &LaplacianMatrix, k: usize, seed: u64) -> Result<ClusterResult> {
    let embedding =
        spectral_embed_smallest(l, k).map_err(|e| Error::stage("embedding", e))?;
    kmeans(&embedding, k, DEFAULT_RESTARTS, seed).map_err(|e| Error::stage("kmeans", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_vertex_laplacian() -> LaplacianMatrix {
        LaplacianMatrix::from_raw(DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])).unwrap()
    }

    #[test]
    fn embed_two_vertex_case() {
        let l = two_vertex_laplacian();
        let f = spectral_embed(&l, 1, DEFAULT_ZERO_TOL).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((f.matrix()[(0, 0)] - inv_sqrt2).abs() < 1e-12);
        assert!((f.matrix()[(1, 0)] + inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn embed_identity_spectrum() {
        let l = LaplacianMatrix::from_raw(DMatrix::identity(4, 4)).unwrap();
        let f = spectral_embed(&l, 4, DEFAULT_ZERO_TOL).unwrap();
        let gram = f.matrix().transpose() * f.matrix();
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn embed_discards_component_nullspace() {
        // two disconnected two-vertex blocks: two zero eigenvalues
        let mut l = DMatrix::zeros(4, 4);
        for b in 0..2 {
            let o = 2 * b;
            l[(o, o)] = 0.5;
            l[(o + 1, o + 1)] = 0.5;
            l[(o, o + 1)] = -0.5;
            l[(o + 1, o)] = -0.5;
        }
        let l = LaplacianMatrix::from_raw(l).unwrap();
        let f = spectral_embed(&l, 2, DEFAULT_ZERO_TOL).unwrap();
        // the two surviving eigenvalues are both 1
        for c in 0..2 {
            let col = f.matrix().column(c).into_owned();
            let image = l.matrix() * &col;
            assert!((image - col).norm() < 1e-10);
        }
        // asking for a third nonzero eigenvalue must fail with the spectrum
        match spectral_embed(&l, 3, DEFAULT_ZERO_TOL) {
            Err(Error::SpectrumTooSmall {
                requested: 3,
                available: 2,
                spectrum,
            }) => assert_eq!(spectrum.len(), 4),
            other => panic!("expected spectrum error, got {other:?}"),
        }
    }

    #[test]
    fn embed_smallest_keeps_nullspace() {
        let l = two_vertex_laplacian();
        let f = spectral_embed_smallest(&l, 2).unwrap();
        // first column spans the eigenvalue-0 eigenvector
        let col0 = f.matrix().column(0).into_owned();
        assert!((l.matrix() * &col0).norm() < 1e-12);
    }

    #[test]
    fn embed_columns_are_orthonormal_with_ascending_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // random symmetric PSD-ish matrix
        let g = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let l = LaplacianMatrix::from_raw(&g * g.transpose() / 8.0).unwrap();
        let f = spectral_embed(&l, 4, 1e-12).unwrap();
        let gram = f.matrix().transpose() * f.matrix();
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-8);
        let rayleigh: Vec<f64> = (0..4)
            .map(|c| {
                let v = f.matrix().column(c).into_owned();
                (l.matrix() * &v).dot(&v)
            })
            .collect();
        for w in rayleigh.windows(2) {
            assert!(w[0] <= w[1] + 1e-10);
        }
    }

    #[test]
    fn embed_is_variationally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = DMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0));
        let l = LaplacianMatrix::from_raw(&g * g.transpose() / 10.0).unwrap();
        let m = 3;
        let f = spectral_embed(&l, m, 1e-12).unwrap();
        let trace_f = (f.matrix().transpose() * l.matrix() * f.matrix()).trace();
        for _ in 0..10 {
            let raw = DMatrix::from_fn(10, m, |_, _| rng.gen_range(-1.0..1.0));
            let q = raw.qr().q();
            let trace_q = (q.transpose() * l.matrix() * &q).trace();
            assert!(trace_f <= trace_q + 1e-8, "{trace_f} > {trace_q}");
        }
    }

    #[test]
    fn transduce_zero_laplacian_closed_form() {
        let l = LaplacianMatrix::from_raw(DMatrix::zeros(3, 3)).unwrap();
        let y = LabelMatrix::from_labels(&[0, 1, 0], &[true, true, true], 2).unwrap();
        let f = transduce(&l, &y, 2.0).unwrap();
        assert!((f.matrix() - y.matrix() / 2.0).amax() < 1e-12);
        assert_eq!(classify(&f), vec![0, 1, 0]);
    }

    #[test]
    fn transduce_zero_labels_give_zero_cuts() {
        let l = two_vertex_laplacian();
        let y = LabelMatrix::new(DMatrix::zeros(2, 3)).unwrap();
        let f = transduce(&l, &y, 1.0).unwrap();
        assert_eq!(f.matrix(), &DMatrix::zeros(2, 3));
    }

    #[test]
    fn transduce_rejects_nonpositive_lambda() {
        let l = two_vertex_laplacian();
        let y = LabelMatrix::new(DMatrix::zeros(2, 2)).unwrap();
        assert!(transduce(&l, &y, 0.0).is_err());
        assert!(transduce(&l, &y, -1.0).is_err());
    }

    #[test]
    fn transduce_argmax_invariant_to_objective_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-0.5..0.5));
        let l = LaplacianMatrix::from_raw(&g * g.transpose() / 8.0).unwrap();
        let labels: Vec<usize> = (0..8).map(|i| i % 3).collect();
        let mask: Vec<bool> = (0..8).map(|i| i % 2 == 0).collect();
        let y = LabelMatrix::from_labels(&labels, &mask, 3).unwrap();
        for lambda in [0.5, 10.0, 250.0] {
            let f = transduce(&l, &y, lambda).unwrap();
            // exact minimizer of the regularized objective differs by the
            // positive factor lambda; prefactor form differs by 1/(1+lambda)
            let scaled =
                CutMatrix::new(f.matrix() * lambda).unwrap();
            let prefactor =
                CutMatrix::new(f.matrix() / (1.0 + lambda)).unwrap();
            assert_eq!(classify(&f), classify(&scaled));
            assert_eq!(classify(&f), classify(&prefactor));
        }
    }

    #[test]
    fn transduce_large_lambda_recovers_given_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let g = DMatrix::from_fn(9, 9, |_, _| rng.gen_range(-0.5..0.5));
        let l = LaplacianMatrix::from_raw(&g * g.transpose() / 9.0).unwrap();
        let labels: Vec<usize> = (0..9).map(|i| i % 3).collect();
        let mask = vec![true; 9];
        let y = LabelMatrix::from_labels(&labels, &mask, 3).unwrap();
        let f = transduce(&l, &y, 1e6).unwrap();
        assert_eq!(classify(&f), labels);
    }

    #[test]
    fn classify_rows() {
        let f = CutMatrix::new(DMatrix::from_row_slice(2, 3, &[0.2, 0.7, 0.1, 0.5, 0.5, 0.5]))
            .unwrap();
        assert_eq!(classify(&f), vec![1, 0]);
    }

    #[test]
    fn classify_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let f = CutMatrix::new(DMatrix::from_fn(6, 4, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let scaled = CutMatrix::new(f.matrix() * 17.3).unwrap();
        assert_eq!(classify(&f), classify(&scaled));
    }

    #[test]
    fn label_matrix_validates_rows() {
        assert!(LabelMatrix::new(DMatrix::from_row_slice(1, 3, &[1.0, -1.0, -1.0])).is_ok());
        assert!(LabelMatrix::new(DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 0.0])).is_ok());
        assert!(LabelMatrix::new(DMatrix::from_row_slice(1, 3, &[1.0, 1.0, -1.0])).is_err());
        assert!(LabelMatrix::new(DMatrix::from_row_slice(1, 3, &[1.0, 0.0, -1.0])).is_err());
        assert!(LabelMatrix::new(DMatrix::from_row_slice(1, 2, &[0.5, -0.5])).is_err());
    }

    #[test]
    fn stratified_split_respects_fraction_per_class() {
        let labels: Vec<usize> = [vec![0; 10], vec![1; 6], vec![2; 4]].concat();
        let mask = stratified_split(&labels, 0.5, 3).unwrap();
        let count = |class: usize| {
            (0..labels.len())
                .filter(|&i| labels[i] == class && mask[i])
                .count()
        };
        assert_eq!(count(0), 5);
        assert_eq!(count(1), 3);
        assert_eq!(count(2), 2);
        // deterministic
        assert_eq!(mask, stratified_split(&labels, 0.5, 3).unwrap());
    }

    #[test]
    fn stratified_split_labels_at_least_one_per_class() {
        let labels = vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
        let mask = stratified_split(&labels, 0.05, 1).unwrap();
        assert_eq!(mask.iter().filter(|&&b| b).count(), 2); // one per class
    }

    #[test]
    fn two_fold_masks_are_complementary() {
        let labels = vec![0, 0, 0, 1, 1, 2, 2, 2, 2];
        let (a, b) = two_fold_masks(&labels, 5).unwrap();
        for i in 0..labels.len() {
            assert_ne!(a[i], b[i]);
        }
        // fold A holds the ceil half of each class
        let count = |mask: &[bool], class: usize| {
            (0..labels.len())
                .filter(|&i| labels[i] == class && mask[i])
                .count()
        };
        assert_eq!(count(&a, 0), 2);
        assert_eq!(count(&a, 1), 1);
        assert_eq!(count(&a, 2), 2);
    }

    #[test]
    fn two_fold_rejects_singleton_class() {
        let labels = vec![0, 0, 1];
        assert!(two_fold_masks(&labels, 5).is_err());
    }

    #[test]
    fn rhsc_separates_duplicate_pairs() {
        // two duplicate pairs of samples: duplicates must share a cluster
        let mut data = DMatrix::zeros(2, 4);
        data.set_column(0, &DVector::from_vec(vec![1.0, 0.0]));
        data.set_column(1, &DVector::from_vec(vec![1.0, 0.0]));
        data.set_column(2, &DVector::from_vec(vec![0.0, 1.0]));
        data.set_column(3, &DVector::from_vec(vec![0.0, 1.0]));
        let x = SampleMatrix::new(data).unwrap();
        let cfg = RegressionConfig::l2(0.5).unwrap();
        let result = rhsc(&x, &cfg, 2, 2, 7).unwrap();
        assert_eq!(result.labels[0], result.labels[1]);
        assert_eq!(result.labels[2], result.labels[3]);
        assert_ne!(result.labels[0], result.labels[2]);
    }

    #[test]
    fn rhsc_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let x = SampleMatrix::new(DMatrix::from_fn(4, 9, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let cfg = RegressionConfig::l2(0.3).unwrap();
        let a = rhsc(&x, &cfg, 3, 2, 11).unwrap();
        let b = rhsc(&x, &cfg, 3, 2, 11).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn rhsc_stage_errors_are_labeled() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let x = SampleMatrix::new(DMatrix::from_fn(3, 5, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let cfg = RegressionConfig::l2(0.3).unwrap();
        match rhsc(&x, &cfg, 9, 2, 1) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "hypergraph"),
            other => panic!("expected stage error, got {other:?}"),
        }
    }
}
