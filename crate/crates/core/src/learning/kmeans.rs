//! Seeded Lloyd k-means over embedding rows.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learning::CutMatrix;

const MAX_ITER: usize = 300;
const REL_TOL: f64 = 1e-9;

/// Cluster assignment with the embedding it was computed on and the final
/// within-cluster sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub embedding: CutMatrix,
    pub objective: f64,
}

fn row(e: &DMatrix<f64>, i: usize) -> DVector<f64> {
    e.row(i).transpose()
}

fn squared_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm_squared()
}

/// First center drawn from the generator, the rest greedily farthest from
/// the chosen set (ties to the smallest index).
fn seed_centers(e: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = e.nrows();
    let mut centers = Vec::with_capacity(k);
    centers.push(row(e, rng.gen_range(0..n)));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(&row(e, i), &centers[0]))
        .collect();
    while centers.len() < k {
        let mut best = 0;
        for i in 1..n {
            if nearest[i] > nearest[best] {
                best = i;
            }
        }
        let center = row(e, best);
        for i in 0..n {
            nearest[i] = nearest[i].min(squared_distance(&row(e, i), &center));
        }
        centers.push(center);
    }
    centers
}

fn lloyd(e: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = e.nrows();
    let mut centers = seed_centers(e, k, rng);
    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;

    for _ in 0..MAX_ITER {
        // assignment; ties to the smallest cluster index
        let mut new_inertia = 0.0;
        let mut dist_to_own = vec![0.0; n];
        for i in 0..n {
            let point = row(e, i);
            let mut best = 0;
            let mut best_d = squared_distance(&point, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let d = squared_distance(&point, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            labels[i] = best;
            dist_to_own[i] = best_d;
            new_inertia += best_d;
        }

        // update
        let mut counts = vec![0usize; k];
        let mut sums = vec![DVector::<f64>::zeros(e.ncols()); k];
        for i in 0..n {
            counts[labels[i]] += 1;
            sums[labels[i]] += row(e, i);
        }
        let mut stolen = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = &sums[c] / counts[c] as f64;
            } else {
                // re-seed an empty cluster at the point farthest from its
                // current center
                let mut far = 0;
                for i in 1..n {
                    if !stolen[i] && (stolen[far] || dist_to_own[i] > dist_to_own[far]) {
                        far = i;
                    }
                }
                stolen[far] = true;
                centers[c] = row(e, far);
            }
        }

        if inertia - new_inertia <= REL_TOL * new_inertia.max(f64::MIN_POSITIVE) {
            inertia = new_inertia;
            break;
        }
        inertia = new_inertia;
    }
    (labels, inertia)
}

/// Lloyd iterations with farthest-point seeding, best inertia over
/// `restarts` runs; fully determined by `seed`.
pub fn kmeans(e: &CutMatrix, k: usize, restarts: usize, seed: u64) -> Result<ClusterResult> {
    let n = e.n_rows();
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(
            "k",
            format!("cannot form {k} clusters from {n} points"),
        ));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let (labels, inertia) = lloyd(e.matrix(), k, &mut rng);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((labels, inertia));
        }
    }
    let (labels, objective) = best.unwrap();
    Ok(ClusterResult {
        labels,
        embedding: e.clone(),
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(rows: usize, cols: usize, vals: &[f64]) -> CutMatrix {
        CutMatrix::new(DMatrix::from_row_slice(rows, cols, vals)).unwrap()
    }

    #[test]
    fn separates_two_point_groups() {
        let e = cut(
            6,
            2,
            &[
                0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 10.0, 10.0, 10.1, 10.0, 10.0, 10.1,
            ],
        );
        let result = kmeans(&e, 2, 5, 1).unwrap();
        assert_eq!(result.labels[0], result.labels[1]);
        assert_eq!(result.labels[0], result.labels[2]);
        assert_eq!(result.labels[3], result.labels[4]);
        assert_eq!(result.labels[3], result.labels[5]);
        assert_ne!(result.labels[0], result.labels[3]);
        // inertia equals the within-group sum of squares: each group has one
        // deviating coordinate pattern {0, 0.1, 0} per axis, SSE (2/3) * 0.01,
        // over two axes and two groups
        let expected = 4.0 * (2.0 / 3.0) * 0.01;
        assert!((result.objective - expected).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_gives_total_sse() {
        let e = cut(4, 1, &[0.0, 2.0, 4.0, 6.0]);
        let result = kmeans(&e, 1, 3, 2).unwrap();
        assert!(result.labels.iter().all(|&l| l == 0));
        // mean 3, squared deviations 9 + 1 + 1 + 9
        assert!((result.objective - 20.0).abs() < 1e-12);
    }

    #[test]
    fn n_clusters_is_degenerate() {
        let e = cut(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let result = kmeans(&e, 4, 3, 3).unwrap();
        assert!(result.objective.abs() < 1e-15);
        let mut sorted = result.labels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn rejects_more_clusters_than_points() {
        let e = cut(2, 1, &[0.0, 1.0]);
        assert!(kmeans(&e, 3, 1, 0).is_err());
        assert!(kmeans(&e, 0, 1, 0).is_err());
        assert!(kmeans(&e, 1, 0, 0).is_err());
    }

    #[test]
    fn is_deterministic_per_seed() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let e = CutMatrix::new(DMatrix::from_fn(30, 3, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let a = kmeans(&e, 4, 10, 9).unwrap();
        let b = kmeans(&e, 4, 10, 9).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.objective, b.objective);
    }
}
