//! Sample matrices: CSV ingestion, synthetic generators, noise injection.
//!
//! Samples are columns of a `d x n` matrix. All generators are driven by a
//! seeded ChaCha8 stream so that a given seed reproduces the same bits on
//! every platform.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense `d x n` sample matrix; column `i` is sample `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
}

impl SampleMatrix {
    /// Wraps a matrix, enforcing `d >= 1`, `n >= 2` and finite entries.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 1 || data.ncols() < 2 {
            return Err(Error::TooFewSamples);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "sample matrix".into(),
            });
        }
        Ok(Self { data })
    }

    pub fn n_features(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.data.column(i).into_owned()
    }

    /// Copy with every column scaled to unit L2 norm; zero columns are kept
    /// as-is.
    pub fn normalized_columns(&self) -> DMatrix<f64> {
        let mut out = self.data.clone();
        for mut col in out.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        out
    }
}

/// Samples plus a ground-truth class per column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: SampleMatrix,
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabeledDataset {
    /// Validates that labels match the sample count and that every class in
    /// `[0, c)` occurs at least once.
    pub fn new(samples: SampleMatrix, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != samples.n_samples() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: samples.n_samples(),
            });
        }
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        if n_classes == 0 {
            return Err(Error::invalid("labels", "no classes present"));
        }
        let mut seen = vec![false; n_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(class) = seen.iter().position(|s| !s) {
            return Err(Error::MissingClass { class });
        }
        Ok(Self {
            samples,
            labels,
            n_classes,
        })
    }

    pub fn samples(&self) -> &SampleMatrix {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Same labels over a replacement sample matrix (e.g. after corruption).
    pub fn with_samples(&self, samples: SampleMatrix) -> Result<Self> {
        LabeledDataset::new(samples, self.labels.clone())
    }
}

/// Salt-and-pepper corruption parameters. `level` is the fraction of
/// coordinates overwritten per sample; overwritten coordinates become
/// `low_value` or `high_value` with equal probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub level: f64,
    pub low_value: f64,
    pub high_value: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const DEFAULT_LOW: f64 = 0.0;
    pub const DEFAULT_HIGH: f64 = 255.0;

    pub fn new(level: f64, low_value: f64, high_value: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&level) {
            return Err(Error::invalid("level", format!("{level} not in [0, 1]")));
        }
        if !low_value.is_finite() || !high_value.is_finite() {
            return Err(Error::NonFinite {
                context: "noise values".into(),
            });
        }
        Ok(Self {
            level,
            low_value,
            high_value,
            seed,
        })
    }

    /// Spec with the conventional 0/255 extreme values.
    pub fn with_level(level: f64, seed: u64) -> Result<Self> {
        Self::new(level, Self::DEFAULT_LOW, Self::DEFAULT_HIGH, seed)
    }
}

enum ParsedCsv {
    Unlabeled(SampleMatrix),
    Labeled(LabeledDataset),
}

fn parse_csv(path: &Path, has_labels: bool) -> Result<ParsedCsv> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let line = record
            .position()
            .map_or(idx as u64 + 1, |p| p.line()) as usize;
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank line
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("inconsistent width: expected {w} fields, got {}", record.len()),
                })
            }
            _ => {}
        }
        let n_numeric = if has_labels {
            record.len().checked_sub(1).ok_or(Error::Parse {
                line,
                msg: "row has no label column".into(),
            })?
        } else {
            record.len()
        };
        let mut row = Vec::with_capacity(n_numeric);
        for (col, field) in record.iter().take(n_numeric).enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("field {} is not numeric: {field:?}", col + 1),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("field {} is not finite", col + 1),
                });
            }
            row.push(value);
        }
        if has_labels {
            let field = &record[record.len() - 1];
            let label: i64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("label is not an integer: {field:?}"),
            })?;
            if label < 0 {
                return Err(Error::Parse {
                    line,
                    msg: format!("label is negative: {label}"),
                });
            }
            labels.push(label as usize);
        }
        rows.push(row);
    }

    if rows.len() < 2 {
        return Err(Error::TooFewSamples);
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "no feature columns".into(),
        });
    }
    // file rows are samples; store them as columns
    let data = DMatrix::from_fn(d, rows.len(), |r, c| rows[c][r]);
    let samples = SampleMatrix::new(data)?;
    if has_labels {
        Ok(ParsedCsv::Labeled(LabeledDataset::new(samples, labels)?))
    } else {
        Ok(ParsedCsv::Unlabeled(samples))
    }
}

/// Loads a label-free CSV: one sample per row, comma-separated numbers,
/// no header.
pub fn load_samples(path: &Path) -> Result<SampleMatrix> {
    match parse_csv(path, false)? {
        ParsedCsv::Unlabeled(m) => Ok(m),
        ParsedCsv::Labeled(_) => unreachable!(),
    }
}

/// Loads a CSV whose final integer column holds the class label.
pub fn load_labeled(path: &Path) -> Result<LabeledDataset> {
    match parse_csv(path, true)? {
        ParsedCsv::Labeled(d) => Ok(d),
        ParsedCsv::Unlabeled(_) => unreachable!(),
    }
}

/// Persists samples (and labels, when given) in the loadable CSV format:
/// one sample per row, label appended as a final integer column.
pub fn write_csv(samples: &SampleMatrix, labels: Option<&[usize]>, path: &Path) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != samples.n_samples() {
            return Err(Error::LengthMismatch {
                left: l.len(),
                right: samples.n_samples(),
            });
        }
    }
    let mut out = String::new();
    for i in 0..samples.n_samples() {
        for r in 0..samples.n_features() {
            if r > 0 {
                out.push(',');
            }
            // `{}` prints the shortest digits that round-trip, so a reload
            // reproduces the same bits.
            let _ = write!(out, "{}", samples.data()[(r, i)]);
        }
        if let Some(l) = labels {
            let _ = write!(out, ",{}", l[i]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `k` isotropic Gaussian blobs with means on scaled coordinate axes so that
/// all pairwise mean distances equal `separation` exactly. Requires `k <= d`.
pub fn generate_blobs(
    k: usize,
    n_per: usize,
    d: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if k < 2 {
        return Err(Error::invalid("k", "need at least 2 classes"));
    }
    if n_per < 1 {
        return Err(Error::invalid("n_per", "need at least 1 sample per class"));
    }
    if d < 1 {
        return Err(Error::invalid("d", "need at least 1 dimension"));
    }
    if k > d {
        return Err(Error::invalid(
            "k",
            format!("axis-aligned means need k <= d, got k={k}, d={d}"),
        ));
    }
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::invalid("separation", "must be positive and finite"));
    }
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::invalid("spread", "must be positive and finite"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // mean_j = (sep / sqrt(2)) e_j gives pairwise distance exactly `separation`
    let scale = separation / std::f64::consts::SQRT_2;
    let n = k * n_per;
    let mut data = DMatrix::zeros(d, n);
    let mut labels = Vec::with_capacity(n);
    for class in 0..k {
        for s in 0..n_per {
            let col = class * n_per + s;
            for r in 0..d {
                let g: f64 = rng.sample(StandardNormal);
                data[(r, col)] = if r == class { scale } else { 0.0 } + spread * g;
            }
            labels.push(class);
        }
    }
    LabeledDataset::new(SampleMatrix::new(data)?, labels)
}

/// `k` classes of unit-norm points drawn from random `sub_dim`-dimensional
/// linear subspaces of R^d, with optional isotropic Gaussian noise added
/// before normalization.
pub fn generate_union_of_subspaces(
    k: usize,
    sub_dim: usize,
    d: usize,
    n_per: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if k < 2 {
        return Err(Error::invalid("k", "need at least 2 subspaces"));
    }
    if sub_dim < 1 || sub_dim >= d {
        return Err(Error::invalid(
            "sub_dim",
            format!("need 1 <= sub_dim < d, got sub_dim={sub_dim}, d={d}"),
        ));
    }
    if n_per < sub_dim + 1 {
        return Err(Error::invalid(
            "n_per",
            format!("need n_per >= sub_dim + 1, got n_per={n_per}, sub_dim={sub_dim}"),
        ));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::invalid("noise_sigma", "must be nonnegative and finite"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k * n_per;
    let mut data = DMatrix::zeros(d, n);
    let mut labels = Vec::with_capacity(n);
    for class in 0..k {
        let raw = DMatrix::from_fn(d, sub_dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let basis = raw.qr().q(); // d x sub_dim orthonormal
        for s in 0..n_per {
            let col = class * n_per + s;
            let coef = DVector::from_fn(sub_dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut x = &basis * coef;
            if noise_sigma > 0.0 {
                for r in 0..d {
                    let g: f64 = rng.sample(StandardNormal);
                    x[r] += noise_sigma * g;
                }
            }
            let norm = x.norm();
            if norm > 0.0 {
                x /= norm;
            }
            data.set_column(col, &x);
            labels.push(class);
        }
    }
    LabeledDataset::new(SampleMatrix::new(data)?, labels)
}

/// Overwrites exactly `round(level * d)` coordinates per column, chosen
/// uniformly without replacement, each set to `low_value` or `high_value`
/// with probability 1/2.
pub fn inject_salt_pepper(x: &SampleMatrix, spec: &NoiseSpec) -> SampleMatrix {
    let d = x.n_features();
    let m = ((spec.level * d as f64).round() as usize).min(d);
    let mut data = x.data().clone();
    if m == 0 {
        return SampleMatrix { data };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for col in 0..x.n_samples() {
        let positions = sample_indices(&mut rng, d, m);
        for r in positions.iter() {
            data[(r, col)] = if rng.gen_bool(0.5) {
                spec.low_value
            } else {
                spec.high_value
            };
        }
    }
    SampleMatrix { data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_transposes_rows_to_columns() {
        let f = tmp_csv("1,2\n3,4\n5,6\n");
        let m = load_samples(f.path()).unwrap();
        assert_eq!(m.n_features(), 2);
        assert_eq!(m.n_samples(), 3);
        assert_eq!(m.column(0), DVector::from_vec(vec![1.0, 2.0]));
        assert_eq!(m.column(2), DVector::from_vec(vec![5.0, 6.0]));
    }

    #[test]
    fn load_empty_file_is_too_few_samples() {
        let f = tmp_csv("");
        assert!(matches!(load_samples(f.path()), Err(Error::TooFewSamples)));
    }

    #[test]
    fn load_single_row_is_too_few_samples() {
        let f = tmp_csv("1,2,3\n");
        assert!(matches!(load_samples(f.path()), Err(Error::TooFewSamples)));
    }

    #[test]
    fn load_with_labels() {
        let f = tmp_csv("1,2,0\n3,4,1\n");
        let ds = load_labeled(f.path()).unwrap();
        assert_eq!(ds.samples().n_features(), 2);
        assert_eq!(ds.samples().n_samples(), 2);
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.n_classes(), 2);
    }

    #[test]
    fn load_reports_line_of_bad_field() {
        let f = tmp_csv("1,2\n3,oops\n");
        match load_samples(f.path()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("not numeric"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_reports_inconsistent_width() {
        let f = tmp_csv("1,2\n3,4,5\n");
        match load_samples(f.path()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("inconsistent width"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_missing_class() {
        let f = tmp_csv("1,0\n2,2\n");
        assert!(matches!(
            load_labeled(f.path()),
            Err(Error::MissingClass { class: 1 })
        ));
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let ds = generate_blobs(2, 3, 4, 7.5, 0.3, 42).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(ds.samples(), Some(ds.labels()), f.path()).unwrap();
        let back = load_labeled(f.path()).unwrap();
        assert_eq!(back.samples().data(), ds.samples().data());
        assert_eq!(back.labels(), ds.labels());
    }

    #[test]
    fn blobs_shape_labels_and_determinism() {
        let a = generate_blobs(2, 3, 5, 10.0, 0.1, 7).unwrap();
        assert_eq!(a.samples().n_samples(), 6);
        assert_eq!(a.samples().n_features(), 5);
        assert_eq!(a.labels(), &[0, 0, 0, 1, 1, 1]);
        let b = generate_blobs(2, 3, 5, 10.0, 0.1, 7).unwrap();
        assert_eq!(a.samples().data(), b.samples().data());
    }

    #[test]
    fn blobs_mean_separation() {
        let ds = generate_blobs(3, 200, 8, 20.0, 0.01, 5).unwrap();
        let x = ds.samples().data();
        let mean = |class: usize| {
            let mut m = DVector::zeros(8);
            for i in 0..200 {
                m += x.column(class * 200 + i);
            }
            m / 200.0
        };
        for a in 0..3 {
            for b in (a + 1)..3 {
                let dist = (mean(a) - mean(b)).norm();
                assert!((dist - 20.0).abs() < 0.1, "dist {dist}");
            }
        }
    }

    #[test]
    fn blobs_rejects_bad_parameters() {
        assert!(generate_blobs(1, 3, 5, 10.0, 0.1, 7).is_err());
        assert!(generate_blobs(2, 0, 5, 10.0, 0.1, 7).is_err());
        assert!(generate_blobs(2, 3, 5, 0.0, 0.1, 7).is_err());
        assert!(generate_blobs(2, 3, 5, 10.0, -1.0, 7).is_err());
        assert!(generate_blobs(6, 3, 5, 10.0, 0.1, 7).is_err()); // k > d
    }

    #[test]
    fn subspaces_unit_norm_and_collinear_classes() {
        let ds = generate_union_of_subspaces(2, 1, 3, 4, 0.0, 3).unwrap();
        let x = ds.samples().data();
        assert_eq!(x.ncols(), 8);
        for c in x.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        // with sub_dim = 1 and no noise, samples of a class agree up to sign
        for class in 0..2 {
            let first = x.column(class * 4);
            for i in 1..4 {
                let dot = first.dot(&x.column(class * 4 + i)).abs();
                assert!((dot - 1.0).abs() < 1e-12, "class {class} sample {i}: {dot}");
            }
        }
    }

    #[test]
    fn subspaces_zero_noise_lies_in_subspace() {
        let ds = generate_union_of_subspaces(3, 2, 10, 6, 0.0, 9).unwrap();
        let x = ds.samples().data();
        for class in 0..3 {
            // basis recovered from the class block itself; residual to the
            // projection must vanish when noise_sigma = 0
            let block = x.columns(class * 6, 6).into_owned();
            // Gram-Schmidt over the block recovers the class subspace
            let mut basis: Vec<DVector<f64>> = Vec::new();
            for i in 0..6 {
                let mut v = block.column(i).into_owned();
                for b in &basis {
                    let coeff = b.dot(&v);
                    v -= b * coeff;
                }
                if v.norm() > 1e-8 {
                    let norm = v.norm();
                    basis.push(v / norm);
                }
            }
            assert_eq!(basis.len(), 2, "class {class} block must have rank 2");
            for i in 0..6 {
                let col = block.column(i).into_owned();
                let mut proj = DVector::zeros(10);
                for b in &basis {
                    proj += b * b.dot(&col);
                }
                assert!((col - proj).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn subspaces_rejects_bad_parameters() {
        assert!(generate_union_of_subspaces(1, 1, 3, 4, 0.0, 3).is_err());
        assert!(generate_union_of_subspaces(2, 0, 3, 4, 0.0, 3).is_err());
        assert!(generate_union_of_subspaces(2, 3, 3, 4, 0.0, 3).is_err());
        assert!(generate_union_of_subspaces(2, 2, 3, 2, 0.0, 3).is_err());
    }

    #[test]
    fn salt_pepper_level_zero_is_identity() {
        let ds = generate_blobs(2, 4, 6, 5.0, 0.2, 1).unwrap();
        let spec = NoiseSpec::with_level(0.0, 9).unwrap();
        let noisy = inject_salt_pepper(ds.samples(), &spec);
        assert_eq!(noisy.data(), ds.samples().data());
    }

    #[test]
    fn salt_pepper_level_one_saturates() {
        let ds = generate_blobs(2, 4, 6, 5.0, 0.2, 1).unwrap();
        let spec = NoiseSpec::new(1.0, -3.0, 3.0, 9).unwrap();
        let noisy = inject_salt_pepper(ds.samples(), &spec);
        assert!(noisy.data().iter().all(|&v| v == -3.0 || v == 3.0));
    }

    #[test]
    fn salt_pepper_corrupts_exact_count_per_column() {
        let ds = generate_blobs(2, 5, 100, 5.0, 0.2, 1).unwrap();
        // values outside the data range make corrupted entries countable
        let spec = NoiseSpec::new(0.3, -1e6, 1e6, 4).unwrap();
        let noisy = inject_salt_pepper(ds.samples(), &spec);
        for i in 0..ds.samples().n_samples() {
            let changed = (0..100)
                .filter(|&r| noisy.data()[(r, i)] != ds.samples().data()[(r, i)])
                .count();
            assert_eq!(changed, 30);
        }
    }

    #[test]
    fn salt_pepper_is_deterministic() {
        let ds = generate_blobs(2, 4, 20, 5.0, 0.2, 1).unwrap();
        let spec = NoiseSpec::with_level(0.4, 11).unwrap();
        let a = inject_salt_pepper(ds.samples(), &spec);
        let b = inject_salt_pepper(ds.samples(), &spec);
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn noise_spec_validates_level() {
        assert!(NoiseSpec::with_level(-0.1, 0).is_err());
        assert!(NoiseSpec::with_level(1.1, 0).is_err());
        assert!(NoiseSpec::new(0.5, f64::NAN, 1.0, 0).is_err());
    }
}
