//! Task execution: dataset acquisition, pipelines, metrics, artifacts.


use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use rhlearn_core::dataset::{
    generate_blobs, generate_union_of_subspaces, inject_salt_pepper, load_labeled,
    write_csv, LabeledDataset, NoiseSpec, SampleMatrix,
};
use rhlearn_core::learning::{
    classify, clustering_accuracy, cluster_graph, kmeans, nmi, spectral_embed_smallest,
    stratified_split, transduce, two_fold_masks, GraphArtifacts, GraphMethod, GraphOptions,
    LabelMatrix, DEFAULT_RESTARTS,
};

use crate::config::{GeneratorSpec, Method, Resolved, SweepTask, Task};
use crate::report::{write_labels, Metrics, RunReport, SweepRow};

/// Failure classes map to exit codes: configuration and I/O problems exit
/// with 2, computational failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(e) | CliError::Compute(e) => format!("{e:#}"),
        }
    }
}

type RunResult<T> = std::result::Result<T, CliError>;

fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

fn compute_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Compute(e.into())
}

pub struct RunContext {
    pub resolved: Resolved,
    pub dump_dir: Option<PathBuf>,
}

fn generate(spec: &GeneratorSpec, seed: u64) -> RunResult<LabeledDataset> {
    match *spec {
        GeneratorSpec::Blobs {
            k,
            n_per,
            d,
            separation,
            spread,
        } => generate_blobs(k, n_per, d, separation, spread, seed).map_err(config_err),
        GeneratorSpec::Subspaces {
            k,
            sub_dim,
            d,
            n_per,
            noise_sigma,
        } => generate_union_of_subspaces(k, sub_dim, d, n_per, noise_sigma, seed)
            .map_err(config_err),
    }
}

/// Loads or generates the dataset; `require_labels` rejects unlabeled input.
fn acquire_dataset(ctx: &RunContext) -> RunResult<LabeledDataset> {
    let file = &ctx.resolved.file;
    if let Some(input) = &file.input {
        if !input.has_labels {
            return Err(config_err(anyhow::anyhow!(
                "task {:?} needs ground-truth labels: set input.has_labels and provide a label column",
                file.task
            )));
        }
        load_labeled(&input.path).map_err(|e| {
            config_err(anyhow::anyhow!("cannot load {}: {e}", input.path.display()))
        })
    } else if let Some(gen) = &file.generator {
        generate(gen, ctx.resolved.seed())
    } else {
        Err(config_err(anyhow::anyhow!(
            "config needs either `input` or `generator`"
        )))
    }
}

fn graph_method<'a>(
    method: Method,
    regression: &'a Option<rhlearn_core::regression::RegressionConfig>,
) -> GraphMethod<'a> {
    match regression {
        Some(cfg) => GraphMethod::Regression(cfg),
        None => {
            debug_assert_eq!(method, Method::Knn);
            GraphMethod::Knn
        }
    }
}

fn write_matrix_csv(m: &rhlearn_core::nalgebra::DMatrix<f64>, path: &Path) -> anyhow::Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m[(r, c)]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn dump_artifacts(graph: &GraphArtifacts, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    if let Some(sim) = &graph.similarity {
        write_matrix_csv(sim.matrix(), &dir.join("similarity.csv"))?;
    }
    write_matrix_csv(graph.incidence.h(), &dir.join("incidence.csv"))?;
    let weights = rhlearn_core::nalgebra::DMatrix::from_column_slice(
        graph.incidence.weights().len(),
        1,
        graph.incidence.weights().as_slice(),
    );
    write_matrix_csv(&weights, &dir.join("weights.csv"))?;
    write_matrix_csv(graph.laplacian.matrix(), &dir.join("laplacian.csv"))?;
    Ok(())
}

struct BuiltGraph {
    graph: GraphArtifacts,
    build_ms: u128,
}

fn build_graph_timed(
    x: &SampleMatrix,
    method: Method,
    beta: f64,
    t: usize,
    literal_eq3: bool,
) -> RunResult<BuiltGraph> {
    let regression = method.regression(beta).map_err(config_err)?;
    let options = GraphOptions {
        literal_normalization: literal_eq3,
        ..GraphOptions::default()
    };
    let start = Instant::now();
    let graph = rhlearn_core::learning::build_graph(x, graph_method(method, &regression), t, options)
        .map_err(compute_err)?;
    Ok(BuiltGraph {
        graph,
        build_ms: start.elapsed().as_millis(),
    })
}

fn base_flags(report: &mut RunReport, graph: &GraphArtifacts) {
    report
        .flags
        .insert("regression_converged", graph.flags.regression_converged);
    report.flags.insert("sigma_fallback", graph.flags.sigma_fallback);
}

pub fn run_synth(ctx: &RunContext) -> RunResult<RunReport> {
    let file = &ctx.resolved.file;
    let spec = file
        .generator
        .as_ref()
        .ok_or_else(|| config_err(anyhow::anyhow!("task `synth` needs a `generator`")))?;
    let start = Instant::now();
    let ds = generate(spec, ctx.resolved.seed())?;
    let data_path = ctx.resolved.output_prefix().with_extension("csv");
    write_csv(ds.samples(), Some(ds.labels()), &data_path).map_err(config_err)?;
    let mut report = RunReport::new(
        file.clone(),
        Metrics::Synth {
            n: ds.samples().n_samples(),
            d: ds.samples().n_features(),
            classes: ds.n_classes(),
            data_path: data_path.display().to_string(),
        },
    );
    report.timings_ms.insert("total", start.elapsed().as_millis());
    Ok(report)
}

pub fn run_cluster(ctx: &RunContext) -> RunResult<RunReport> {
    let file = ctx.resolved.file.clone();
    let total = Instant::now();
    let ds = acquire_dataset(ctx)?;
    let k = file.k.unwrap_or_else(|| ds.n_classes());
    if k < 1 || k > ds.samples().n_samples() {
        return Err(config_err(anyhow::anyhow!(
            "config field `k` = {k} out of range for {} samples",
            ds.samples().n_samples()
        )));
    }
    let method = file.method.expect("validated");
    let built = build_graph_timed(
        ds.samples(),
        method,
        ctx.resolved.beta(),
        ctx.resolved.t(),
        ctx.resolved.literal_eq3(),
    )?;
    if let Some(dir) = &ctx.dump_dir {
        dump_artifacts(&built.graph, dir).map_err(config_err)?;
    }

    let embed_start = Instant::now();
    let embedding = spectral_embed_smallest(&built.graph.laplacian, k).map_err(compute_err)?;
    let embed_ms = embed_start.elapsed().as_millis();

    let km_start = Instant::now();
    let result =
        kmeans(&embedding, k, DEFAULT_RESTARTS, ctx.resolved.seed()).map_err(compute_err)?;
    let km_ms = km_start.elapsed().as_millis();

    let accuracy = clustering_accuracy(&result.labels, ds.labels()).map_err(compute_err)?;
    let info = nmi(&result.labels, ds.labels()).map_err(compute_err)?;

    let labels_path = labels_path(&ctx.resolved);
    write_labels(&result.labels, &labels_path).map_err(config_err)?;

    let mut report = RunReport::new(file, Metrics::Cluster {
        k,
        accuracy,
        nmi: info,
    });
    base_flags(&mut report, &built.graph);
    report.timings_ms.insert("graph_build", built.build_ms);
    report.timings_ms.insert("embedding", embed_ms);
    report.timings_ms.insert("kmeans", km_ms);
    report.timings_ms.insert("total", total.elapsed().as_millis());
    Ok(report)
}

fn fold_error(
    pred: &[usize],
    truth: &[usize],
    labeled: &[bool],
) -> (Option<f64>, usize) {
    let test: Vec<usize> = (0..truth.len()).filter(|&i| !labeled[i]).collect();
    if test.is_empty() {
        return (None, 0);
    }
    let wrong = test.iter().filter(|&&i| pred[i] != truth[i]).count();
    (Some(wrong as f64 / test.len() as f64), test.len())
}

pub fn run_transduce(ctx: &RunContext) -> RunResult<RunReport> {
    let file = ctx.resolved.file.clone();
    let total = Instant::now();
    let ds = acquire_dataset(ctx)?;
    let lambda = ctx.resolved.lambda();
    let fraction = file.label_fraction.expect("validated");
    let method = file.method.expect("validated");

    let built = build_graph_timed(
        ds.samples(),
        method,
        ctx.resolved.beta(),
        ctx.resolved.t(),
        ctx.resolved.literal_eq3(),
    )?;
    if let Some(dir) = &ctx.dump_dir {
        dump_artifacts(&built.graph, dir).map_err(config_err)?;
    }

    let masks: Vec<Vec<bool>> = if ctx.resolved.two_fold() {
        let (a, b) = two_fold_masks(ds.labels(), ctx.resolved.seed()).map_err(config_err)?;
        vec![a, b]
    } else {
        vec![stratified_split(ds.labels(), fraction, ctx.resolved.seed()).map_err(config_err)?]
    };

    let solve_start = Instant::now();
    let mut fold_errors = Vec::new();
    let mut n_test_total = 0usize;
    let mut predictions = vec![0usize; ds.samples().n_samples()];
    let two_fold = masks.len() == 2;
    for mask in &masks {
        let y = LabelMatrix::from_labels(ds.labels(), mask, ds.n_classes())
            .map_err(compute_err)?;
        let f = transduce(&built.graph.laplacian, &y, lambda).map_err(compute_err)?;
        let pred = classify(&f);
        let (err, n_test) = fold_error(&pred, ds.labels(), mask);
        if let Some(e) = err {
            fold_errors.push(e);
        }
        n_test_total += n_test;
        for i in 0..pred.len() {
            // single fold: keep the whole labeling; two-fold: keep each
            // vertex's test-time prediction (it is unlabeled in one fold)
            if !two_fold || !mask[i] {
                predictions[i] = pred[i];
            }
        }
    }
    let solve_ms = solve_start.elapsed().as_millis();

    let no_test = n_test_total == 0;
    let error_rate = if fold_errors.is_empty() {
        None
    } else {
        Some(fold_errors.iter().sum::<f64>() / fold_errors.len() as f64)
    };

    let labels_path = labels_path(&ctx.resolved);
    write_labels(&predictions, &labels_path).map_err(config_err)?;

    let mut report = RunReport::new(file, Metrics::Transduce {
        error_rate,
        n_test: n_test_total,
        fold_error_rates: if masks.len() == 2 {
            Some(fold_errors.clone())
        } else {
            None
        },
    });
    base_flags(&mut report, &built.graph);
    report.flags.insert("no_test_vertices", no_test);
    report.timings_ms.insert("graph_build", built.build_ms);
    report.timings_ms.insert("transduction", solve_ms);
    report.timings_ms.insert("total", total.elapsed().as_millis());
    Ok(report)
}

fn sweep_point(
    ctx: &RunContext,
    base: &LabeledDataset,
    level: f64,
    method: Method,
) -> RunResult<(SweepRow, bool, bool)> {
    let file = &ctx.resolved.file;
    let spec = NoiseSpec::new(
        level,
        file.noise_low.unwrap_or(NoiseSpec::DEFAULT_LOW),
        file.noise_high.unwrap_or(NoiseSpec::DEFAULT_HIGH),
        ctx.resolved.seed(),
    )
    .map_err(config_err)?;
    let noisy = inject_salt_pepper(base.samples(), &spec);
    let ds = base.with_samples(noisy).map_err(compute_err)?;

    let built = build_graph_timed(
        ds.samples(),
        method,
        ctx.resolved.beta(),
        ctx.resolved.t(),
        ctx.resolved.literal_eq3(),
    )?;

    let row = match ctx.resolved.file.sweep_task.unwrap_or(SweepTask::Cluster) {
        SweepTask::Cluster => {
            let k = file.k.unwrap_or_else(|| ds.n_classes());
            let result =
                cluster_graph(&built.graph.laplacian, k, ctx.resolved.seed()).map_err(compute_err)?;
            let accuracy =
                clustering_accuracy(&result.labels, ds.labels()).map_err(compute_err)?;
            let info = nmi(&result.labels, ds.labels()).map_err(compute_err)?;
            SweepRow {
                level,
                method: method.name(),
                accuracy: Some(accuracy),
                nmi: Some(info),
                error_rate: None,
            }
        }
        SweepTask::Transduce => {
            let fraction = file.label_fraction.expect("validated");
            let mask =
                stratified_split(ds.labels(), fraction, ctx.resolved.seed()).map_err(config_err)?;
            let y = LabelMatrix::from_labels(ds.labels(), &mask, ds.n_classes())
                .map_err(compute_err)?;
            let f = transduce(&built.graph.laplacian, &y, ctx.resolved.lambda())
                .map_err(compute_err)?;
            let pred = classify(&f);
            let (error_rate, _) = fold_error(&pred, ds.labels(), &mask);
            SweepRow {
                level,
                method: method.name(),
                accuracy: None,
                nmi: None,
                error_rate,
            }
        }
    };
    Ok((
        row,
        built.graph.flags.regression_converged,
        built.graph.flags.sigma_fallback,
    ))
}

pub fn run_noise_sweep(ctx: &RunContext) -> RunResult<RunReport> {
    let file = ctx.resolved.file.clone();
    let total = Instant::now();
    let base = acquire_dataset(ctx)?;
    let levels = file.noise_levels.clone().expect("validated");
    let methods = [Method::L1h, Method::L2h, Method::Knn];

    let points: Vec<(f64, Method)> = levels
        .iter()
        .flat_map(|&level| methods.iter().map(move |&m| (level, m)))
        .collect();

    // rayon keeps collection order, so rows come out sorted by (level, method)
    let results: Vec<RunResult<(SweepRow, bool, bool)>> = points
        .par_iter()
        .map(|&(level, method)| sweep_point(ctx, &base, level, method))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut regression_converged = true;
    let mut sigma_fallback = false;
    for r in results {
        let (row, conv, fallback) = r?;
        regression_converged &= conv;
        sigma_fallback |= fallback;
        rows.push(row);
    }

    let mut report = RunReport::new(file, Metrics::Sweep { rows });
    report
        .flags
        .insert("regression_converged", regression_converged);
    report.flags.insert("sigma_fallback", sigma_fallback);
    report.timings_ms.insert("total", total.elapsed().as_millis());
    Ok(report)
}

pub fn labels_path(resolved: &Resolved) -> PathBuf {
    let prefix = resolved.output_prefix();
    let mut name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "rhlearn-run".into());
    name.push_str("-labels.csv");
    prefix.with_file_name(name)
}

pub fn report_path(resolved: &Resolved) -> PathBuf {
    resolved.output_prefix().with_extension("json")
}

pub fn run(ctx: &RunContext) -> RunResult<RunReport> {
    match ctx.resolved.file.task {
        Task::Synth => run_synth(ctx),
        Task::Cluster => run_cluster(ctx),
        Task::Transduce => run_transduce(ctx),
        Task::NoiseSweep => run_noise_sweep(ctx),
    }
}
