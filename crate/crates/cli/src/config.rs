//! Experiment configuration: JSON schema, defaults and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rhlearn_core::dataset::NoiseSpec;
use rhlearn_core::regression::RegressionConfig;

pub const DEFAULT_BETA: f64 = 1e-3;
pub const DEFAULT_T: usize = 5;
pub const DEFAULT_LAMBDA: f64 = 10.0;
pub const DEFAULT_OUTPUT: &str = "rhlearn-run";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Synth,
    Cluster,
    Transduce,
    NoiseSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    L1h,
    L2h,
    Knn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::L1h => "l1h",
            Method::L2h => "l2h",
            Method::Knn => "knn",
        }
    }

    /// Regression setup for the method, if it has one.
    pub fn regression(self, beta: f64) -> anyhow::Result<Option<RegressionConfig>> {
        Ok(match self {
            Method::L1h => Some(RegressionConfig::l1(beta)?),
            Method::L2h => Some(RegressionConfig::l2(beta)?),
            Method::Knn => None,
        })
    }
}

/// Sub-task executed at every noise-sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTask {
    Cluster,
    Transduce,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub has_labels: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Blobs {
        k: usize,
        n_per: usize,
        d: usize,
        separation: f64,
        spread: f64,
    },
    Subspaces {
        k: usize,
        sub_dim: usize,
        d: usize,
        n_per: usize,
        noise_sigma: f64,
    },
}

/// On-disk configuration. Unknown keys are rejected; optional fields fall
/// back to the documented defaults during resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub task: Task,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_task: Option<SweepTask>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_eq3: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_fold: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        Ok(cfg)
    }
}

/// Fully resolved configuration: defaults applied, CLI overrides folded in.
/// Serializing it yields a config file that reproduces the run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: ConfigFile,
}

impl Resolved {
    pub fn new(
        mut file: ConfigFile,
        expected_task: Task,
        seed_override: Option<u64>,
        literal_eq3_flag: bool,
        two_fold_flag: bool,
    ) -> anyhow::Result<Self> {
        if file.task != expected_task {
            anyhow::bail!(
                "config field `task` is {:?} but the subcommand expects {:?}",
                file.task,
                expected_task
            );
        }
        if let Some(seed) = seed_override {
            file.seed = Some(seed);
        }
        if literal_eq3_flag {
            file.literal_eq3 = Some(true);
        }
        if two_fold_flag {
            file.two_fold = Some(true);
        }
        file.seed = Some(file.seed.unwrap_or(0));
        file.beta = Some(file.beta.unwrap_or(DEFAULT_BETA));
        file.t = Some(file.t.unwrap_or(DEFAULT_T));
        if file.task == Task::Transduce
            || (file.task == Task::NoiseSweep && file.sweep_task == Some(SweepTask::Transduce))
        {
            file.lambda = Some(file.lambda.unwrap_or(DEFAULT_LAMBDA));
        }
        if file.task == Task::NoiseSweep {
            file.sweep_task = Some(file.sweep_task.unwrap_or(SweepTask::Cluster));
            file.noise_low = Some(file.noise_low.unwrap_or(NoiseSpec::DEFAULT_LOW));
            file.noise_high = Some(file.noise_high.unwrap_or(NoiseSpec::DEFAULT_HIGH));
        }

        let resolved = Resolved { file };
        resolved.validate()?;
        Ok(resolved)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let f = &self.file;
        match (&f.input, &f.generator) {
            (Some(_), Some(_)) => {
                anyhow::bail!("config fields `input` and `generator` are mutually exclusive")
            }
            (None, None) => anyhow::bail!("config needs either `input` or `generator`"),
            _ => {}
        }
        if f.task == Task::Synth && f.generator.is_none() {
            anyhow::bail!("task `synth` needs a `generator`");
        }
        if matches!(f.task, Task::Cluster | Task::Transduce) && f.method.is_none() {
            anyhow::bail!("config field `method` is required for this task");
        }
        if let Some(beta) = f.beta {
            if !(beta > 0.0) || !beta.is_finite() {
                anyhow::bail!("config field `beta` must be positive and finite");
            }
        }
        if let Some(t) = f.t {
            if t < 2 {
                anyhow::bail!("config field `t` must be at least 2");
            }
        }
        if f.task == Task::Transduce
            || (f.task == Task::NoiseSweep && f.sweep_task == Some(SweepTask::Transduce))
        {
            let lambda = f.lambda.unwrap_or(DEFAULT_LAMBDA);
            if !(lambda > 0.0) || !lambda.is_finite() {
                anyhow::bail!("config field `lambda` must be positive and finite");
            }
            let fraction = f
                .label_fraction
                .ok_or_else(|| anyhow::anyhow!("config field `label_fraction` is required"))?;
            if !(fraction > 0.0 && fraction <= 1.0) {
                anyhow::bail!("config field `label_fraction` must be in (0, 1]");
            }
        }
        if f.task == Task::NoiseSweep {
            let levels = f
                .noise_levels
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("config field `noise_levels` is required"))?;
            if levels.is_empty() {
                anyhow::bail!("config field `noise_levels` must be non-empty");
            }
            for &level in levels {
                if !(0.0..=1.0).contains(&level) {
                    anyhow::bail!("noise level {level} not in [0, 1]");
                }
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(0)
    }

    pub fn beta(&self) -> f64 {
        self.file.beta.unwrap_or(DEFAULT_BETA)
    }

    pub fn t(&self) -> usize {
        self.file.t.unwrap_or(DEFAULT_T)
    }

    pub fn lambda(&self) -> f64 {
        self.file.lambda.unwrap_or(DEFAULT_LAMBDA)
    }

    pub fn literal_eq3(&self) -> bool {
        self.file.literal_eq3.unwrap_or(false)
    }

    pub fn two_fold(&self) -> bool {
        self.file.two_fold.unwrap_or(false)
    }

    /// Output path prefix: `<prefix>.json` report, `<prefix>-labels.csv`
    /// labels, `<prefix>.csv` synthesized data.
    pub fn output_prefix(&self) -> PathBuf {
        self.file
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }
}
