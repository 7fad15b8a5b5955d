//! Run reports: one JSON document per invocation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::ConfigFile;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub level: f64,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Metrics {
    Cluster {
        k: usize,
        accuracy: f64,
        nmi: f64,
    },
    Transduce {
        #[serde(skip_serializing_if = "Option::is_none")]
        error_rate: Option<f64>,
        n_test: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        fold_error_rates: Option<Vec<f64>>,
    },
    Sweep {
        rows: Vec<SweepRow>,
    },
    Synth {
        n: usize,
        d: usize,
        classes: usize,
        data_path: String,
    },
}

/// The report document. `timings_ms` is wall-clock and varies run to run;
/// everything else is a pure function of the echoed config.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigFile,
    pub metrics: Metrics,
    pub timings_ms: BTreeMap<&'static str, u128>,
    pub flags: BTreeMap<&'static str, bool>,
    pub version: String,
}

impl RunReport {
    pub fn new(config: ConfigFile, metrics: Metrics) -> Self {
        RunReport {
            config,
            metrics,
            timings_ms: BTreeMap::new(),
            flags: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// Predicted labels, one integer per line, sample order.
pub fn write_labels(labels: &[usize], path: &Path) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = String::new();
    for &l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
