//! Timed recognition experiments over a labeled corpus.
//!
//! One experiment is: split the corpus, train a basis on the training half,
//! extract gallery features, then classify every test image and measure
//! accuracy. Training time covers basis computation plus gallery extraction;
//! recognition time covers probe extraction plus the nearest neighbor
//! search, so it reflects what a deployed classifier pays per query batch.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, DatasetError, LabeledDataset, SplitSpec};
use crate::model::{self, Method, ModelConfig, ModelError};
use crate::reshape::Direction;

#[derive(Debug)]
pub enum ExperimentError {
    Dataset(DatasetError),
    Model(ModelError),
    Json(serde_json::Error),
    /// A sweep needs at least one configuration.
    EmptyGrid,
    /// One configuration of a sweep failed; the index and rendered config
    /// say which.
    ConfigFailed {
        index: usize,
        config: String,
        source: Box<ExperimentError>,
    },
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Dataset(e) => write!(f, "{e}"),
            ExperimentError::Model(e) => write!(f, "{e}"),
            ExperimentError::Json(e) => write!(f, "result serialization failed: {e}"),
            ExperimentError::EmptyGrid => write!(f, "sweep needs at least one configuration"),
            ExperimentError::ConfigFailed { index, config, source } => {
                write!(f, "sweep entry {index} ({config}) failed: {source}")
            }
        }
    }
}

impl std::error::Error for ExperimentError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ExperimentError::Dataset(e) => Some(e),
            ExperimentError::Model(e) => Some(e),
            ExperimentError::Json(e) => Some(e),
            ExperimentError::ConfigFailed { source, .. } => Some(source.as_ref()),
            ExperimentError::EmptyGrid => None,
        }
    }
}

impl From<DatasetError> for ExperimentError {
    fn from(e: DatasetError) -> ExperimentError {
        ExperimentError::Dataset(e)
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> ExperimentError {
        ExperimentError::Model(e)
    }
}

impl From<serde_json::Error> for ExperimentError {
    fn from(e: serde_json::Error) -> ExperimentError {
        ExperimentError::Json(e)
    }
}

/// Outcome of one experiment. Times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: Method,
    pub direction: Direction,
    pub r: usize,
    pub d: usize,
    pub accuracy: f64,
    /// Entries per feature matrix, i.e. the storage cost of one image.
    pub feature_coefficients: usize,
    pub train_time: f64,
    pub recognition_time: f64,
    pub probe_count: usize,
}

/// Splits, trains, classifies, and times one configuration.
pub fn run_experiment(
    ds: &LabeledDataset,
    spec: &SplitSpec,
    cfg: &ModelConfig,
) -> Result<ExperimentResult, ExperimentError> {
    let (train_set, test_set) = dataset::split(ds, spec)?;

    let train_start = Instant::now();
    let basis = model::train(train_set.images(), cfg)?;
    let gallery: Vec<model::FeatureMatrix> = train_set
        .iter()
        .map(|(im, label)| {
            let mut f = model::extract(im, &basis)?;
            f.label = Some(label);
            Ok(f)
        })
        .collect::<Result<_, ModelError>>()?;
    let train_time = train_start.elapsed().as_secs_f64();

    let recognition_start = Instant::now();
    let mut correct = 0usize;
    for (im, label) in test_set.iter() {
        let f = model::extract(im, &basis)?;
        if model::classify(&f, &gallery, cfg.metric())? == label {
            correct += 1;
        }
    }
    let recognition_time = recognition_start.elapsed().as_secs_f64();

    Ok(ExperimentResult {
        method: cfg.method(),
        direction: cfg.direction(),
        r: cfg.r(),
        d: cfg.d(),
        accuracy: correct as f64 / test_set.len() as f64,
        feature_coefficients: basis.feature_coefficients(),
        train_time,
        recognition_time,
        probe_count: test_set.len(),
    })
}

/// Runs every configuration against the same corpus and split, preserving
/// input order. The first failure aborts the sweep and names the offending
/// configuration.
pub fn sweep(
    ds: &LabeledDataset,
    spec: &SplitSpec,
    cfgs: &[ModelConfig],
) -> Result<Vec<ExperimentResult>, ExperimentError> {
    if cfgs.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let mut results = Vec::with_capacity(cfgs.len());
    for (index, cfg) in cfgs.iter().enumerate() {
        let result = run_experiment(ds, spec, cfg).map_err(|e| ExperimentError::ConfigFailed {
            index,
            config: cfg.to_string(),
            source: Box::new(e),
        })?;
        results.push(result);
    }
    Ok(results)
}

/// Best result per method, in first-appearance order. Accuracy ties keep
/// the earlier result.
pub fn best_per_method(results: &[ExperimentResult]) -> Vec<&ExperimentResult> {
    let mut best: Vec<&ExperimentResult> = Vec::new();
    for result in results {
        match best.iter_mut().find(|b| b.method == result.method) {
            Some(slot) => {
                if result.accuracy > slot.accuracy {
                    *slot = result;
                }
            }
            None => best.push(result),
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Json => write!(f, "json"),
            OutputFormat::Csv => write!(f, "csv"),
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<OutputFormat, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

/// Shortest decimal that parses back to exactly the same float, padded to at
/// least three decimal places so timing columns stay readable.
fn format_seconds(v: f64) -> String {
    let mut s = format!("{v}");
    match s.find('.') {
        None => s.push_str(".000"),
        Some(dot) => {
            let decimals = s.len() - dot - 1;
            for _ in decimals..3 {
                s.push('0');
            }
        }
    }
    s
}

/// Renders results as pretty JSON or CSV. Both formats carry the same nine
/// fields per result and parse back without loss.
pub fn emit_results(
    results: &[ExperimentResult],
    format: OutputFormat,
) -> Result<Vec<u8>, ExperimentError> {
    match format {
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(results)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(
                "method,direction,r,d,accuracy,feature_coefficients,train_time,recognition_time,probe_count\n",
            );
            for r in results {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.method,
                    r.direction,
                    r.r,
                    r.d,
                    r.accuracy,
                    r.feature_coefficients,
                    format_seconds(r.train_time),
                    format_seconds(r.recognition_time),
                    r.probe_count,
                ));
            }
            Ok(out.into_bytes())
        }
    }
}
