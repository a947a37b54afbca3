//! Series CSV files and run configuration files.
//!
//! A series file has a header `u0,u1,...` followed by one row of 0/1 values
//! per time step, oldest first.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::config::{ModelConfig, Synapse, DEFAULT_DELAY, DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_TEMPERATURE};
use crate::error::{DybmError, Result};
use crate::generator::RolloutMode;
use crate::learning::{TrainMode, TrainerConfig};
use crate::slice::TimeSlice;

pub fn read_series<R: Read>(reader: R) -> Result<Vec<TimeSlice>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DybmError::Data(format!("cannot read header: {e}")))?
        .clone();
    for (col, name) in headers.iter().enumerate() {
        if name != format!("u{col}") {
            return Err(DybmError::Data(format!(
                "header column {} is `{name}`, expected `u{col}`",
                col + 1
            )));
        }
    }
    let n = headers.len();
    if n == 0 {
        return Err(DybmError::Data("header lists no units".into()));
    }
    let mut series = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        // row 1 is the header
        let row = r + 2;
        let record = record.map_err(|e| DybmError::Data(format!("row {row}: {e}")))?;
        if record.len() != n {
            return Err(DybmError::Data(format!(
                "row {row} has {} columns, expected {n}",
                record.len()
            )));
        }
        let bits = record
            .iter()
            .enumerate()
            .map(|(col, field)| match field {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(DybmError::Data(format!(
                    "row {row}, column {} (u{col}): value `{other}` is not 0 or 1",
                    col + 1
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        series.push(TimeSlice::from_bits(bits));
    }
    if series.is_empty() {
        return Err(DybmError::Data("series has no rows".into()));
    }
    Ok(series)
}

pub fn read_series_file(path: impl AsRef<Path>) -> Result<Vec<TimeSlice>> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    read_series(file).map_err(|e| match e {
        DybmError::Data(msg) => DybmError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_series<W: Write>(mut writer: W, n_units: usize, series: &[TimeSlice]) -> Result<()> {
    let header: Vec<String> = (0..n_units).map(|i| format!("u{i}")).collect();
    writeln!(writer, "{}", header.join(","))?;
    for slice in series {
        writeln!(writer, "{slice}")?;
    }
    Ok(())
}

/// Model section of a run configuration. Absent fields take the defaults
/// (lambda 0.5, mu 0.25, delay 2, temperature 1, dense connectivity with
/// self-pairs); `n_units` defaults to the width of the data.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n_units: Option<usize>,
    pub temperature: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub mus: Option<Vec<f64>>,
    /// Rows of `[pre, post, delay]`.
    pub connectivity: Option<Vec<[usize; 3]>>,
    /// Delay of every pair when `connectivity` is absent.
    pub delay: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerSection {
    pub mode: TrainMode,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for TrainerSection {
    fn default() -> Self {
        TrainerSection {
            mode: TrainMode::FullBatch,
            learning_rate: 0.1,
            epochs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationSection {
    pub horizon: usize,
    pub mode: RolloutMode,
    pub seed: u64,
}

impl Default for GenerationSection {
    fn default() -> Self {
        GenerationSection {
            horizon: 32,
            mode: RolloutMode::Argmax,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub trainer: TrainerSection,
    pub generation: GenerationSection,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DybmError::config("run config", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Builds the model configuration for data with `data_units` columns.
    pub fn model_config(&self, data_units: usize) -> Result<ModelConfig> {
        let m = &self.model;
        let n = m.n_units.unwrap_or(data_units);
        if n != data_units {
            return Err(DybmError::config(
                "model.n_units",
                format!("configured for {n} units but the data has {data_units}"),
            ));
        }
        let lambdas = m.lambdas.clone().unwrap_or_else(|| vec![DEFAULT_LAMBDA]);
        let mus = m.mus.clone().unwrap_or_else(|| vec![DEFAULT_MU]);
        let tau = m.temperature.unwrap_or(DEFAULT_TEMPERATURE);
        match &m.connectivity {
            Some(rows) => ModelConfig::new(
                n,
                lambdas,
                mus,
                tau,
                rows.iter().map(|&[pre, post, delay]| Synapse { pre, post, delay }),
            ),
            None => ModelConfig::dense(n, lambdas, mus, tau, m.delay.unwrap_or(DEFAULT_DELAY)),
        }
    }

    pub fn trainer_config(&self) -> TrainerConfig {
        TrainerConfig {
            learning_rate: self.trainer.learning_rate,
            epochs: self.trainer.epochs,
            mode: self.trainer.mode,
            shuffle_seed: None,
        }
    }
}
