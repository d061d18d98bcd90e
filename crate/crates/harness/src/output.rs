use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::HarnessError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Pe,
    Fifo,
    Wf2q,
    Opt,
    Greedy,
    None,
    /// Closed-form values with no scheduler behind them.
    Analytic,
}

/// One metric of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: Algorithm,
    pub q: Option<u32>,
    pub c_b: Option<f64>,
    pub b: Option<u32>,
    pub n_b: Option<u32>,
    pub metric: String,
    pub value: f64,
    pub stddev: Option<f64>,
    pub seeds: u32,
}

impl ResultRow {
    pub fn new(experiment: &str, algorithm: Algorithm, metric: impl Into<String>, value: f64) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            algorithm,
            q: None,
            c_b: None,
            b: None,
            n_b: None,
            metric: metric.into(),
            value,
            stddev: None,
            seeds: 1,
        }
    }

    pub fn cell(mut self, q: u32, c_b: Option<f64>, b: Option<u32>, n_b: Option<u32>) -> Self {
        self.q = Some(q);
        self.c_b = c_b;
        self.b = b;
        self.n_b = n_b;
        self
    }

    pub fn spread(mut self, stddev: f64, seeds: u32) -> Self {
        self.stddev = Some(stddev);
        self.seeds = seeds;
        self
    }
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<Vec<u8>, HarnessError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            w.into_inner().map_err(|e| HarnessError::Write(e.into_error()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Renders everything first so a failure leaves no partial output behind.
pub fn emit(rows: &[ResultRow], format: Format, out: Option<&Path>) -> Result<(), HarnessError> {
    let bytes = render(rows, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
