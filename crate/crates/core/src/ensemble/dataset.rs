use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const BENIGN: u8 = 0;
pub const MALICIOUS: u8 = 1;

/// Default width of a flow feature vector.
pub const DEFAULT_FEATURE_COUNT: usize = 72;

pub type FeatureVector = Vec<f64>;

/// Binary-labelled feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_count: usize,
    rows: Vec<FeatureVector>,
    labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(feature_count: usize) -> Self {
        Self {
            feature_count,
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_rows(feature_count: usize, rows: Vec<(FeatureVector, u8)>) -> Result<Self> {
        let mut ds = Self::new(feature_count);
        for (row, label) in rows {
            ds.push(row, label)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, row: FeatureVector, label: u8) -> Result<()> {
        if self.feature_count == 0 {
            return Err(Error::InvalidArgument("feature_count must be positive".into()));
        }
        if row.len() != self.feature_count {
            return Err(Error::InvalidArgument(format!(
                "row has {} features, dataset expects {}",
                row.len(),
                self.feature_count
            )));
        }
        if label > 1 {
            return Err(Error::InvalidArgument(format!("label {label} is not binary")));
        }
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in column {bad}")));
        }
        self.rows.push(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], u8)> {
        self.rows.iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }

    /// Keeps only the given columns, in the given order.
    pub fn project(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.feature_count) {
            return Err(Error::FeatureOutOfRange {
                index: bad,
                len: self.feature_count,
            });
        }
        Ok(Self {
            feature_count: columns.len(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
        })
    }

    /// Seeded shuffle followed by a cut: `train_fraction` of the rows go to the
    /// first set, the rest to the holdout.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {train_fraction} outside [0, 1]"
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cut = (self.len() as f64 * train_fraction).round() as usize;
        let pick = |idx: &[usize]| Self {
            feature_count: self.feature_count,
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        };
        Ok((pick(&order[..cut]), pick(&order[cut..])))
    }

    /// CSV with header `f0,...,f{F-1},label`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        let header: Vec<String> = (0..self.feature_count)
            .map(|i| format!("f{i}"))
            .chain(std::iter::once("label".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (row, label) in self.iter() {
            for v in row {
                write!(out, "{v},")?;
            }
            writeln!(out, "{label}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
        let headers = reader.headers()?.clone();
        let label_col = headers
            .iter()
            .position(|h| h == "label")
            .ok_or_else(|| Error::Parse("dataset has no `label` column".into()))?;
        let feature_count = headers.len() - 1;
        let mut ds = Self::new(feature_count);
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let mut row = Vec::with_capacity(feature_count);
            let mut label = None;
            for (col, field) in record.iter().enumerate() {
                let value: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: column {col}: bad number {field:?}", line + 1)))?;
                if col == label_col {
                    label = Some(value);
                } else {
                    row.push(value);
                }
            }
            let label = match label {
                Some(0.0) => BENIGN,
                Some(1.0) => MALICIOUS,
                other => return Err(Error::Parse(format!("row {}: bad label {other:?}", line + 1))),
            };
            ds.push(row, label)
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        }
        Ok(ds)
    }
}
