use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Named numeric columns of equal length. No missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    n: usize,
}

impl Dataset {
    pub fn new(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |(_, c)| c.len());
        if n == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        let mut index = HashMap::new();
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::Data(format!("column {name:?} has {} rows, expected {n}", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("column {name:?} row {i} is not a finite number")));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::Data(format!("duplicate column {name:?}")));
            }
            names.push(name);
            cols.push(col);
        }
        Ok(Self { names, columns: cols, index, n })
    }

    /// Reads a CSV file with a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Data(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut cols = vec![Vec::new(); headers.len()];
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Data(format!("row {} column {:?}: {cell:?} is not a number", r + 1, headers[c]))
                })?;
                cols[c].push(v);
            }
        }
        Self::new(headers.into_iter().zip(cols).collect())
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(&self.names).map_err(io)?;
        for i in 0..self.n {
            w.write_record(self.columns.iter().map(|c| format!("{}", c[i]))).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.columns[i].as_slice())
    }

    pub(crate) fn column_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn column_at(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }
}

/// Observation weights: the empirical measure (all ones) or multinomial
/// bootstrap counts. Any nonnegative vector summing to `n` is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    w: Vec<f64>,
}

impl Weights {
    pub fn uniform(n: usize) -> Self {
        Self { w: vec![1.0; n] }
    }

    pub fn from_counts(counts: &[u32]) -> Self {
        Self { w: counts.iter().map(|&c| c as f64).collect() }
    }

    pub fn new(w: Vec<f64>) -> Result<Self> {
        let n = w.len() as f64;
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = w.iter().sum();
        if (total - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected {n}")));
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}
