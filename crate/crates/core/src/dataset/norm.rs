//! Z-score feature normalisation with single-pass, chunk-mergeable moments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::table::SampleTable;
use crate::error::{Error, Result};

/// Standard deviations below this are treated as constant columns.
pub const SIGMA_EPS: f64 = 1e-12;

/// Running count / mean / sum of squared deviations for one column.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Pairwise (Chan et al.) combination of two partial results.
    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / n as f64;
        Moments {
            count: n,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// Population standard deviation, with constant columns mapped to 1.
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    /// Two-row CSV: means, then standard deviations.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        let io = |e| Error::io(path, e);
        writeln!(w, "{}", self.names.join(",")).map_err(io)?;
        for row in [&self.mean, &self.std] {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let t = SampleTable::read_csv(path)?;
        if t.n_rows() != 2 {
            return Err(Error::Schema(format!(
                "normalisation stats need 2 rows, found {}",
                t.n_rows()
            )));
        }
        Ok(Self {
            names: t.columns().to_vec(),
            mean: t.row(0).to_vec(),
            std: t.row(1).to_vec(),
        })
    }
}

/// Fits per-feature mean and population std in one streaming pass over
/// `chunk_rows`-row chunks, merging chunk moments pairwise.
pub fn fit_norm_stats(table: &SampleTable, chunk_rows: usize) -> Result<NormStats> {
    if chunk_rows == 0 {
        return Err(Error::Config("chunk_rows must be at least 1".into()));
    }
    if table.n_rows() == 0 {
        return Err(Error::Empty(
            "cannot fit normalisation on an empty table".into(),
        ));
    }
    let idx = table.feature_indices();
    let width = table.n_cols();
    let mut total = vec![Moments::default(); idx.len()];
    for chunk in table.data().chunks(chunk_rows * width) {
        let mut local = vec![Moments::default(); idx.len()];
        for row in chunk.chunks_exact(width) {
            for (m, &c) in local.iter_mut().zip(&idx) {
                m.push(row[c]);
            }
        }
        for (t, l) in total.iter_mut().zip(local) {
            *t = t.merge(l);
        }
    }
    let names = table.feature_names();
    let mean = total.iter().map(|m| m.mean).collect();
    let std = total
        .iter()
        .map(|m| {
            let s = m.std();
            if s < SIGMA_EPS {
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(NormStats { names, mean, std })
}

fn check_schema(table: &SampleTable, stats: &NormStats) -> Result<Vec<usize>> {
    let names = table.feature_names();
    if names != stats.names {
        return Err(Error::Schema(format!(
            "feature columns do not match normalisation stats ({} vs {} features)",
            names.len(),
            stats.names.len()
        )));
    }
    Ok(table.feature_indices())
}

/// `x_norm = (x - mean) / std` on every feature column.
pub fn normalize(table: &SampleTable, stats: &NormStats) -> Result<SampleTable> {
    let idx = check_schema(table, stats)?;
    let mut out = table.clone();
    let w = out.n_cols();
    for row in out.data_mut().chunks_exact_mut(w) {
        for (k, &c) in idx.iter().enumerate() {
            row[c] = (row[c] - stats.mean[k]) / stats.std[k];
        }
    }
    Ok(out)
}

/// Inverse of [`normalize`].
pub fn denormalize(table: &SampleTable, stats: &NormStats) -> Result<SampleTable> {
    let idx = check_schema(table, stats)?;
    let mut out = table.clone();
    let w = out.n_cols();
    for row in out.data_mut().chunks_exact_mut(w) {
        for (k, &c) in idx.iter().enumerate() {
            row[c] = row[c] * stats.std[k] + stats.mean[k];
        }
    }
    Ok(out)
}

/// Memory-saving options. Both default off.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepFlags {
    /// Round every feature to single precision.
    pub to_f32: bool,
    /// Divide feature columns whose magnitude exceeds 1000 by 1000.
    pub rescale_large: bool,
}

pub fn apply_prep_flags(table: &SampleTable, flags: PrepFlags) -> SampleTable {
    let mut out = table.clone();
    let idx = out.feature_indices();
    let w = out.n_cols();
    let large: Vec<bool> = idx
        .iter()
        .map(|&c| flags.rescale_large && table.column(c).any(|x| x.abs() > 1000.0))
        .collect();
    for row in out.data_mut().chunks_exact_mut(w) {
        for (k, &c) in idx.iter().enumerate() {
            if large[k] {
                row[c] /= 1000.0;
            }
            if flags.to_f32 {
                row[c] = row[c] as f32 as f64;
            }
        }
    }
    out
}
