use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const TIME: &str = "time";
pub const LABEL_BIN: &str = "label_bin";
pub const LABEL_MULTI: &str = "label_multi";

/// Rounds to the on-disk numeric format: 9 significant decimal digits.
///
/// The result prints (via `Display`) as plain decimal text and parses back
/// to the identical `f64`.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Column-named, row-major numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    columns: Vec<String>,
    data: Vec<f64>,
}

impl SampleTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            data: Vec::new(),
        }
    }

    pub fn from_rows(columns: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if columns.is_empty() || !data.len().is_multiple_of(columns.len()) {
            return Err(Error::Dimension(format!(
                "{} values do not fill rows of {} columns",
                data.len(),
                columns.len()
            )));
        }
        Ok(Self { columns, data })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.data.len() / self.columns.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_cols();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols().max(1))
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols() {
            return Err(Error::Dimension(format!(
                "row of {} values for {} columns",
                row.len(),
                self.n_cols()
            )));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn require_column(&self, name: &str) -> Result<usize> {
        self.column_index(name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    }

    pub fn column(&self, idx: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[idx])
    }

    /// Indices of measurement columns (everything except time and labels).
    pub fn feature_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !matches!(c.as_str(), TIME | LABEL_BIN | LABEL_MULTI))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.columns[i].clone())
            .collect()
    }

    pub fn has_labels(&self) -> bool {
        self.column_index(LABEL_BIN).is_some() || self.column_index(LABEL_MULTI).is_some()
    }

    pub fn labels_multi(&self) -> Result<Vec<usize>> {
        self.labels(LABEL_MULTI)
    }

    pub fn labels_bin(&self) -> Result<Vec<usize>> {
        self.labels(LABEL_BIN)
    }

    fn labels(&self, name: &str) -> Result<Vec<usize>> {
        let idx = self.require_column(name)?;
        self.column(idx)
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Schema(format!("non-integral label {v} in `{name}`")))
                }
            })
            .collect()
    }

    /// Feature matrix (row-major) restricted to measurement columns.
    pub fn features(&self) -> Vec<Vec<f64>> {
        let idx = self.feature_indices();
        self.rows()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect()
    }

    /// New table with the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            columns: self.columns.clone(),
            data,
        }
    }

    /// New table without the named columns.
    pub fn drop_columns(&self, names: &[String]) -> Result<Self> {
        for n in names {
            self.require_column(n)?;
        }
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&i| !names.contains(&self.columns[i]))
            .collect();
        let columns = keep.iter().map(|&i| self.columns[i].clone()).collect();
        let data = self
            .rows()
            .flat_map(|r| keep.iter().map(move |&i| r[i]))
            .collect();
        Ok(Self { columns, data })
    }

    /// Appends a column filled by `f(row)`.
    pub fn with_column(&self, name: &str, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut columns = self.columns.clone();
        columns.push(name.to_string());
        let mut data = Vec::with_capacity(self.n_rows() * columns.len());
        for r in self.rows() {
            data.extend_from_slice(r);
            data.push(f(r));
        }
        Self { columns, data }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn write_csv_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().from_writer(w);
        wr.write_record(&self.columns)?;
        let mut buf: Vec<String> = Vec::with_capacity(self.n_cols());
        for r in self.rows() {
            buf.clear();
            buf.extend(r.iter().map(|&x| round_sig9(x).to_string()));
            wr.write_record(&buf)?;
        }
        wr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv_from<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let columns: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let mut data = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(Error::Schema(format!(
                    "data row {} has {} fields, header has {}",
                    line + 1,
                    rec.len(),
                    columns.len()
                )));
            }
            for field in rec.iter() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Schema(format!("data row {}: `{field}` is not a number", line + 1))
                })?;
                data.push(v);
            }
        }
        Ok(Self { columns, data })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(BufWriter::new(f))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(round_sig9(0.1).to_string(), "0.1");
        assert_eq!(round_sig9(59.9999999999).to_string(), "60");
        assert_eq!(round_sig9(123456.789012).to_string(), "123456.789");
        assert_eq!(round_sig9(7000.0 * 1e-4), 0.7);
    }

    #[test]
    fn feature_indices_skip_time_and_labels() {
        let t = SampleTable::new(cols(&["time", "V1", "P_DG1", "label_bin", "label_multi"]));
        assert_eq!(t.feature_indices(), vec![1, 2]);
        assert!(t.has_labels());
    }

    #[test]
    fn malformed_csv_rejected() {
        let text = "time,V1\n0,1\n0.1,abc\n";
        assert!(SampleTable::read_csv_from(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bitwise(values in prop::collection::vec(-1e7f64..1e7, 3..60)) {
            let n = values.len() / 3 * 3;
            let data: Vec<f64> = values[..n].iter().map(|&v| round_sig9(v)).collect();
            let t = SampleTable::from_rows(cols(&["time", "a", "b"]), data).unwrap();
            let mut buf = Vec::new();
            t.write_csv_to(&mut buf).unwrap();
            let back = SampleTable::read_csv_from(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &t);
            let mut buf2 = Vec::new();
            back.write_csv_to(&mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
