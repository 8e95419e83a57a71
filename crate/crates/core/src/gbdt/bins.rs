//! Quantile histogram binning.

use rayon::prelude::*;

/// Column-major dense feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_features: usize,
    cols: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_features = rows.first().map_or(0, Vec::len);
        let mut cols = vec![0.0; n_rows * n_features];
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_features, "ragged feature rows");
            for (f, &x) in r.iter().enumerate() {
                cols[f * n_rows + i] = x;
            }
        }
        Self {
            n_rows,
            n_features,
            cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn column(&self, f: usize) -> &[f64] {
        &self.cols[f * self.n_rows..(f + 1) * self.n_rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n_features)
            .map(|f| self.cols[f * self.n_rows + i])
            .collect()
    }
}

/// Bin boundaries of one feature. Value `x` falls in bin `b` where `b`
/// counts the thresholds strictly below `x`; so `x <= thresholds[b]`
/// exactly when `bin(x) <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMapper {
    pub thresholds: Vec<f64>,
}

impl BinMapper {
    pub fn n_bins(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn bin(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t < x)
    }
}

fn cut_between(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid >= b {
        a
    } else {
        mid
    }
}

/// Quantile bin edges for one feature, at most `max_bins` bins.
///
/// With no more distinct values than `max_bins` every distinct value gets
/// its own bin; otherwise distinct values are grouped greedily so each bin
/// holds roughly `n / max_bins` samples.
pub fn bin_feature(values: &[f64], max_bins: usize) -> BinMapper {
    let max_bins = max_bins.max(2);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for x in sorted {
        match distinct.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => distinct.push((x, 1)),
        }
    }
    if distinct.len() <= max_bins {
        let thresholds = distinct
            .windows(2)
            .map(|w| cut_between(w[0].0, w[1].0))
            .collect();
        return BinMapper { thresholds };
    }
    let n = values.len() as f64;
    let mut thresholds = Vec::with_capacity(max_bins - 1);
    let mut acc = 0usize;
    let mut remaining_bins = max_bins;
    let mut remaining = values.len();
    let mut in_bin = 0usize;
    for k in 0..distinct.len() - 1 {
        let c = distinct[k].1;
        acc += c;
        in_bin += c;
        remaining -= c;
        let target = remaining_bins.max(1) as f64;
        let per_bin = (remaining + in_bin) as f64 / target;
        let next = distinct[k + 1].1 as f64;
        // close the bin once it is full, or when adding the next value would
        // overshoot by more than closing now undershoots
        let close = in_bin as f64 >= per_bin
            || (in_bin as f64 + next - per_bin) > (per_bin - in_bin as f64);
        if close && remaining_bins > 1 {
            thresholds.push(cut_between(distinct[k].0, distinct[k + 1].0));
            remaining_bins -= 1;
            in_bin = 0;
        }
        debug_assert!(acc as f64 <= n);
    }
    BinMapper { thresholds }
}

/// Bins every column in parallel.
pub fn build_bins(x: &FeatureMatrix, max_bins: usize) -> Vec<BinMapper> {
    (0..x.n_features())
        .into_par_iter()
        .map(|f| bin_feature(x.column(f), max_bins))
        .collect()
}

/// Column-major matrix of bin indices.
#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    pub n_rows: usize,
    pub bins: Vec<Vec<u8>>,
}

impl BinnedMatrix {
    pub fn new(x: &FeatureMatrix, mappers: &[BinMapper]) -> Self {
        let bins = mappers
            .par_iter()
            .enumerate()
            .map(|(f, m)| x.column(f).iter().map(|&v| m.bin(v) as u8).collect())
            .collect();
        Self {
            n_rows: x.n_rows(),
            bins,
        }
    }
}
