use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::table::SampleTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    /// (train, validation, test) fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            ratios: [0.70, 0.15, 0.15],
            seed: 17,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.ratios.iter().sum();
        if self.ratios.iter().any(|&r| !(r > 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios {:?} must be positive and sum to 1",
                self.ratios
            )));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `target` rows across classes with
/// sizes `counts` at fraction `ratio`, each class receiving at least one.
fn apportion(counts: &[usize], ratio: f64, target: usize) -> Vec<usize> {
    let exact: Vec<f64> = counts.iter().map(|&n| n as f64 * ratio).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| (e.floor() as usize).max(1)).collect();
    let assigned: usize = quota.iter().sum();
    if assigned < target {
        let mut order: Vec<usize> = (0..counts.len()).collect();
        // stable sort: ties keep the lowest class first
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
        });
        for &c in order.iter().cycle().take(target - assigned) {
            quota[c] += 1;
        }
    }
    quota
}

/// Stratified (train, val, test) row indices, each ascending.
///
/// Partition totals are `round(N * r_val)`, `round(N * r_test)` and the
/// remainder for training; per-class quotas follow by largest remainder.
pub fn stratified_indices(labels: &[usize], spec: &SplitSpec) -> Result<[Vec<usize>; 3]> {
    spec.validate()?;
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    if let Some((c, rows)) = by_class.iter().find(|(_, rows)| rows.len() < 3) {
        return Err(Error::Config(format!(
            "class {c} has {} rows; stratified split needs at least 3",
            rows.len()
        )));
    }
    let n = labels.len() as f64;
    let counts: Vec<usize> = by_class.values().map(Vec::len).collect();
    let val = apportion(
        &counts,
        spec.ratios[1],
        (n * spec.ratios[1]).round() as usize,
    );
    let test = apportion(
        &counts,
        spec.ratios[2],
        (n * spec.ratios[2]).round() as usize,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (k, rows) in by_class.into_values().enumerate() {
        let mut rows = rows;
        rows.shuffle(&mut rng);
        let n_val = val[k].min(rows.len().saturating_sub(2));
        let n_test = test[k].min(rows.len() - n_val - 1);
        let n_train = rows.len() - n_val - n_test;
        parts[0].extend_from_slice(&rows[..n_train]);
        parts[1].extend_from_slice(&rows[n_train..n_train + n_val]);
        parts[2].extend_from_slice(&rows[n_train + n_val..]);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

/// Splits on `label_multi`; since the binary label is a function of the
/// multiclass one, both are stratified.
pub fn stratified_split(
    table: &SampleTable,
    spec: &SplitSpec,
) -> Result<(SampleTable, SampleTable, SampleTable)> {
    let labels = table.labels_multi()?;
    let [tr, va, te] = stratified_indices(&labels, spec)?;
    Ok((
        table.select_rows(&tr),
        table.select_rows(&va),
        table.select_rows(&te),
    ))
}
