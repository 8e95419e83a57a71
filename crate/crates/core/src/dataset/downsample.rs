use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{SampleTable, TIME};
use crate::error::{Error, Result};

/// Default half-width of the always-kept window around attack onsets, s.
pub const DEFAULT_ONSET_WINDOW: f64 = 5e-3;

/// Onset times: rows whose binary label switches from normal to attack.
pub fn onset_times(table: &SampleTable) -> Result<Vec<f64>> {
    let bin = table.labels_bin()?;
    let t_idx = table.require_column(TIME)?;
    let mut onsets: Vec<f64> = Vec::new();
    for i in 0..bin.len() {
        if bin[i] == 1 && (i == 0 || bin[i - 1] == 0) {
            let t = table.row(i)[t_idx];
            if !onsets.contains(&t) {
                onsets.push(t);
            }
        }
    }
    Ok(onsets)
}

/// Keeps every attack row and a seeded `normal_keep_fraction` of normal
/// rows; normal rows within `window` seconds of any onset are always kept.
pub fn downsample(
    table: &SampleTable,
    normal_keep_fraction: f64,
    window: f64,
    seed: u64,
) -> Result<SampleTable> {
    if !(normal_keep_fraction > 0.0 && normal_keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "normal_keep_fraction {normal_keep_fraction} outside (0, 1]"
        )));
    }
    let bin = table.labels_bin()?;
    let onsets = onset_times(table)?;
    let t_idx = table.require_column(TIME)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep: Vec<usize> = (0..table.n_rows())
        .filter(|&i| {
            if bin[i] != 0 {
                return true;
            }
            // draw for every normal row so the stream does not depend on windows
            let draw = rng.gen::<f64>() < normal_keep_fraction;
            let t = table.row(i)[t_idx];
            draw || onsets.iter().any(|&o| (t - o).abs() <= window + 1e-9)
        })
        .collect();
    Ok(table.select_rows(&keep))
}
