//! Boosting loop: gradients, bagging, feature sampling and early stopping.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bins::{build_bins, BinnedMatrix, FeatureMatrix};
use super::model::BoostedModel;
use super::objective::{binary_log_loss, sigmoid, softmax_cross_entropy, softmax_in_place};
use super::tree::{grow, GrowContext};
use super::{GbdtParams, Objective};
use crate::dataset::SampleTable;
use crate::error::{Error, Result};

const PRIOR_EPS: f64 = 1e-15;

/// Features plus row-major soft targets (`n × n_outputs`).
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a> {
    pub x: &'a FeatureMatrix,
    pub targets: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub iteration: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: BoostedModel,
    pub log: Vec<LogEntry>,
}

impl TrainOutput {
    /// Training log as CSV text.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iteration,train_loss,valid_loss\n");
        for e in &self.log {
            let v = e.valid_loss.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{}\n", e.iteration, e.train_loss, v));
        }
        s
    }
}

/// One-hot rows for hard labels.
pub fn one_hot(labels: &[usize], k: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; labels.len() * k];
    for (i, &y) in labels.iter().enumerate() {
        if y >= k {
            return Err(Error::Dimension(format!("label {y} outside 0..{k}")));
        }
        out[i * k + y] = 1.0;
    }
    Ok(out)
}

/// Hard-label targets for the objective: `label_bin` or one-hot `label_multi`.
pub fn targets_for_table(table: &SampleTable, params: &GbdtParams) -> Result<Vec<f64>> {
    match params.objective {
        Objective::Binary => Ok(table.labels_bin()?.into_iter().map(|y| y as f64).collect()),
        Objective::Multiclass => one_hot(&table.labels_multi()?, params.num_class),
    }
}

/// Trains on a labelled table, with an optional validation table for
/// early stopping.
pub fn train_table(
    params: &GbdtParams,
    train_set: &SampleTable,
    valid: Option<&SampleTable>,
) -> Result<TrainOutput> {
    let x = FeatureMatrix::from_rows(&train_set.features());
    let y = targets_for_table(train_set, params)?;
    let v = match valid {
        Some(t) => {
            if t.feature_names() != train_set.feature_names() {
                return Err(Error::Schema(
                    "validation columns differ from training".into(),
                ));
            }
            Some((
                FeatureMatrix::from_rows(&t.features()),
                targets_for_table(t, params)?,
            ))
        }
        None => None,
    };
    train(
        params,
        train_set.feature_names(),
        TrainData { x: &x, targets: &y },
        v.as_ref().map(|(x, y)| TrainData { x, targets: y }),
    )
}

fn check_data(d: &TrainData<'_>, k: usize, n_features: usize, what: &str) -> Result<()> {
    if d.x.n_features() != n_features {
        return Err(Error::Dimension(format!(
            "{what} has {} features, expected {n_features}",
            d.x.n_features()
        )));
    }
    if d.targets.len() != d.x.n_rows() * k {
        return Err(Error::Dimension(format!(
            "{what} has {} targets for {} rows × {k} outputs",
            d.targets.len(),
            d.x.n_rows()
        )));
    }
    if d.targets
        .iter()
        .any(|t| !t.is_finite() || *t < 0.0 || *t > 1.0)
    {
        return Err(Error::NonFinite(format!(
            "{what} targets must lie in [0, 1]"
        )));
    }
    Ok(())
}

fn base_scores(params: &GbdtParams, targets: &[f64], n: usize) -> Result<Vec<f64>> {
    let k = params.n_outputs();
    let mut mass = vec![0.0; k];
    for row in targets.chunks(k) {
        for (m, t) in mass.iter_mut().zip(row) {
            *m += t;
        }
    }
    let prior: Vec<f64> = mass.iter().map(|m| m / n as f64).collect();
    match params.objective {
        Objective::Binary => {
            let p = prior[0].clamp(PRIOR_EPS, 1.0 - PRIOR_EPS);
            Ok(vec![(p / (1.0 - p)).ln()])
        }
        Objective::Multiclass => {
            if prior.iter().filter(|&&p| p > 0.0).count() < 2 {
                return Err(Error::Config(
                    "multiclass training needs at least two classes present".into(),
                ));
            }
            Ok(prior.iter().map(|p| p.max(PRIOR_EPS).ln()).collect())
        }
    }
}

fn mean_loss(obj: Objective, k: usize, targets: &[f64], scores: &[f64]) -> f64 {
    let n = targets.len() / k;
    let per_chunk: Vec<f64> = targets
        .par_chunks(k * 4096)
        .zip(scores.par_chunks(k * 4096))
        .map(|(t, s)| match obj {
            Objective::Binary => t.iter().zip(s).map(|(&y, &z)| binary_log_loss(y, z)).sum(),
            Objective::Multiclass => t
                .chunks(k)
                .zip(s.chunks(k))
                .map(|(t, s)| softmax_cross_entropy(t, s))
                .sum(),
        })
        .collect();
    per_chunk.iter().sum::<f64>() / n as f64
}

/// Per-output gradient and hessian columns.
fn gradients(
    obj: Objective,
    k: usize,
    targets: &[f64],
    scores: &[f64],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = targets.len() / k;
    let mut g = vec![vec![0.0; n]; k];
    let mut h = vec![vec![0.0; n]; k];
    match obj {
        Objective::Binary => {
            g[0].par_iter_mut()
                .zip(h[0].par_iter_mut())
                .enumerate()
                .for_each(|(i, (g, h))| {
                    let p = sigmoid(scores[i]);
                    *g = p - targets[i];
                    *h = p * (1.0 - p);
                });
        }
        Objective::Multiclass => {
            let gh: Vec<(f64, f64)> = targets
                .par_chunks(k)
                .zip(scores.par_chunks(k))
                .flat_map_iter(|(t, s)| {
                    let mut p = s.to_vec();
                    softmax_in_place(&mut p);
                    (0..k).map(move |c| (p[c] - t[c], p[c] * (1.0 - p[c])))
                })
                .collect();
            for (i, chunk) in gh.chunks(k).enumerate() {
                for (c, &(gc, hc)) in chunk.iter().enumerate() {
                    g[c][i] = gc;
                    h[c][i] = hc;
                }
            }
        }
    }
    (g, h)
}

fn add_tree(scores: &mut [f64], k: usize, c: usize, x: &FeatureMatrix, tree: &super::Tree) {
    scores
        .par_chunks_mut(k)
        .enumerate()
        .for_each(|(i, s)| s[c] += tree.predict(&x.row(i)));
}

/// Fits a boosted ensemble.
///
/// Targets may be soft; gradients are `p - q` for whatever distribution `q`
/// is supplied. With a validation set, training stops once its loss has
/// not improved for `early_stopping_rounds` iterations and the model is cut
/// back to the best iteration.
pub fn train(
    params: &GbdtParams,
    feature_names: Vec<String>,
    train_set: TrainData<'_>,
    valid: Option<TrainData<'_>>,
) -> Result<TrainOutput> {
    params.validate()?;
    let k = params.n_outputs();
    let n = train_set.x.n_rows();
    let n_features = feature_names.len();
    if n == 0 {
        return Err(Error::Empty("training set has no rows".into()));
    }
    check_data(&train_set, k, n_features, "training set")?;
    if let Some(v) = &valid {
        check_data(v, k, n_features, "validation set")?;
        if v.x.n_rows() == 0 {
            return Err(Error::Empty("validation set has no rows".into()));
        }
    }

    let base = base_scores(params, train_set.targets, n)?;
    let mut model = BoostedModel::empty(params.clone(), feature_names, base.clone());
    let mappers = build_bins(train_set.x, params.max_bins);
    let binned = BinnedMatrix::new(train_set.x, &mappers);
    let n_bins: Vec<usize> = mappers.iter().map(|m| m.n_bins()).collect();

    let mut scores: Vec<f64> = base.iter().copied().cycle().take(n * k).collect();
    let mut v_scores: Vec<f64> = valid
        .map(|v| {
            base.iter()
                .copied()
                .cycle()
                .take(v.x.n_rows() * k)
                .collect()
        })
        .unwrap_or_default();

    let mut feat_rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut bag_rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xB5AD_4ECE_DA1C_E2A9);
    let bagging = params.bagging_freq > 0 && params.bagging_fraction < 1.0;
    let bag_size = ((n as f64 * params.bagging_fraction).round() as usize).clamp(1, n);
    let n_feat_keep = ((n_features as f64 * params.feature_fraction).round() as usize)
        .clamp(1, n_features.max(1));
    let mut bag: Vec<u32> = (0..n as u32).collect();

    let mut log = Vec::with_capacity(params.num_iterations);
    let mut best = (f64::INFINITY, 0usize);
    for it in 0..params.num_iterations {
        if bagging && it % params.bagging_freq == 0 {
            let mut idx: Vec<u32> = sample(&mut bag_rng, n, bag_size)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            idx.sort_unstable();
            bag = idx;
        }
        let (g, h) = gradients(params.objective, k, train_set.targets, &scores);
        for c in 0..k {
            let mut allowed = vec![false; n_features];
            if n_feat_keep >= n_features {
                allowed.fill(true);
            } else {
                for f in sample(&mut feat_rng, n_features, n_feat_keep) {
                    allowed[f] = true;
                }
            }
            let ctx = GrowContext {
                binned: &binned,
                mappers: &mappers,
                n_bins: &n_bins,
                allowed: &allowed,
                num_leaves: params.num_leaves,
                lambda: params.lambda_l2,
                min_samples_leaf: params.min_samples_leaf,
                learning_rate: params.learning_rate,
            };
            let mut rows = bag.clone();
            let tree = grow(&ctx, &mut rows, &g[c], &h[c]);
            add_tree(&mut scores, k, c, train_set.x, &tree);
            if let Some(v) = &valid {
                add_tree(&mut v_scores, k, c, v.x, &tree);
            }
            model.trees.push(tree);
        }
        let train_loss = mean_loss(params.objective, k, train_set.targets, &scores);
        let valid_loss = valid.map(|v| mean_loss(params.objective, k, v.targets, &v_scores));
        log.push(LogEntry {
            iteration: it + 1,
            train_loss,
            valid_loss,
        });
        if let Some(vl) = valid_loss {
            if vl < best.0 {
                best = (vl, it + 1);
            } else if params.early_stopping_rounds > 0
                && it + 1 - best.1 >= params.early_stopping_rounds
            {
                break;
            }
        }
    }
    model.best_iteration = if valid.is_some() { best.1 } else { log.len() };
    model.truncate(model.best_iteration);
    Ok(TrainOutput { model, log })
}
