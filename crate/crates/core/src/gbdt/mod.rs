//! Histogram gradient-boosted decision trees.
//!
//! Features are bucketed into at most 255 quantile bins, trees grow
//! leaf-wise on second-order gain, and both binary log-loss and multiclass
//! softmax cross-entropy objectives are supported. Targets may be soft
//! distributions, which is what distillation relies on.

mod bins;
mod model;
mod objective;
mod split;
mod train;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bins::{bin_feature, build_bins, BinMapper, BinnedMatrix, FeatureMatrix};
pub use model::{argmax_class, BoostedModel, MODEL_VERSION};
pub use objective::{
    binary_grad_hess, binary_log_loss, sigmoid, softmax, softmax_cross_entropy, softmax_grad_hess,
    softmax_in_place,
};
pub use split::{best_split, split_gain, BinStat, Histogram, SplitCandidate};
pub use train::{one_hot, targets_for_table, train, train_table, LogEntry, TrainData, TrainOutput};
pub use tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Binary,
    Multiclass,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Binary => "binary",
            Objective::Multiclass => "multiclass",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "binary" => Some(Objective::Binary),
            "multiclass" => Some(Objective::Multiclass),
            _ => None,
        }
    }
}

/// Booster hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbdtParams {
    pub objective: Objective,
    pub num_class: usize,
    pub num_leaves: usize,
    pub learning_rate: f64,
    pub feature_fraction: f64,
    pub bagging_fraction: f64,
    /// Resample rows every this many iterations; 0 disables bagging.
    pub bagging_freq: usize,
    pub num_iterations: usize,
    /// Patience on validation loss; 0 disables early stopping.
    pub early_stopping_rounds: usize,
    pub max_bins: usize,
    pub lambda_l2: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self::multiclass(7)
    }
}

impl GbdtParams {
    pub fn binary() -> Self {
        Self {
            objective: Objective::Binary,
            num_class: 1,
            num_leaves: 63,
            learning_rate: 0.05,
            feature_fraction: 0.9,
            bagging_fraction: 0.8,
            bagging_freq: 5,
            num_iterations: 200,
            early_stopping_rounds: 20,
            max_bins: 255,
            lambda_l2: 1.0,
            min_samples_leaf: 20,
            seed: 42,
        }
    }

    pub fn multiclass(num_class: usize) -> Self {
        Self {
            objective: Objective::Multiclass,
            num_class,
            ..Self::binary()
        }
    }

    /// Compact student: fewer leaves and rounds, larger steps.
    pub fn student(num_class: usize) -> Self {
        Self {
            num_leaves: 15,
            learning_rate: 0.10,
            feature_fraction: 0.8,
            bagging_fraction: 0.8,
            bagging_freq: 0,
            num_iterations: 50,
            ..Self::multiclass(num_class)
        }
    }

    /// Number of raw scores per row.
    pub fn n_outputs(&self) -> usize {
        match self.objective {
            Objective::Binary => 1,
            Objective::Multiclass => self.num_class,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_leaves < 2 {
            return bad(format!("num_leaves must be >= 2, got {}", self.num_leaves));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            ));
        }
        for (name, v) in [
            ("feature_fraction", self.feature_fraction),
            ("bagging_fraction", self.bagging_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        if !(2..=255).contains(&self.max_bins) {
            return bad(format!(
                "max_bins must be in [2, 255], got {}",
                self.max_bins
            ));
        }
        if !(self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite()) {
            return bad(format!("lambda_l2 must be >= 0, got {}", self.lambda_l2));
        }
        if self.objective == Objective::Multiclass && self.num_class < 2 {
            return bad(format!(
                "multiclass needs num_class >= 2, got {}",
                self.num_class
            ));
        }
        Ok(())
    }
}
