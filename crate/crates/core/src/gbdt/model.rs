//! Trained ensembles, prediction and the text model format.
//!
//! ```text
//! mgids-gbdt
//! version=1
//! objective=multiclass
//! num_class=7
//! num_features=36
//! feature_names=V1 V2 ...
//! base_score=-1.9 -1.9 ...
//! best_iteration=104
//! param.num_leaves=63
//! ...
//! trees=728
//! tree=0
//! N <feature> <threshold> <gain>
//! L <value>
//! ...
//! end
//! ```
//!
//! Tree nodes are written in preorder; an `N` line is followed by its left
//! subtree and then its right subtree. Floats use the shortest decimal form
//! that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::bins::FeatureMatrix;
use super::objective::{sigmoid, softmax_in_place};
use super::tree::{Node, Tree};
use super::{GbdtParams, Objective};
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;
const MAGIC: &str = "mgids-gbdt";

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    pub params: GbdtParams,
    pub num_features: usize,
    pub feature_names: Vec<String>,
    /// One initial score per output.
    pub base_score: Vec<f64>,
    /// Iteration-major: iteration `i`, output `k` is `trees[i * n_outputs + k]`.
    pub trees: Vec<Tree>,
    pub best_iteration: usize,
}

impl BoostedModel {
    /// An ensemble with no trees that predicts its base score.
    pub fn empty(params: GbdtParams, feature_names: Vec<String>, base_score: Vec<f64>) -> Self {
        Self {
            num_features: feature_names.len(),
            feature_names,
            base_score,
            trees: Vec::new(),
            best_iteration: 0,
            params,
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.params.n_outputs()
    }

    /// Number of classes predicted; 2 for binary models.
    pub fn n_classes(&self) -> usize {
        match self.params.objective {
            Objective::Binary => 2,
            Objective::Multiclass => self.params.num_class,
        }
    }

    pub fn n_iterations(&self) -> usize {
        self.trees.len() / self.n_outputs()
    }

    /// Drops every tree past `iterations`.
    pub fn truncate(&mut self, iterations: usize) {
        self.trees.truncate(iterations * self.n_outputs());
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.num_features {
            return Err(Error::Dimension(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.num_features
            )));
        }
        Ok(())
    }

    /// Raw scores without width checking.
    #[inline]
    pub fn raw_into(&self, row: &[f64], out: &mut [f64]) {
        let k = self.n_outputs();
        out[..k].copy_from_slice(&self.base_score);
        for (i, t) in self.trees.iter().enumerate() {
            out[i % k] += t.predict(row);
        }
    }

    pub fn predict_raw(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row)?;
        let mut out = vec![0.0; self.n_outputs()];
        self.raw_into(row, &mut out);
        Ok(out)
    }

    /// Class probabilities; binary models return `[1 - p, p]`.
    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        let raw = self.predict_raw(row)?;
        Ok(self.link(raw))
    }

    fn link(&self, mut raw: Vec<f64>) -> Vec<f64> {
        match self.params.objective {
            Objective::Binary => {
                let p = sigmoid(raw[0]);
                vec![1.0 - p, p]
            }
            Objective::Multiclass => {
                softmax_in_place(&mut raw);
                raw
            }
        }
    }

    /// Predicted class, computed without allocating.
    #[inline]
    pub fn predict_class_unchecked(&self, row: &[f64], scratch: &mut [f64]) -> usize {
        self.raw_into(row, scratch);
        match self.params.objective {
            Objective::Binary => usize::from(scratch[0] > 0.0),
            Objective::Multiclass => argmax_class(&scratch[..self.n_outputs()]),
        }
    }

    pub fn predict_class(&self, row: &[f64]) -> Result<usize> {
        self.check_width(row)?;
        let mut scratch = vec![0.0; self.n_outputs()];
        Ok(self.predict_class_unchecked(row, &mut scratch))
    }

    /// Raw scores for every row, row-major `n × n_outputs`.
    pub fn predict_raw_matrix(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_features() != self.num_features {
            return Err(Error::Dimension(format!(
                "matrix has {} features, model expects {}",
                x.n_features(),
                self.num_features
            )));
        }
        let k = self.n_outputs();
        let mut out = vec![0.0; x.n_rows() * k];
        out.par_chunks_mut(k).enumerate().for_each(|(i, o)| {
            self.raw_into(&x.row(i), o);
        });
        Ok(out)
    }

    pub fn predict_classes(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.par_iter().map(|r| self.predict_class(r)).collect()
    }

    /// Total split gain per feature.
    pub fn feature_importance_gain(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.num_features];
        for t in &self.trees {
            for n in &t.nodes {
                if let Node::Internal { feature, gain, .. } = n {
                    imp[*feature] += gain;
                }
            }
        }
        imp
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "version={MODEL_VERSION}");
        let _ = writeln!(s, "objective={}", p.objective.name());
        let _ = writeln!(s, "num_class={}", p.num_class);
        let _ = writeln!(s, "num_features={}", self.num_features);
        let _ = writeln!(s, "feature_names={}", self.feature_names.join(" "));
        let _ = writeln!(s, "base_score={}", join(&self.base_score));
        let _ = writeln!(s, "best_iteration={}", self.best_iteration);
        let _ = writeln!(s, "param.num_leaves={}", p.num_leaves);
        let _ = writeln!(s, "param.learning_rate={}", p.learning_rate);
        let _ = writeln!(s, "param.feature_fraction={}", p.feature_fraction);
        let _ = writeln!(s, "param.bagging_fraction={}", p.bagging_fraction);
        let _ = writeln!(s, "param.bagging_freq={}", p.bagging_freq);
        let _ = writeln!(s, "param.num_iterations={}", p.num_iterations);
        let _ = writeln!(s, "param.early_stopping_rounds={}", p.early_stopping_rounds);
        let _ = writeln!(s, "param.max_bins={}", p.max_bins);
        let _ = writeln!(s, "param.lambda_l2={}", p.lambda_l2);
        let _ = writeln!(s, "param.min_samples_leaf={}", p.min_samples_leaf);
        let _ = writeln!(s, "param.seed={}", p.seed);
        let _ = writeln!(s, "trees={}", self.trees.len());
        for (i, t) in self.trees.iter().enumerate() {
            let _ = writeln!(s, "tree={i}");
            for n in &t.nodes {
                match n {
                    Node::Internal {
                        feature,
                        threshold,
                        gain,
                        ..
                    } => {
                        let _ = writeln!(s, "N {feature} {threshold} {gain}");
                    }
                    Node::Leaf { value } => {
                        let _ = writeln!(s, "L {value}");
                    }
                }
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let magic = lines.next_line()?;
        if magic.1 != MAGIC {
            return Err(fmt_err(magic.0, format!("expected `{MAGIC}` header")));
        }
        let (ln, v) = lines.key("version")?;
        let version: u32 = parse(ln, v)?;
        if version != MODEL_VERSION {
            return Err(fmt_err(
                ln,
                format!("unsupported model version {version}, expected {MODEL_VERSION}"),
            ));
        }
        let (ln, v) = lines.key("objective")?;
        let objective =
            Objective::parse(v).ok_or_else(|| fmt_err(ln, format!("unknown objective `{v}`")))?;
        let num_class: usize = lines.parsed("num_class")?;
        let num_features: usize = lines.parsed("num_features")?;
        let (ln, v) = lines.key("feature_names")?;
        let feature_names: Vec<String> = v.split_whitespace().map(String::from).collect();
        if feature_names.len() != num_features {
            return Err(fmt_err(
                ln,
                "feature name count differs from num_features".into(),
            ));
        }
        let (ln, v) = lines.key("base_score")?;
        let base_score = v
            .split_whitespace()
            .map(|x| parse(ln, x))
            .collect::<Result<Vec<f64>>>()?;
        let best_iteration: usize = lines.parsed("best_iteration")?;
        let params = GbdtParams {
            objective,
            num_class,
            num_leaves: lines.parsed("param.num_leaves")?,
            learning_rate: lines.parsed("param.learning_rate")?,
            feature_fraction: lines.parsed("param.feature_fraction")?,
            bagging_fraction: lines.parsed("param.bagging_fraction")?,
            bagging_freq: lines.parsed("param.bagging_freq")?,
            num_iterations: lines.parsed("param.num_iterations")?,
            early_stopping_rounds: lines.parsed("param.early_stopping_rounds")?,
            max_bins: lines.parsed("param.max_bins")?,
            lambda_l2: lines.parsed("param.lambda_l2")?,
            min_samples_leaf: lines.parsed("param.min_samples_leaf")?,
            seed: lines.parsed("param.seed")?,
        };
        if base_score.len() != params.n_outputs() {
            return Err(fmt_err(
                ln,
                "base_score length differs from output count".into(),
            ));
        }
        let (ln, v) = lines.key("trees")?;
        let n_trees: usize = parse(ln, v)?;
        if !n_trees.is_multiple_of(params.n_outputs()) {
            return Err(fmt_err(
                ln,
                "tree count is not a multiple of output count".into(),
            ));
        }
        let mut trees = Vec::with_capacity(n_trees);
        for i in 0..n_trees {
            let (ln, v) = lines.key("tree")?;
            let idx: usize = parse(ln, v)?;
            if idx != i {
                return Err(fmt_err(ln, format!("expected tree {i}, found {idx}")));
            }
            let mut nodes = Vec::new();
            read_node(&mut lines, &mut nodes, num_features)?;
            trees.push(Tree { nodes });
        }
        let (ln, end) = lines.next_line()?;
        if end != "end" {
            return Err(fmt_err(ln, format!("expected `end`, found `{end}`")));
        }
        Ok(Self {
            params,
            num_features,
            feature_names,
            base_score,
            trees,
            best_iteration,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax_class(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn fmt_err(line: usize, detail: String) -> Error {
    Error::ModelFormat { line, detail }
}

fn parse<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| fmt_err(line, format!("cannot parse `{s}`")))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next line with its 1-based number.
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end()))
            }
            None => Err(fmt_err(
                self.last + 1,
                "unexpected end of file, model is truncated".into(),
            )),
        }
    }

    fn key(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, line) = self.next_line()?;
        match line.split_once('=') {
            Some((k, v)) if k == key => Ok((ln, v)),
            _ => Err(fmt_err(ln, format!("expected `{key}=...`, found `{line}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (ln, v) = self.key(key)?;
        parse(ln, v)
    }
}

fn read_node(lines: &mut Lines<'_>, nodes: &mut Vec<Node>, n_features: usize) -> Result<usize> {
    let (ln, line) = lines.next_line()?;
    let at = nodes.len();
    let mut parts = line.split_whitespace();
    match (
        parts.next(),
        parts.next(),
        parts.next(),
        parts.next(),
        parts.next(),
    ) {
        (Some("L"), Some(v), None, None, None) => {
            nodes.push(Node::Leaf {
                value: parse(ln, v)?,
            });
        }
        (Some("N"), Some(f), Some(t), Some(g), None) => {
            let feature: usize = parse(ln, f)?;
            if feature >= n_features {
                return Err(fmt_err(ln, format!("feature index {feature} out of range")));
            }
            let threshold: f64 = parse(ln, t)?;
            let gain: f64 = parse(ln, g)?;
            nodes.push(Node::Leaf { value: 0.0 });
            let left = read_node(lines, nodes, n_features)?;
            let right = read_node(lines, nodes, n_features)?;
            nodes[at] = Node::Internal {
                feature,
                threshold,
                gain,
                left,
                right,
            };
        }
        _ => return Err(fmt_err(ln, format!("malformed node record `{line}`"))),
    }
    Ok(at)
}
