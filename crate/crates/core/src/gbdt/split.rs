//! Gradient histograms and second-order split search.

use rayon::prelude::*;

use super::bins::BinnedMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinStat {
    pub grad: f64,
    pub hess: f64,
    pub count: u32,
}

impl BinStat {
    fn add(&mut self, g: f64, h: f64) {
        self.grad += g;
        self.hess += h;
        self.count += 1;
    }
}

/// Per-feature, per-bin gradient sums of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub features: Vec<Vec<BinStat>>,
}

impl Histogram {
    /// Accumulates `rows` feature by feature; each feature sums rows in
    /// the given order, so the result does not depend on thread count.
    pub fn build(
        binned: &BinnedMatrix,
        n_bins: &[usize],
        rows: &[u32],
        grad: &[f64],
        hess: &[f64],
    ) -> Self {
        let features = binned
            .bins
            .par_iter()
            .zip(n_bins.par_iter())
            .map(|(col, &nb)| {
                let mut h = vec![BinStat::default(); nb];
                for &r in rows {
                    let r = r as usize;
                    h[col[r] as usize].add(grad[r], hess[r]);
                }
                h
            })
            .collect();
        Self { features }
    }

    /// `self - other`, the sibling histogram.
    pub fn subtract(&self, other: &Histogram) -> Histogram {
        let features = self
            .features
            .iter()
            .zip(&other.features)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| BinStat {
                        grad: x.grad - y.grad,
                        hess: x.hess - y.hess,
                        count: x.count - y.count,
                    })
                    .collect()
            })
            .collect();
        Histogram { features }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    /// Rows with bin index `<= bin` go left.
    pub bin: usize,
    pub gain: f64,
    pub left: BinStat,
    pub right: BinStat,
}

pub fn leaf_score(g: f64, h: f64, lambda: f64) -> f64 {
    let d = h + lambda;
    if d > 0.0 {
        g * g / d
    } else {
        0.0
    }
}

/// Split gain `G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)`.
pub fn split_gain(left: BinStat, right: BinStat, lambda: f64) -> f64 {
    let g = left.grad + right.grad;
    let h = left.hess + right.hess;
    leaf_score(left.grad, left.hess, lambda) + leaf_score(right.grad, right.hess, lambda)
        - leaf_score(g, h, lambda)
}

/// Best split over the allowed features, or `None` when no split has
/// positive gain. Ties go to the lowest feature, then the lowest bin.
pub fn best_split(
    hist: &Histogram,
    allowed: &[bool],
    lambda: f64,
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let min_leaf = min_samples_leaf.max(1) as u32;
    let mut best: Option<SplitCandidate> = None;
    for (f, bins) in hist.features.iter().enumerate() {
        if !allowed.get(f).copied().unwrap_or(false) || bins.len() < 2 {
            continue;
        }
        let total = bins.iter().fold(BinStat::default(), |mut acc, b| {
            acc.grad += b.grad;
            acc.hess += b.hess;
            acc.count += b.count;
            acc
        });
        let mut left = BinStat::default();
        for (b, stat) in bins[..bins.len() - 1].iter().enumerate() {
            left.grad += stat.grad;
            left.hess += stat.hess;
            left.count += stat.count;
            if left.count < min_leaf {
                continue;
            }
            let right = BinStat {
                grad: total.grad - left.grad,
                hess: total.hess - left.hess,
                count: total.count - left.count,
            };
            if right.count < min_leaf {
                break;
            }
            let gain = split_gain(left, right, lambda);
            if gain > 0.0 && best.is_none_or(|s| gain > s.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    bin: b,
                    gain,
                    left,
                    right,
                });
            }
        }
    }
    best
}
