//! Regression trees and leaf-wise growth.

use super::bins::{BinMapper, BinnedMatrix};
use super::split::{best_split, BinStat, Histogram, SplitCandidate};

/// Tree node. Internal nodes send `x <= threshold` left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Nodes are stored in preorder with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    #[inline]
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Rebuilds a preorder layout from a tree stored in any order.
    fn to_preorder(nodes: &[Node]) -> Tree {
        fn go(src: &[Node], i: usize, out: &mut Vec<Node>) -> usize {
            let at = out.len();
            match src[i] {
                Node::Leaf { value } => out.push(Node::Leaf { value }),
                Node::Internal {
                    feature,
                    threshold,
                    gain,
                    left,
                    right,
                } => {
                    out.push(Node::Leaf { value: 0.0 });
                    let l = go(src, left, out);
                    let r = go(src, right, out);
                    out[at] = Node::Internal {
                        feature,
                        threshold,
                        gain,
                        left: l,
                        right: r,
                    };
                }
            }
            at
        }
        let mut out = Vec::with_capacity(nodes.len());
        go(nodes, 0, &mut out);
        Tree { nodes: out }
    }
}

pub(crate) struct GrowContext<'a> {
    pub binned: &'a BinnedMatrix,
    pub mappers: &'a [BinMapper],
    pub n_bins: &'a [usize],
    pub allowed: &'a [bool],
    pub num_leaves: usize,
    pub lambda: f64,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
}

struct Frontier {
    node: usize,
    start: usize,
    end: usize,
    hist: Histogram,
    stat: BinStat,
    split: Option<SplitCandidate>,
}

fn leaf_value(stat: BinStat, lambda: f64, lr: f64) -> f64 {
    let d = stat.hess + lambda;
    if d > 0.0 {
        -stat.grad / d * lr
    } else {
        0.0
    }
}

/// Grows one tree on `rows`, always splitting the frontier leaf with the
/// largest gain until the leaf cap is hit or no split gains anything.
pub(crate) fn grow(ctx: &GrowContext<'_>, rows: &mut [u32], grad: &[f64], hess: &[f64]) -> Tree {
    let root_hist = Histogram::build(ctx.binned, ctx.n_bins, rows, grad, hess);
    let mut root_stat = BinStat::default();
    for &r in rows.iter() {
        root_stat.grad += grad[r as usize];
        root_stat.hess += hess[r as usize];
        root_stat.count += 1;
    }
    let find = |h: &Histogram| best_split(h, ctx.allowed, ctx.lambda, ctx.min_samples_leaf);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut frontier = vec![Frontier {
        node: 0,
        start: 0,
        end: rows.len(),
        split: find(&root_hist),
        hist: root_hist,
        stat: root_stat,
    }];
    let mut done: Vec<(usize, BinStat)> = Vec::new();
    while frontier.len() + done.len() < ctx.num_leaves {
        // strict comparison keeps the earliest leaf on ties
        let mut pick: Option<usize> = None;
        for (k, leaf) in frontier.iter().enumerate() {
            if let Some(s) = leaf.split {
                if pick.is_none_or(|p| s.gain > frontier[p].split.unwrap().gain) {
                    pick = Some(k);
                }
            }
        }
        let Some(k) = pick else { break };
        let leaf = frontier.remove(k);
        let s = leaf.split.unwrap();
        let col = &ctx.binned.bins[s.feature];
        let slice = &mut rows[leaf.start..leaf.end];
        let mid = leaf.start + partition(slice, |r| col[r as usize] as usize <= s.bin);

        let (small, small_is_left) = if mid - leaf.start <= leaf.end - mid {
            (&rows[leaf.start..mid], true)
        } else {
            (&rows[mid..leaf.end], false)
        };
        let small_hist = Histogram::build(ctx.binned, ctx.n_bins, small, grad, hess);
        let large_hist = leaf.hist.subtract(&small_hist);
        let (lh, rh) = if small_is_left {
            (small_hist, large_hist)
        } else {
            (large_hist, small_hist)
        };

        let l_id = nodes.len();
        let r_id = l_id + 1;
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[leaf.node] = Node::Internal {
            feature: s.feature,
            threshold: ctx.mappers[s.feature].thresholds[s.bin],
            gain: s.gain,
            left: l_id,
            right: r_id,
        };
        // keep children adjacent in the frontier so ties resolve by position
        let children = [
            Frontier {
                node: l_id,
                start: leaf.start,
                end: mid,
                split: find(&lh),
                hist: lh,
                stat: s.left,
            },
            Frontier {
                node: r_id,
                start: mid,
                end: leaf.end,
                split: find(&rh),
                hist: rh,
                stat: s.right,
            },
        ];
        let mut at = k;
        for c in children {
            if c.split.is_some() {
                frontier.insert(at, c);
                at += 1;
            } else {
                done.push((c.node, c.stat));
            }
        }
    }
    for leaf in frontier {
        done.push((leaf.node, leaf.stat));
    }
    for (node, stat) in done {
        nodes[node] = Node::Leaf {
            value: leaf_value(stat, ctx.lambda, ctx.learning_rate),
        };
    }
    Tree::to_preorder(&nodes)
}

/// Stable in-place partition; returns the count of elements satisfying `pred`.
fn partition(xs: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let mut right = Vec::new();
    let mut w = 0;
    for i in 0..xs.len() {
        let x = xs[i];
        if pred(x) {
            xs[w] = x;
            w += 1;
        } else {
            right.push(x);
        }
    }
    xs[w..].copy_from_slice(&right);
    w
}
