//! CART trees grown greedily on Gini impurity (classification) or variance
//! (regression, used by boosting).
//!
//! Candidate thresholds are midpoints between consecutive distinct values; a
//! sample goes left when `x[feature] <= threshold`. Equal gains are resolved
//! in favour of the lower feature index, then the lower threshold.

use serde::{Deserialize, Serialize};

use super::{check_xy, Matrix};
use crate::error::{Error, Result};

/// Splits must improve impurity by more than this.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Impurity decrease at this node (unweighted).
        gain: f64,
        samples: usize,
    },
}

impl Node {
    pub fn samples(&self) -> usize {
        match self {
            Node::Leaf { samples, .. } | Node::Split { samples, .. } => *samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub params: TreeParams,
    n_features: usize,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    Gini,
    Variance,
}

impl Criterion {
    fn impurity(self, n: f64, s: f64, ss: f64) -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        let mean = s / n;
        match self {
            Criterion::Gini => 2.0 * mean * (1.0 - mean),
            Criterion::Variance => (ss / n - mean * mean).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best split of the samples `idx`, or `None` if no admissible split beats
/// [`MIN_GAIN`].
pub(crate) fn best_split(
    x: &Matrix,
    target: &[f64],
    idx: &[usize],
    min_samples_leaf: usize,
    criterion: Criterion,
) -> Option<Split> {
    let n = idx.len();
    let nf = n as f64;
    let (s, ss) = idx
        .iter()
        .fold((0.0, 0.0), |(s, ss), &i| (s + target[i], ss + target[i] * target[i]));
    let parent = criterion.impurity(nf, s, ss);
    if parent <= 0.0 {
        return None;
    }
    let mut best: Option<Split> = None;
    let mut sorted = idx.to_vec();
    for f in 0..x.cols() {
        sorted.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        let (mut sl, mut ssl) = (0.0, 0.0);
        for k in 0..n - 1 {
            let t = target[sorted[k]];
            sl += t;
            ssl += t * t;
            let (lo, hi) = (x.get(sorted[k], f), x.get(sorted[k + 1], f));
            if lo == hi {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_samples_leaf || nr < min_samples_leaf {
                continue;
            }
            let child = (nl as f64 * criterion.impurity(nl as f64, sl, ssl)
                + nr as f64 * criterion.impurity(nr as f64, s - sl, ss - ssl))
                / nf;
            let gain = parent - child;
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

pub(crate) struct Grower<'a, L: Fn(&[usize]) -> f64> {
    pub x: &'a Matrix,
    pub target: &'a [f64],
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub criterion: Criterion,
    pub leaf_value: L,
}

impl<L: Fn(&[usize]) -> f64> Grower<'_, L> {
    pub fn grow(&self) -> Vec<Node> {
        let mut nodes = Vec::new();
        let idx: Vec<usize> = (0..self.x.rows()).collect();
        self.grow_node(&idx, 0, &mut nodes);
        nodes
    }

    fn grow_node(&self, idx: &[usize], depth: usize, nodes: &mut Vec<Node>) -> usize {
        let id = nodes.len();
        let leaf = Node::Leaf {
            value: (self.leaf_value)(idx),
            samples: idx.len(),
        };
        nodes.push(leaf);
        if depth >= self.max_depth || idx.len() < 2 * self.min_samples_leaf.max(1) {
            return id;
        }
        let Some(split) = best_split(self.x, self.target, idx, self.min_samples_leaf, self.criterion) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        let left = self.grow_node(&l, depth + 1, nodes);
        let right = self.grow_node(&r, depth + 1, nodes);
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            gain: split.gain,
            samples: idx.len(),
        };
        id
    }
}

pub fn train_tree(x: &Matrix, y: &[u8], params: &TreeParams) -> Result<TreeModel> {
    check_xy(x, y)?;
    if params.min_samples_leaf == 0 {
        return Err(Error::Argument("min_samples_leaf must be at least 1".into()));
    }
    let target: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let grower = Grower {
        x,
        target: &target,
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        criterion: Criterion::Gini,
        leaf_value: |idx: &[usize]| idx.iter().map(|&i| target[i]).sum::<f64>() / idx.len() as f64,
    };
    Ok(TreeModel {
        params: *params,
        n_features: x.cols(),
        nodes: grower.grow(),
    })
}

impl TreeModel {
    pub(crate) fn from_nodes(params: TreeParams, n_features: usize, nodes: Vec<Node>) -> Self {
        TreeModel {
            params,
            n_features,
            nodes,
        }
    }

    /// A tree that always answers `value`.
    pub fn constant(value: f64, n_features: usize) -> Self {
        TreeModel {
            params: TreeParams::default(),
            n_features,
            nodes: vec![Node::Leaf { value, samples: 0 }],
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn root_split(&self) -> Option<Split> {
        match self.nodes.first()? {
            Node::Split {
                feature,
                threshold,
                gain,
                ..
            } => Some(Split {
                feature: *feature,
                threshold: *threshold,
                gain: *gain,
            }),
            Node::Leaf { .. } => None,
        }
    }

    /// Leaf value reached by `x`, without a width check.
    pub(crate) fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        Ok(self.leaf_value(x))
    }

    /// Sample-weighted impurity decrease per feature, before normalization.
    pub(crate) fn raw_importances(&self, out: &mut [f64]) {
        let total = self.nodes.first().map_or(0, Node::samples) as f64;
        if total == 0.0 {
            return;
        }
        for node in &self.nodes {
            if let Node::Split {
                feature, gain, samples, ..
            } = node
            {
                out[*feature] += *samples as f64 / total * gain;
            }
        }
    }
}
