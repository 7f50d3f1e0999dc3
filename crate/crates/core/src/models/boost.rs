//! Gradient boosting on the logistic loss with regression trees.
//!
//! Each round fits a variance-criterion tree to the residuals `y - p`; leaf
//! values are one Newton step, `Σ r / Σ p(1-p)`, over the samples in the leaf.

use serde::{Deserialize, Serialize};

use super::tree::{Criterion, Grower, TreeModel, TreeParams};
use super::{check_xy, sigmoid, Matrix};
use crate::error::{Error, Result};

/// Probabilities are clipped to `[EPS, 1 - EPS]` inside the loss and the
/// initial log-odds.
const EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub params: BoostParams,
    n_features: usize,
    /// Initial log-odds.
    init: f64,
    trees: Vec<TreeModel>,
    /// Mean training log-loss before round 1 and after every round.
    train_loss: Vec<f64>,
}

pub fn log_loss(p: &[f64], y: &[u8]) -> f64 {
    let total: f64 = p
        .iter()
        .zip(y)
        .map(|(&p, &y)| {
            let p = p.clamp(EPS, 1.0 - EPS);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / p.len() as f64
}

pub fn train_boost(x: &Matrix, y: &[u8], params: &BoostParams) -> Result<BoostModel> {
    check_xy(x, y)?;
    if params.n_rounds == 0 {
        return Err(Error::Argument("n_rounds must be at least 1".into()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::Argument(format!(
            "learning_rate {} is outside (0, 1]",
            params.learning_rate
        )));
    }
    if params.min_samples_leaf == 0 {
        return Err(Error::Argument("min_samples_leaf must be at least 1".into()));
    }
    let n = y.len();
    let base = (y.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64).clamp(EPS, 1.0 - EPS);
    let init = (base / (1.0 - base)).ln();
    let mut f = vec![init; n];
    let mut p: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
    let mut train_loss = vec![log_loss(&p, y)];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        seed: params.seed,
    };
    for _ in 0..params.n_rounds {
        let residual: Vec<f64> = y.iter().zip(&p).map(|(&y, &p)| f64::from(y) - p).collect();
        let hess: Vec<f64> = p.iter().map(|&p| p * (1.0 - p)).collect();
        let grower = Grower {
            x,
            target: &residual,
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            criterion: Criterion::Variance,
            leaf_value: |idx: &[usize]| {
                let num: f64 = idx.iter().map(|&i| residual[i]).sum();
                let den: f64 = idx.iter().map(|&i| hess[i]).sum();
                if den < 1e-12 {
                    0.0
                } else {
                    num / den
                }
            },
        };
        let tree = TreeModel::from_nodes(tree_params, x.cols(), grower.grow());
        for i in 0..n {
            f[i] += params.learning_rate * tree.leaf_value(x.row(i));
            p[i] = sigmoid(f[i]);
        }
        train_loss.push(log_loss(&p, y));
        trees.push(tree);
    }
    Ok(BoostModel {
        params: *params,
        n_features: x.cols(),
        init,
        trees,
        train_loss,
    })
}

impl BoostModel {
    /// An ensemble with no trees.
    pub fn from_init(init: f64, n_features: usize, params: BoostParams) -> Self {
        BoostModel {
            params,
            n_features,
            init,
            trees: Vec::new(),
            train_loss: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn init(&self) -> f64 {
        self.init
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }

    pub fn decision_function(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let sum: f64 = self.trees.iter().map(|t| t.leaf_value(x)).sum();
        Ok(self.init + self.params.learning_rate * sum)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.decision_function(x).map(sigmoid)
    }

    pub(crate) fn raw_importances(&self, out: &mut [f64]) {
        for t in &self.trees {
            t.raw_importances(out);
        }
    }
}
