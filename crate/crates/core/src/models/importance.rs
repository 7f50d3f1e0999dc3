//! Impurity and permutation feature importance.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{Matrix, Model};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceMethod {
    /// Total weighted impurity decrease per feature, normalized to sum 1.
    Impurity,
    /// Mean accuracy drop when one column is shuffled.
    Permutation,
}

impl FromStr for ImportanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impurity" => Ok(ImportanceMethod::Impurity),
            "permutation" => Ok(ImportanceMethod::Permutation),
            other => Err(Error::Argument(format!("unknown importance method {other:?}"))),
        }
    }
}

fn impurity(model: &Model) -> Result<Vec<f64>> {
    let mut raw = vec![0.0; model.n_features()];
    match model {
        Model::Tree(t) => t.raw_importances(&mut raw),
        Model::Boost(b) => b.raw_importances(&mut raw),
        Model::Mlp(_) => return Err(Error::Argument("impurity importance needs a tree-based model".into())),
    }
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        for v in &mut raw {
            *v /= total;
        }
    }
    Ok(raw)
}

fn accuracy(
    model: &Model,
    x: &Matrix,
    emb: Option<&Matrix>,
    y: &[u8],
    column: Option<(usize, &[usize])>,
) -> Result<f64> {
    let mut row = vec![0.0; x.cols()];
    let mut correct = 0usize;
    for i in 0..x.rows() {
        row.copy_from_slice(x.row(i));
        if let Some((j, perm)) = column {
            row[j] = x.get(perm[i], j);
        }
        let p = model.predict_proba(&row, emb.map(|e| e.row(i)))?;
        if (p >= 0.5) == (y[i] == 1) {
            correct += 1;
        }
    }
    Ok(correct as f64 / x.rows() as f64)
}

fn permutation(
    model: &Model,
    x: &Matrix,
    emb: Option<&Matrix>,
    y: &[u8],
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_repeats == 0 {
        return Err(Error::Argument("n_repeats must be at least 1".into()));
    }
    let base = accuracy(model, x, emb, y, None)?;
    let tasks: Vec<(usize, usize)> = (0..x.cols())
        .flat_map(|j| (0..n_repeats).map(move |r| (j, r)))
        .collect();
    let drops: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(j, r)| {
            let mut perm: Vec<usize> = (0..x.rows()).collect();
            perm.shuffle(&mut rng::seeded(rng::derive_seed(seed, j as u64, r as u64)));
            Ok(base - accuracy(model, x, emb, y, Some((j, &perm)))?)
        })
        .collect();
    let mut out = vec![0.0; x.cols()];
    for ((j, _), d) in tasks.iter().zip(drops) {
        out[*j] += d?;
    }
    for v in &mut out {
        *v /= n_repeats as f64;
    }
    Ok(out)
}

/// Scores ranked from most to least important; ties keep feature order.
#[allow(clippy::too_many_arguments)]
pub fn feature_importance(
    model: &Model,
    x: &Matrix,
    embeddings: Option<&Matrix>,
    y: &[u8],
    names: &[String],
    method: ImportanceMethod,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>> {
    if names.len() != model.n_features() || x.cols() != model.n_features() {
        return Err(Error::Shape(format!(
            "model has {} features, data {} columns, {} names",
            model.n_features(),
            x.cols(),
            names.len()
        )));
    }
    if x.rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    let scores = match method {
        ImportanceMethod::Impurity => impurity(model)?,
        ImportanceMethod::Permutation => {
            if x.rows() == 0 {
                return Err(Error::Size("no examples for permutation importance".into()));
            }
            permutation(model, x, embeddings, y, n_repeats, seed)?
        }
    };
    let mut ranked: Vec<(String, f64)> = names.iter().cloned().zip(scores).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked)
}
