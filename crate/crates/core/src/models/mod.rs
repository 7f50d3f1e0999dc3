//! Classifiers over feature matrices: CART trees, gradient-boosted trees and
//! a two-path fusion MLP, plus evaluation metrics and feature importance.

pub mod boost;
pub mod importance;
pub mod metrics;
pub mod mlp;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boost::{train_boost, BoostModel, BoostParams};
pub use importance::{feature_importance, ImportanceMethod};
pub use metrics::{evaluate_scores, roc_auc, EvalReport};
pub use mlp::{train_mlp, MlpConfig, MlpModel};
pub use tree::{train_tree, TreeModel, TreeParams};

pub const MODEL_FORMAT: &str = "humorkit-model";
pub const MODEL_VERSION: u32 = 1;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// All rows must have the same length. An empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::Shape(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(cols.iter().map(|&c| r[c]));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn check_xy(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::Size("no training examples".into()));
    }
    if x.rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::Value(format!("label {bad} is not 0/1")));
    }
    if !x.is_finite() {
        return Err(Error::Value("feature matrix contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", content = "params", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Tree(TreeModel),
    Boost(BoostModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn type_name(&self) -> &'static str {
        match self {
            Model::Tree(_) => "tree",
            Model::Boost(_) => "boost",
            Model::Mlp(_) => "mlp",
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Tree(m) => m.n_features(),
            Model::Boost(m) => m.n_features(),
            Model::Mlp(m) => m.n_features(),
        }
    }

    /// Positive-class probability for one example. `embedding` is only read
    /// by an MLP with an embedding path.
    pub fn predict_proba(&self, x: &[f64], embedding: Option<&[f64]>) -> Result<f64> {
        match self {
            Model::Tree(m) => m.predict_proba(x),
            Model::Boost(m) => m.predict_proba(x),
            Model::Mlp(m) => m.predict_proba(x, embedding),
        }
    }

    pub fn predict_batch(&self, x: &Matrix, embeddings: Option<&Matrix>) -> Result<Vec<f64>> {
        if let Some(e) = embeddings {
            if e.rows() != x.rows() {
                return Err(Error::Shape(format!(
                    "{} feature rows but {} embedding rows",
                    x.rows(),
                    e.rows()
                )));
            }
        }
        (0..x.rows())
            .map(|i| self.predict_proba(x.row(i), embeddings.map(|e| e.row(i))))
            .collect()
    }

    pub fn evaluate(&self, x: &Matrix, embeddings: Option<&Matrix>, y: &[u8], threshold: f64) -> Result<EvalReport> {
        let scores = self.predict_batch(x, embeddings)?;
        evaluate_scores(&scores, y, threshold)
    }
}

/// Self-describing on-disk model: JSON with format tag, version, seed and
/// the feature-name schema the model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub feature_names: Vec<String>,
    #[serde(flatten)]
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, feature_names: Vec<String>, seed: u64) -> Result<Self> {
        if feature_names.len() != model.n_features() {
            return Err(Error::Shape(format!(
                "{} feature names for a model over {} features",
                feature_names.len(),
                model.n_features()
            )));
        }
        Ok(ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            seed,
            feature_names,
            model,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Schema(format!("not a model file (format {:?})", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model file version {}",
                file.version
            )));
        }
        if file.feature_names.len() != file.model.n_features() {
            return Err(Error::Schema("feature-name list does not match model width".into()));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
