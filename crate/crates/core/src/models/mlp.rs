//! Fusion MLP: a hand-crafted-feature path and an optional embedding path,
//! concatenated into a small classification head.
//!
//! ```text
//! features  --Dense+ReLU--> 64  --Dense+ReLU--> 104 --+
//!                                                     +--> 208 --Dense+ReLU--> 64 --Dense--> sigmoid
//! embedding --Dense+ReLU--> 256 --Dense+ReLU--> 104 --+
//! ```
//!
//! With `d_emb = 0` the embedding path is absent and the head sees only the
//! 104 feature-path units. Training is mini-batch Adam on mean binary
//! cross-entropy computed from logits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_xy, sigmoid, Matrix};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hand_hidden: usize,
    pub hand_out: usize,
    pub emb_hidden: usize,
    pub emb_out: usize,
    pub head_hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Standardize hand-crafted features with training-set mean and deviation.
    pub normalize: bool,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hand_hidden: 64,
            hand_out: 104,
            emb_hidden: 256,
            emb_out: 104,
            head_hidden: 64,
            epochs: 10,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            normalize: false,
            seed: 0,
        }
    }
}

/// Fully connected layer, `weights` row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// He-uniform weights `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero bias.
    fn he_uniform(inputs: usize, outputs: usize, rng: &mut rng::Rng) -> Self {
        let mut d = Dense::zeros(inputs, outputs);
        let limit = (6.0 / inputs.max(1) as f64).sqrt();
        for w in &mut d.weights {
            *w = rng.gen_range(-limit..=limit);
        }
        d
    }

    fn forward(&self, x: &[f64], relu: bool) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                let z = self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                if relu {
                    z.max(0.0)
                } else {
                    z
                }
            })
            .collect()
    }

    /// Accumulates parameter gradients for output gradient `dz` and returns
    /// the gradient with respect to the input.
    fn backward(&self, x: &[f64], dz: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad.bias[o] += d;
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut grad.weights[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += d * x[i];
                dx[i] += d * row[i];
            }
        }
        dx
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let mut mean = vec![0.0; x.cols()];
        let mut scale = vec![0.0; x.cols()];
        for j in 0..x.cols() {
            let col = x.column(j);
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[j] = m;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub n_features: usize,
    pub d_emb: usize,
    pub standardizer: Option<Standardizer>,
    pub hand1: Dense,
    pub hand2: Dense,
    pub emb1: Option<Dense>,
    pub emb2: Option<Dense>,
    pub head1: Dense,
    pub head2: Dense,
}

struct Trace {
    x: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    e: Vec<f64>,
    e1: Vec<f64>,
    z: Vec<f64>,
    g1: Vec<f64>,
    logit: f64,
}

fn relu_mask(d: &mut [f64], act: &[f64]) {
    for (g, a) in d.iter_mut().zip(act) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Mean BCE of logits `z` against labels, computed without forming `sigmoid(z)`.
pub fn bce_with_logits(z: f64, y: u8) -> f64 {
    z.max(0.0) - z * f64::from(y) + (-z.abs()).exp().ln_1p()
}

impl MlpModel {
    /// Freshly initialized network.
    pub fn new(n_features: usize, d_emb: usize, config: MlpConfig) -> Self {
        let mut r = rng::seeded(rng::derive_seed(config.seed, 0, 0));
        let hand1 = Dense::he_uniform(n_features, config.hand_hidden, &mut r);
        let hand2 = Dense::he_uniform(config.hand_hidden, config.hand_out, &mut r);
        let (emb1, emb2, head_in) = if d_emb > 0 {
            let e1 = Dense::he_uniform(d_emb, config.emb_hidden, &mut r);
            let e2 = Dense::he_uniform(config.emb_hidden, config.emb_out, &mut r);
            (Some(e1), Some(e2), config.hand_out + config.emb_out)
        } else {
            (None, None, config.hand_out)
        };
        let head1 = Dense::he_uniform(head_in, config.head_hidden, &mut r);
        let head2 = Dense::he_uniform(config.head_hidden, 1, &mut r);
        MlpModel {
            config,
            n_features,
            d_emb,
            standardizer: None,
            hand1,
            hand2,
            emb1,
            emb2,
            head1,
            head2,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn layers(&self) -> Vec<&Dense> {
        let mut v = vec![&self.hand1, &self.hand2];
        v.extend(self.emb1.iter());
        v.extend(self.emb2.iter());
        v.push(&self.head1);
        v.push(&self.head2);
        v
    }

    fn layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut v = vec![&mut self.hand1, &mut self.hand2];
        v.extend(self.emb1.iter_mut());
        v.extend(self.emb2.iter_mut());
        v.push(&mut self.head1);
        v.push(&mut self.head2);
        v
    }

    pub fn n_params(&self) -> usize {
        self.layers().iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer (weights then bias).
    pub fn params_flat(&self) -> Vec<f64> {
        self.layers()
            .into_iter()
            .flat_map(|l| l.params().copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters, expected {}",
                params.len(),
                self.n_params()
            )));
        }
        let mut it = params.iter();
        for l in self.layers_mut() {
            for p in l.params_mut() {
                *p = *it.next().unwrap_or(&0.0);
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64], emb: Option<&[f64]>) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        if self.d_emb > 0 {
            match emb {
                None => return Err(Error::Shape("model needs an embedding vector".into())),
                Some(e) if e.len() != self.d_emb => {
                    return Err(Error::Shape(format!(
                        "embedding has {} values, expected {}",
                        e.len(),
                        self.d_emb
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn trace(&self, x: &[f64], emb: Option<&[f64]>) -> Trace {
        let x = match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        };
        let h1 = self.hand1.forward(&x, true);
        let h2 = self.hand2.forward(&h1, true);
        let mut z = h2.clone();
        let (e, e1) = match (&self.emb1, &self.emb2, emb) {
            (Some(l1), Some(l2), Some(e)) => {
                let e1 = l1.forward(e, true);
                z.extend(l2.forward(&e1, true));
                (e.to_vec(), e1)
            }
            _ => (Vec::new(), Vec::new()),
        };
        let g1 = self.head1.forward(&z, true);
        let logit = self.head2.forward(&g1, false)[0];
        Trace {
            x,
            h1,
            h2,
            e,
            e1,
            z,
            g1,
            logit,
        }
    }

    pub fn logit(&self, x: &[f64], emb: Option<&[f64]>) -> Result<f64> {
        self.check_input(x, emb)?;
        Ok(self.trace(x, emb).logit)
    }

    pub fn predict_proba(&self, x: &[f64], emb: Option<&[f64]>) -> Result<f64> {
        self.logit(x, emb).map(sigmoid)
    }

    fn zero_grads(&self) -> Vec<Dense> {
        self.layers()
            .iter()
            .map(|l| Dense::zeros(l.inputs, l.outputs))
            .collect()
    }

    /// Mean BCE over the given rows and its gradient, flattened like
    /// [`MlpModel::params_flat`].
    pub fn loss_and_grad(&self, x: &Matrix, emb: Option<&Matrix>, y: &[u8], rows: &[usize]) -> Result<(f64, Vec<f64>)> {
        for &i in rows {
            self.check_input(x.row(i), emb.map(|e| e.row(i)))?;
        }
        let (loss, grads) = self.batch(x, emb, y, rows);
        Ok((
            loss,
            grads
                .iter()
                .flat_map(|g| g.params().copied().collect::<Vec<_>>())
                .collect(),
        ))
    }

    fn batch(&self, x: &Matrix, emb: Option<&Matrix>, y: &[u8], rows: &[usize]) -> (f64, Vec<Dense>) {
        let mut grads = self.zero_grads();
        let has_emb = self.emb1.is_some();
        let head = if has_emb { 4 } else { 2 };
        let b = rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let t = self.trace(x.row(i), emb.map(|e| e.row(i)));
            loss += bce_with_logits(t.logit, y[i]);
            let dlogit = (sigmoid(t.logit) - f64::from(y[i])) / b;

            let mut dg1 = self.head2.backward(&t.g1, &[dlogit], &mut grads[head + 1]);
            relu_mask(&mut dg1, &t.g1);
            let dz = self.head1.backward(&t.z, &dg1, &mut grads[head]);
            let (dh2, de2) = dz.split_at(self.hand2.outputs);

            let mut dh2 = dh2.to_vec();
            relu_mask(&mut dh2, &t.h2);
            let mut dh1 = self.hand2.backward(&t.h1, &dh2, &mut grads[1]);
            relu_mask(&mut dh1, &t.h1);
            self.hand1.backward(&t.x, &dh1, &mut grads[0]);

            if let (Some(l1), Some(l2)) = (&self.emb1, &self.emb2) {
                let mut de2 = de2.to_vec();
                relu_mask(&mut de2, &t.z[self.hand2.outputs..]);
                let mut de1 = l2.backward(&t.e1, &de2, &mut grads[3]);
                relu_mask(&mut de1, &t.e1);
                l1.backward(&t.e, &de1, &mut grads[2]);
            }
        }
        (loss / b, grads)
    }
}

/// Trains a fresh network. `embeddings` must be given iff `d_emb > 0`
/// is wanted; its column count becomes `d_emb`.
pub fn train_mlp(x: &Matrix, embeddings: Option<&Matrix>, y: &[u8], config: &MlpConfig) -> Result<MlpModel> {
    check_xy(x, y)?;
    if let Some(e) = embeddings {
        if e.rows() != x.rows() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} embedding rows",
                x.rows(),
                e.rows()
            )));
        }
        if !e.is_finite() {
            return Err(Error::Value("embedding matrix contains non-finite values".into()));
        }
    }
    if config.batch_size == 0 {
        return Err(Error::Argument("batch_size must be at least 1".into()));
    }
    let d_emb = embeddings.map_or(0, Matrix::cols);
    let mut model = MlpModel::new(x.cols(), d_emb, *config);
    if config.normalize {
        model.standardizer = Some(Standardizer::fit(x));
    }
    let mut shuffle = rng::seeded(rng::derive_seed(config.seed, 1, 0));
    let mut m: Vec<f64> = vec![0.0; model.n_params()];
    let mut v: Vec<f64> = vec![0.0; model.n_params()];
    let mut params = model.params_flat();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut step = 0i32;
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle);
        for rows in order.chunks(config.batch_size) {
            let (_, grads) = model.batch(x, embeddings, y, rows);
            step += 1;
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            let flat = grads.iter().flat_map(|g| g.params().copied());
            for (k, g) in flat.enumerate() {
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
                params[k] -= config.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + config.epsilon);
            }
            model.set_params_flat(&params)?;
        }
    }
    Ok(model)
}
