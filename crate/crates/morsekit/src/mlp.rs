//! From-scratch dense/sparse multilayer perceptron: single ReLU hidden
//! layer, softmax output, cross-entropy loss, He-normal init, Adam, and
//! pre-defined sparsity masks applied before training.
//!
//! Everything runs in f64. Masked weights are exact zeros for the whole
//! lifetime of the network: gradients are masked, so the Adam moments of
//! deleted weights never move off zero.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::generator::Dataset;
use crate::rng::{substream, StreamKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    /// Fraction of weights kept per layer; 1.0 = fully connected.
    pub density: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

impl MlpConfig {
    /// Published setup: (N, 1024, 64), Adam defaults, 30 epochs, batch 128.
    pub fn standard(n_in: usize) -> Self {
        MlpConfig {
            n_in,
            n_hidden: 1024,
            n_out: 64,
            density: 1.0,
            l2_lambda: 0.0,
            epochs: 30,
            batch_size: 128,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            init_seed: 0,
            shuffle_seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub mask: Array2<f64>,
    pub bias: Array1<f64>,
    m_w: Array2<f64>,
    v_w: Array2<f64>,
    m_b: Array1<f64>,
    v_b: Array1<f64>,
}

impl Layer {
    fn new(fan_in: usize, fan_out: usize, mask: Array2<f64>, rng: &mut impl Rng) -> Layer {
        let he = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
        let mut weights = Array2::zeros((fan_in, fan_out));
        for ((r, c), w) in weights.indexed_iter_mut() {
            let draw = he.sample(rng);
            if mask[(r, c)] != 0.0 {
                *w = draw;
            }
        }
        Layer {
            m_w: Array2::zeros(weights.raw_dim()),
            v_w: Array2::zeros(weights.raw_dim()),
            m_b: Array1::zeros(fan_out),
            v_b: Array1::zeros(fan_out),
            bias: Array1::zeros(fan_out),
            mask,
            weights,
        }
    }

    pub fn nonzero_weights(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }

    pub fn mask_ones(&self) -> usize {
        self.mask.iter().filter(|m| **m != 0.0).count()
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    pub hidden: Layer,
    pub output: Layer,
    step: u64,
}

impl Network {
    pub fn total_mask_ones(&self) -> usize {
        self.hidden.mask_ones() + self.output.mask_ones()
    }

    pub fn weight_capacity(&self) -> usize {
        self.hidden.weights.len() + self.output.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
    pub epoch_train_accuracy: Vec<f64>,
    pub final_train_accuracy: f64,
    pub final_test_accuracy: f64,
    pub accuracy_gap: f64,
    pub wall_seconds: f64,
}

/// Binary mask with exactly `round(density * rows * cols)` ones placed
/// uniformly without replacement.
pub fn make_mask(rows: usize, cols: usize, density: f64, rng: &mut impl Rng) -> Array2<f64> {
    assert!((0.0..=1.0).contains(&density), "density must be in [0, 1]");
    let total = rows * cols;
    let keep = (density * total as f64).round() as usize;
    let mut mask = Array2::zeros((rows, cols));
    if keep == total {
        mask.fill(1.0);
        return mask;
    }
    for idx in rand::seq::index::sample(rng, total, keep) {
        mask[(idx / cols, idx % cols)] = 1.0;
    }
    mask
}

/// He-normal initialized network with per-layer sparsity masks.
pub fn init_network(cfg: &MlpConfig) -> Network {
    let mut mask_rng = substream(cfg.init_seed, StreamKind::Mask, 0, 0);
    let m1 = make_mask(cfg.n_in, cfg.n_hidden, cfg.density, &mut mask_rng);
    let m2 = make_mask(cfg.n_hidden, cfg.n_out, cfg.density, &mut mask_rng);
    let mut init_rng = substream(cfg.init_seed, StreamKind::WeightInit, 0, 0);
    Network {
        hidden: Layer::new(cfg.n_in, cfg.n_hidden, m1, &mut init_rng),
        output: Layer::new(cfg.n_hidden, cfg.n_out, m2, &mut init_rng),
        step: 0,
    }
}

fn relu_inplace(x: &mut Array2<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

/// Forward pass: hidden ReLU activations and row-normalized class
/// probabilities.
pub fn forward(net: &Network, batch: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    if batch.ncols() != net.hidden.weights.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "batch has {} features, network expects {}",
            batch.ncols(),
            net.hidden.weights.nrows()
        )));
    }
    let mut hidden = batch.dot(&net.hidden.weights) + &net.hidden.bias;
    relu_inplace(&mut hidden);
    let mut probs = hidden.dot(&net.output.weights) + &net.output.bias;
    softmax_rows(&mut probs);
    Ok((hidden, probs))
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub dw_hidden: Array2<f64>,
    pub db_hidden: Array1<f64>,
    pub dw_output: Array2<f64>,
    pub db_output: Array1<f64>,
}

fn one_hot_error(probs: &Array2<f64>, labels: &[usize]) -> Array2<f64> {
    let batch = labels.len() as f64;
    let mut delta = probs.clone();
    for (r, &label) in labels.iter().enumerate() {
        delta[(r, label)] -= 1.0;
    }
    delta.mapv_inplace(|v| v / batch);
    delta
}

/// Mean cross-entropy plus the L2 penalty on unmasked weights.
pub fn batch_loss(net: &Network, batch: &Array2<f64>, labels: &[usize], l2: f64) -> Result<f64> {
    let (_, probs) = forward(net, batch)?;
    let mut ce = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        ce -= probs[(r, label)].max(f64::MIN_POSITIVE).ln();
    }
    ce /= labels.len() as f64;
    let reg = 0.5
        * l2
        * (net.hidden.weights.iter().map(|w| w * w).sum::<f64>()
            + net.output.weights.iter().map(|w| w * w).sum::<f64>());
    Ok(ce + reg)
}

/// Analytic gradients of [`batch_loss`], masked so deleted weights never
/// receive updates.
pub fn batch_gradients(
    net: &Network,
    batch: &Array2<f64>,
    labels: &[usize],
    l2: f64,
) -> Result<(Gradients, f64, usize)> {
    let (hidden, probs) = forward(net, batch)?;
    let mut ce = 0.0;
    let mut correct = 0;
    for (r, &label) in labels.iter().enumerate() {
        ce -= probs[(r, label)].max(f64::MIN_POSITIVE).ln();
        if argmax_row(&probs, r) == label {
            correct += 1;
        }
    }
    ce /= labels.len() as f64;
    let reg = 0.5
        * l2
        * (net.hidden.weights.iter().map(|w| w * w).sum::<f64>()
            + net.output.weights.iter().map(|w| w * w).sum::<f64>());
    let loss = ce + reg;

    let delta_out = one_hot_error(&probs, labels);
    let mut dw_output = hidden.t().dot(&delta_out) + &(l2 * &net.output.weights);
    dw_output *= &net.output.mask;
    let db_output = delta_out.sum_axis(Axis(0));

    let mut delta_hidden = delta_out.dot(&net.output.weights.t());
    delta_hidden
        .iter_mut()
        .zip(hidden.iter())
        .for_each(|(d, &h)| {
            if h <= 0.0 {
                *d = 0.0;
            }
        });
    let mut dw_hidden = batch.t().dot(&delta_hidden) + &(l2 * &net.hidden.weights);
    dw_hidden *= &net.hidden.mask;
    let db_hidden = delta_hidden.sum_axis(Axis(0));

    Ok((
        Gradients { dw_hidden, db_hidden, dw_output, db_output },
        loss,
        correct,
    ))
}

fn adam_update_2d(
    w: &mut Array2<f64>,
    g: &Array2<f64>,
    m: &mut Array2<f64>,
    v: &mut Array2<f64>,
    cfg: &MlpConfig,
    bias_corr1: f64,
    bias_corr2: f64,
) {
    for ((wi, gi), (mi, vi)) in w.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut())) {
        *mi = cfg.adam_beta1 * *mi + (1.0 - cfg.adam_beta1) * gi;
        *vi = cfg.adam_beta2 * *vi + (1.0 - cfg.adam_beta2) * gi * gi;
        let m_hat = *mi / bias_corr1;
        let v_hat = *vi / bias_corr2;
        *wi -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
    }
}

fn adam_update_1d(
    w: &mut Array1<f64>,
    g: &Array1<f64>,
    m: &mut Array1<f64>,
    v: &mut Array1<f64>,
    cfg: &MlpConfig,
    bias_corr1: f64,
    bias_corr2: f64,
) {
    for ((wi, gi), (mi, vi)) in w.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut())) {
        *mi = cfg.adam_beta1 * *mi + (1.0 - cfg.adam_beta1) * gi;
        *vi = cfg.adam_beta2 * *vi + (1.0 - cfg.adam_beta2) * gi * gi;
        let m_hat = *mi / bias_corr1;
        let v_hat = *vi / bias_corr2;
        *wi -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
    }
}

/// One Adam step over precomputed gradients.
pub fn apply_gradients(net: &mut Network, grads: &Gradients, cfg: &MlpConfig) {
    net.step += 1;
    let t = net.step as i32;
    let bc1 = 1.0 - cfg.adam_beta1.powi(t);
    let bc2 = 1.0 - cfg.adam_beta2.powi(t);
    adam_update_2d(
        &mut net.hidden.weights,
        &grads.dw_hidden,
        &mut net.hidden.m_w,
        &mut net.hidden.v_w,
        cfg,
        bc1,
        bc2,
    );
    adam_update_1d(
        &mut net.hidden.bias,
        &grads.db_hidden,
        &mut net.hidden.m_b,
        &mut net.hidden.v_b,
        cfg,
        bc1,
        bc2,
    );
    adam_update_2d(
        &mut net.output.weights,
        &grads.dw_output,
        &mut net.output.m_w,
        &mut net.output.v_w,
        cfg,
        bc1,
        bc2,
    );
    adam_update_1d(
        &mut net.output.bias,
        &grads.db_output,
        &mut net.output.m_b,
        &mut net.output.v_b,
        cfg,
        bc1,
        bc2,
    );
}

fn argmax_row(probs: &Array2<f64>, row: usize) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (j, &v) in probs.row(row).iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = j;
        }
    }
    best
}

/// Copy a set of dataset rows into a dense batch plus label vector.
pub fn gather_batch(dataset: &Dataset, indices: &[usize]) -> (Array2<f64>, Vec<usize>) {
    let n = dataset.n_features;
    let mut batch = Array2::zeros((indices.len(), n));
    let mut labels = Vec::with_capacity(indices.len());
    for (r, &idx) in indices.iter().enumerate() {
        let sample = &dataset.samples[idx];
        batch.row_mut(r).assign(&Array1::from_vec(sample.values.clone()));
        labels.push(sample.label_index);
    }
    (batch, labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Accuracy percentage over a split. Ties break to the lowest class index.
pub fn evaluate(net: &Network, dataset: &Dataset, split: Split) -> Result<f64> {
    let indices = match split {
        Split::Train => &dataset.train_indices,
        Split::Test => &dataset.test_indices,
    };
    if indices.is_empty() {
        return Err(Error::EmptySplit(format!("{:?}", split)));
    }
    let mut correct = 0usize;
    for chunk in indices.chunks(1024) {
        let (batch, labels) = gather_batch(dataset, chunk);
        let (_, probs) = forward(net, &batch)?;
        for (r, &label) in labels.iter().enumerate() {
            if argmax_row(&probs, r) == label {
                correct += 1;
            }
        }
    }
    Ok(100.0 * correct as f64 / indices.len() as f64)
}

/// Full training loop: shuffled minibatches, Adam, deterministic per
/// `shuffle_seed`, final evaluation on the test split.
pub fn train(net: &mut Network, dataset: &Dataset, cfg: &MlpConfig) -> Result<TrainReport> {
    if dataset.n_features != cfg.n_in {
        return Err(Error::ShapeMismatch(format!(
            "dataset has {} features, config expects {}",
            dataset.n_features, cfg.n_in
        )));
    }
    let started = Instant::now();
    let mut order: Vec<usize> = dataset.train_indices.clone();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut epoch_train_accuracy = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = substream(cfg.shuffle_seed, StreamKind::Shuffle, 0, epoch as u64);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (batch_no, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (batch, labels) = gather_batch(dataset, chunk);
            let (grads, loss, batch_correct) =
                batch_gradients(net, &batch, &labels, cfg.l2_lambda)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_no, loss });
            }
            loss_sum += loss * chunk.len() as f64;
            correct += batch_correct;
            apply_gradients(net, &grads, cfg);
        }
        epoch_loss.push(loss_sum / order.len() as f64);
        epoch_train_accuracy.push(100.0 * correct as f64 / order.len() as f64);
    }
    let final_train_accuracy = evaluate(net, dataset, Split::Train)?;
    let final_test_accuracy = evaluate(net, dataset, Split::Test)?;
    Ok(TrainReport {
        epoch_loss,
        epoch_train_accuracy,
        final_train_accuracy,
        final_test_accuracy,
        accuracy_gap: final_train_accuracy - final_test_accuracy,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
