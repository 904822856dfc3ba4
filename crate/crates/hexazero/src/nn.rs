//! From-scratch dense neural networks: forward pass, backpropagation, SGD,
//! and the loss functions used across the pipeline. All arithmetic is f64.
//!
//! Two network shapes live here. [`Mlp`] is a plain sequential net trained
//! against mean squared error. [`TwoHeadNet`] is the Hexapawn network: a
//! ReLU trunk of five 128-wide layers feeding a 28-way softmax policy head
//! and a single tanh value head, trained against the combined loss
//! `(z - v)^2 - pi^T log p + c * ||theta||^2`.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{INPUT_SIZE, POLICY_SIZE};

/// Probabilities are clamped here before taking logarithms.
pub const LOG_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    ClippedRelu,
    Sigmoid,
    Tanh,
    Softmax,
}

impl Activation {
    /// Applies the activation elementwise; softmax acts on the whole slice
    /// with max-subtraction for stability.
    pub fn apply(self, pre: &[f64], out: &mut [f64]) {
        match self {
            Activation::Linear => out.copy_from_slice(pre),
            Activation::Relu => {
                for (o, &x) in out.iter_mut().zip(pre) {
                    *o = if x > 0.0 { x } else { 0.0 };
                }
            }
            Activation::ClippedRelu => {
                for (o, &x) in out.iter_mut().zip(pre) {
                    *o = x.clamp(0.0, 1.0);
                }
            }
            Activation::Sigmoid => {
                for (o, &x) in out.iter_mut().zip(pre) {
                    *o = sigmoid(x);
                }
            }
            Activation::Tanh => {
                for (o, &x) in out.iter_mut().zip(pre) {
                    *o = x.tanh();
                }
            }
            Activation::Softmax => {
                let max = pre.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for (o, &x) in out.iter_mut().zip(pre) {
                    *o = (x - max).exp();
                    sum += *o;
                }
                for o in out.iter_mut() {
                    *o /= sum;
                }
            }
        }
    }

    /// Elementwise derivative d(out)/d(pre). Softmax is handled fused with
    /// cross-entropy and must not be differentiated elementwise.
    fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::ClippedRelu => {
                if pre > 0.0 && pre < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Tanh => 1.0 - out * out,
            Activation::Softmax => panic!("softmax derivative is fused with cross-entropy"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::ClippedRelu => "clipped_relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Softmax => "softmax",
        }
    }

    pub fn from_name(name: &str) -> Option<Activation> {
        Some(match name {
            "linear" => Activation::Linear,
            "relu" => Activation::Relu,
            "clipped_relu" => Activation::ClippedRelu,
            "sigmoid" => Activation::Sigmoid,
            "tanh" => Activation::Tanh,
            "softmax" => Activation::Softmax,
            _ => return None,
        })
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Softmax of a slice with max-subtraction.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    Activation::Softmax.apply(values, &mut out);
    out
}

/// Categorical cross entropy `-sum(target_i * ln(output_i))` with outputs
/// clamped at [`LOG_EPS`].
pub fn cross_entropy(target: &[f64], output: &[f64]) -> f64 {
    assert_eq!(target.len(), output.len());
    -target
        .iter()
        .zip(output)
        .map(|(&t, &p)| t * p.max(LOG_EPS).ln())
        .sum::<f64>()
}

/// Mean negative log-likelihood over correct-label probabilities.
pub fn nll_mean(correct_label_probs: &[f64]) -> f64 {
    assert!(!correct_label_probs.is_empty());
    let sum: f64 = correct_label_probs.iter().map(|&p| -p.max(LOG_EPS).ln()).sum();
    sum / correct_label_probs.len() as f64
}

/// One fully connected layer; weights are row-major `out_dim x in_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// Seeded uniform initialization in `[-1/sqrt(in_dim), +1/sqrt(in_dim)]`.
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        let biases = (0..out_dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        DenseLayer { in_dim, out_dim, weights, biases, activation }
    }

    pub fn zeroed(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
            activation,
        }
    }

    /// Returns pre-activations and activations.
    pub fn forward(&self, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(input.len(), self.in_dim, "dimension mismatch");
        let mut pre = self.biases.clone();
        for (o, p) in pre.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            *p += row.iter().zip(input).map(|(&w, &x)| w * x).sum::<f64>();
        }
        let mut out = vec![0.0; self.out_dim];
        self.activation.apply(&pre, &mut out);
        (pre, out)
    }

    /// Accumulates gradients given `dL/d(pre)` and returns `dL/d(input)`.
    pub fn backward_from_pre(
        &self,
        input: &[f64],
        d_pre: &[f64],
        grad: &mut LayerGrad,
    ) -> Vec<f64> {
        let mut d_input = vec![0.0; self.in_dim];
        for (o, &dp) in d_pre.iter().enumerate() {
            grad.biases[o] += dp;
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grad_row = &mut grad.weights[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grad_row[i] += dp * input[i];
                d_input[i] += dp * row[i];
            }
        }
        d_input
    }

    /// Accumulates gradients given `dL/d(out)` for elementwise activations.
    pub fn backward(
        &self,
        input: &[f64],
        pre: &[f64],
        out: &[f64],
        d_out: &[f64],
        grad: &mut LayerGrad,
    ) -> Vec<f64> {
        let d_pre: Vec<f64> = d_out
            .iter()
            .enumerate()
            .map(|(o, &d)| d * self.activation.derivative(pre[o], out[o]))
            .collect();
        self.backward_from_pre(input, &d_pre, grad)
    }

    fn weight_sq_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// Gradient buffer matching one layer's parameters.
#[derive(Clone, Debug)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &DenseLayer) -> LayerGrad {
        LayerGrad {
            weights: vec![0.0; layer.weights.len()],
            biases: vec![0.0; layer.biases.len()],
        }
    }
}

/// Applies one SGD update `w' = w - lr * g` in place.
pub fn sgd_step(layer: &mut DenseLayer, grad: &LayerGrad, lr: f64) {
    assert!(lr > 0.0, "learning rate must be positive");
    for (w, g) in layer.weights.iter_mut().zip(&grad.weights) {
        *w -= lr * g;
    }
    for (b, g) in layer.biases.iter_mut().zip(&grad.biases) {
        *b -= lr * g;
    }
}

/// Training hyperparameters for plain SGD.
#[derive(Clone, Debug)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { learning_rate: 0.1, batch_size: 16, epochs: 512, seed: 0 }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
}

/// One supervised example for the two-head network.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub target_policy: Vec<f64>,
    pub target_value: f64,
}

/// Plain sequential network trained with mean squared error.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(dims: &[usize], activations: &[Activation], seed: u64) -> Mlp {
        assert!(dims.len() >= 2 && activations.len() == dims.len() - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(d, &a)| DenseLayer::new(d[0], d[1], a, &mut rng))
            .collect();
        Mlp { layers }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer.forward(&x).1;
        }
        x
    }

    /// Batch-mean MSE: `(1/B) * sum_b mean_o (out_o - y_o)^2`.
    pub fn mse_loss(&self, batch: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        let mut total = 0.0;
        for (input, target) in batch {
            let out = self.forward(input);
            let n = out.len() as f64;
            total += out.iter().zip(target).map(|(o, y)| (o - y) * (o - y)).sum::<f64>() / n;
        }
        total / batch.len() as f64
    }

    /// Exact gradients of the batch-mean MSE.
    pub fn backward_mse(&self, batch: &[(Vec<f64>, Vec<f64>)]) -> Vec<LayerGrad> {
        let mut grads: Vec<LayerGrad> = self.layers.iter().map(LayerGrad::zeros_like).collect();
        let scale = 1.0 / batch.len() as f64;
        for (input, target) in batch {
            // forward pass keeping traces
            let mut x = input.clone();
            let mut traces = Vec::with_capacity(self.layers.len());
            let mut inputs = Vec::with_capacity(self.layers.len());
            for layer in &self.layers {
                let (pre, out) = layer.forward(&x);
                inputs.push(x);
                x = out.clone();
                traces.push((pre, out));
            }
            let out = &traces.last().unwrap().1;
            let n = out.len() as f64;
            let mut d_out: Vec<f64> =
                out.iter().zip(target).map(|(o, y)| 2.0 * (o - y) * scale / n).collect();
            for idx in (0..self.layers.len()).rev() {
                let (pre, out) = &traces[idx];
                d_out = self.layers[idx].backward(&inputs[idx], pre, out, &d_out, &mut grads[idx]);
            }
        }
        grads
    }

    pub fn sgd_step(&mut self, grads: &[LayerGrad], lr: f64) {
        for (layer, grad) in self.layers.iter_mut().zip(grads) {
            sgd_step(layer, grad, lr);
        }
    }

    /// Shuffled mini-batch SGD; returns the per-epoch mean loss history.
    pub fn fit(
        &mut self,
        data: &[(Vec<f64>, Vec<f64>)],
        cfg: &SgdConfig,
    ) -> Result<Vec<f64>, TrainError> {
        if data.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut history = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            shuffle(&mut order, &mut rng);
            let mut epoch_loss = 0.0;
            let mut batches = 0.0;
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                let batch: Vec<(Vec<f64>, Vec<f64>)> =
                    chunk.iter().map(|&i| data[i].clone()).collect();
                epoch_loss += self.mse_loss(&batch);
                batches += 1.0;
                let grads = self.backward_mse(&batch);
                self.sgd_step(&grads, cfg.learning_rate);
            }
            history.push(epoch_loss / batches);
        }
        Ok(history)
    }
}

/// Fisher-Yates with our seeded generator, so batch order is reproducible.
pub(crate) fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

/// Gradients for every parameter of a [`TwoHeadNet`].
#[derive(Clone, Debug)]
pub struct TwoHeadGrads {
    pub trunk: Vec<LayerGrad>,
    pub policy: LayerGrad,
    pub value: LayerGrad,
}

/// The Hexapawn network: 21 inputs, five 128-wide ReLU layers, a 28-way
/// softmax policy head and a tanh value head.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoHeadNet {
    pub trunk: Vec<DenseLayer>,
    pub policy_head: DenseLayer,
    pub value_head: DenseLayer,
}

impl TwoHeadNet {
    pub fn new(seed: u64) -> TwoHeadNet {
        TwoHeadNet::with_dims(INPUT_SIZE, &[128; 5], POLICY_SIZE, seed)
    }

    /// Arbitrary-size variant used by tests and experiments.
    pub fn with_dims(input: usize, hidden: &[usize], policy_out: usize, seed: u64) -> TwoHeadNet {
        assert!(!hidden.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut prev = input;
        for &h in hidden {
            trunk.push(DenseLayer::new(prev, h, Activation::Relu, &mut rng));
            prev = h;
        }
        let policy_head = DenseLayer::new(prev, policy_out, Activation::Softmax, &mut rng);
        let value_head = DenseLayer::new(prev, 1, Activation::Tanh, &mut rng);
        TwoHeadNet { trunk, policy_head, value_head }
    }

    pub fn input_dim(&self) -> usize {
        self.trunk[0].in_dim
    }

    pub fn policy_dim(&self) -> usize {
        self.policy_head.out_dim
    }

    /// Trunk then both heads. Returns (policy distribution, value).
    pub fn forward(&self, input: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(input.len(), self.input_dim(), "dimension mismatch");
        let mut x = input.to_vec();
        for layer in &self.trunk {
            x = layer.forward(&x).1;
        }
        let policy = self.policy_head.forward(&x).1;
        let value = self.value_head.forward(&x).1[0];
        (policy, value)
    }

    /// Sum of squared weights over all layers (regularization term basis).
    pub fn weight_sq_norm(&self) -> f64 {
        self.trunk.iter().map(|l| l.weight_sq_norm()).sum::<f64>()
            + self.policy_head.weight_sq_norm()
            + self.value_head.weight_sq_norm()
    }

    /// Mean combined loss over a batch plus the regularization term.
    pub fn batch_loss(&self, batch: &[TrainSample], reg_c: f64) -> f64 {
        let norm = self.weight_sq_norm();
        let mut total = 0.0;
        for sample in batch {
            let (policy, value) = self.forward(&sample.input);
            total += combined_loss(&policy, value, sample, 0.0, 0.0);
        }
        total / batch.len() as f64 + reg_c * norm
    }

    /// Exact gradients of [`TwoHeadNet::batch_loss`] for every parameter.
    pub fn backward(&self, batch: &[TrainSample], reg_c: f64) -> TwoHeadGrads {
        assert!(!batch.is_empty(), "backward needs a non-empty batch");
        let mut grads = TwoHeadGrads {
            trunk: self.trunk.iter().map(LayerGrad::zeros_like).collect(),
            policy: LayerGrad::zeros_like(&self.policy_head),
            value: LayerGrad::zeros_like(&self.value_head),
        };
        let scale = 1.0 / batch.len() as f64;
        for sample in batch {
            let mut x = sample.input.clone();
            let mut inputs = Vec::with_capacity(self.trunk.len());
            let mut traces = Vec::with_capacity(self.trunk.len());
            for layer in &self.trunk {
                let (pre, out) = layer.forward(&x);
                inputs.push(x);
                x = out.clone();
                traces.push((pre, out));
            }
            let trunk_out = x;
            let (_, policy) = self.policy_head.forward(&trunk_out);
            let (_, value_out) = self.value_head.forward(&trunk_out);
            let v = value_out[0];

            // softmax + cross-entropy fuse to (p - pi)
            let d_policy_pre: Vec<f64> = policy
                .iter()
                .zip(&sample.target_policy)
                .map(|(&p, &t)| (p - t) * scale)
                .collect();
            // squared error through tanh
            let d_value_pre =
                vec![2.0 * (v - sample.target_value) * (1.0 - v * v) * scale];

            let d_from_policy =
                self.policy_head.backward_from_pre(&trunk_out, &d_policy_pre, &mut grads.policy);
            let d_from_value =
                self.value_head.backward_from_pre(&trunk_out, &d_value_pre, &mut grads.value);
            let mut d_out: Vec<f64> =
                d_from_policy.iter().zip(&d_from_value).map(|(a, b)| a + b).collect();
            for idx in (0..self.trunk.len()).rev() {
                let (pre, out) = &traces[idx];
                d_out =
                    self.trunk[idx].backward(&inputs[idx], pre, out, &d_out, &mut grads.trunk[idx]);
            }
        }
        if reg_c != 0.0 {
            let layers = self
                .trunk
                .iter()
                .chain([&self.policy_head, &self.value_head])
                .zip(grads.trunk.iter_mut().chain([&mut grads.policy, &mut grads.value]));
            for (layer, grad) in layers {
                for (g, w) in grad.weights.iter_mut().zip(&layer.weights) {
                    *g += 2.0 * reg_c * w;
                }
            }
        }
        grads
    }

    pub fn sgd_step(&mut self, grads: &TwoHeadGrads, lr: f64) {
        for (layer, grad) in self.trunk.iter_mut().zip(&grads.trunk) {
            sgd_step(layer, grad, lr);
        }
        sgd_step(&mut self.policy_head, &grads.policy, lr);
        sgd_step(&mut self.value_head, &grads.value, lr);
    }

    /// Shuffled mini-batch SGD on the combined loss; returns the per-epoch
    /// mean loss history.
    pub fn fit(
        &mut self,
        dataset: &[TrainSample],
        cfg: &SgdConfig,
        reg_c: f64,
    ) -> Result<Vec<f64>, TrainError> {
        if dataset.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        let mut history = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            shuffle(&mut order, &mut rng);
            let mut epoch_loss = 0.0;
            let mut batches = 0.0;
            for chunk in order.chunks(cfg.batch_size.max(1)) {
                let batch: Vec<TrainSample> = chunk.iter().map(|&i| dataset[i].clone()).collect();
                epoch_loss += self.batch_loss(&batch, reg_c);
                batches += 1.0;
                let grads = self.backward(&batch, reg_c);
                self.sgd_step(&grads, cfg.learning_rate);
            }
            history.push(epoch_loss / batches);
        }
        Ok(history)
    }

    /// Writes the model in the HZNET text format.
    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        writeln!(w, "HZNET 1")?;
        writeln!(w, "{}", self.trunk.len() + 2)?;
        for layer in self.trunk.iter().chain([&self.policy_head, &self.value_head]) {
            write_layer(&mut w, layer)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a model written by [`TwoHeadNet::save`], validating structure.
    pub fn load(path: &Path) -> Result<TwoHeadNet, ModelError> {
        let file = File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let mut next_line = || -> Result<String, ModelError> {
            lines
                .next()
                .ok_or_else(|| ModelError::Corrupt("unexpected end of file".into()))?
                .map_err(ModelError::Io)
        };
        let header = next_line()?;
        let mut parts = header.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("HZNET"), Some("1")) => {}
            (Some("HZNET"), Some(v)) => return Err(ModelError::Format(format!("version {v}"))),
            _ => return Err(ModelError::Format("bad magic header".into())),
        }
        let count: usize = next_line()?
            .trim()
            .parse()
            .map_err(|_| ModelError::Corrupt("bad layer count".into()))?;
        if count < 3 {
            return Err(ModelError::Corrupt(format!("{count} layers is too few")));
        }
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            layers.push(read_layer(&mut next_line)?);
        }
        let value_head = layers.pop().unwrap();
        let policy_head = layers.pop().unwrap();
        let trunk = layers;
        if policy_head.activation != Activation::Softmax {
            return Err(ModelError::Corrupt("policy head must be softmax".into()));
        }
        if value_head.activation != Activation::Tanh || value_head.out_dim != 1 {
            return Err(ModelError::Corrupt("value head must be 1-wide tanh".into()));
        }
        let mut prev = trunk[0].in_dim;
        for layer in &trunk {
            if layer.in_dim != prev {
                return Err(ModelError::Corrupt("trunk dimensions do not chain".into()));
            }
            prev = layer.out_dim;
        }
        if policy_head.in_dim != prev || value_head.in_dim != prev {
            return Err(ModelError::Corrupt("head dimensions do not match trunk".into()));
        }
        Ok(TwoHeadNet { trunk, policy_head, value_head })
    }
}

/// The combined two-head loss for one sample:
/// `(z - v)^2 - pi^T log p + reg_c * weight_norm`.
pub fn combined_loss(
    policy_out: &[f64],
    value_out: f64,
    target: &TrainSample,
    reg_c: f64,
    weight_sq_norm: f64,
) -> f64 {
    let value_err = (target.target_value - value_out) * (target.target_value - value_out);
    value_err + cross_entropy(&target.target_policy, policy_out) + reg_c * weight_sq_norm
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported model format: {0}")]
    Format(String),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

fn write_layer<W: Write>(w: &mut W, layer: &DenseLayer) -> Result<(), ModelError> {
    writeln!(w, "dense {} {} {}", layer.in_dim, layer.out_dim, layer.activation.name())?;
    for o in 0..layer.out_dim {
        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
        writeln!(w, "{}", join_floats(row))?;
    }
    writeln!(w, "{}", join_floats(&layer.biases))?;
    Ok(())
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ")
}

fn parse_floats(line: &str, expect: usize) -> Result<Vec<f64>, ModelError> {
    let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
    let values = values.map_err(|_| ModelError::Corrupt("bad number".into()))?;
    if values.len() != expect {
        return Err(ModelError::Corrupt(format!(
            "expected {expect} numbers, found {}",
            values.len()
        )));
    }
    Ok(values)
}

fn read_layer(
    next_line: &mut impl FnMut() -> Result<String, ModelError>,
) -> Result<DenseLayer, ModelError> {
    let header = next_line()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "dense" {
        return Err(ModelError::Corrupt(format!("bad layer header: {header:?}")));
    }
    let in_dim: usize =
        parts[1].parse().map_err(|_| ModelError::Corrupt("bad in_dim".into()))?;
    let out_dim: usize =
        parts[2].parse().map_err(|_| ModelError::Corrupt("bad out_dim".into()))?;
    let activation = Activation::from_name(parts[3])
        .ok_or_else(|| ModelError::Corrupt(format!("unknown activation {:?}", parts[3])))?;
    let mut weights = Vec::with_capacity(in_dim * out_dim);
    for _ in 0..out_dim {
        weights.extend(parse_floats(&next_line()?, in_dim)?);
    }
    let biases = parse_floats(&next_line()?, out_dim)?;
    Ok(DenseLayer { in_dim, out_dim, weights, biases, activation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        let denom = a.abs().max(b.abs()).max(1e-6);
        (a - b).abs() / denom
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn activation_values() {
        assert_close(sigmoid(0.0), 0.5, 1e-15);
        assert_close(relu(-3.0), 0.0, 0.0);
        assert_close(relu(3.0), 3.0, 0.0);
        let sm = softmax(&[0.0, 0.0, 0.0]);
        for v in &sm {
            assert_close(*v, 1.0 / 3.0, 1e-15);
        }
        let mut clipped = vec![0.0; 3];
        Activation::ClippedRelu.apply(&[-0.5, 0.5, 1.5], &mut clipped);
        assert_eq!(clipped, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn sigmoid_derivative_identity() {
        for &x in &[-5.0, -1.3, 0.0, 0.7, 4.2] {
            let s = sigmoid(x);
            let h = 1e-6;
            let numeric = (sigmoid(x + h) - sigmoid(x - h)) / (2.0 * h);
            assert_close(s * (1.0 - s), numeric, 1e-9);
            // exact identity form used by backpropagation
            let d = Activation::Sigmoid.derivative(x, s);
            assert!((d - s * (1.0 - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_is_a_distribution() {
        let values = softmax(&[1.5, -2.0, 9.0, 0.25]);
        let sum: f64 = values.iter().sum();
        assert_close(sum, 1.0, 1e-9);
        for v in values {
            assert!(v > 0.0 && v < 1.0 + 1e-12);
        }
        // extreme logits stay finite thanks to max-subtraction
        let extreme = softmax(&[900.0, -900.0, 0.0]);
        assert!(extreme.iter().all(|v| v.is_finite()));
        assert_close(extreme.iter().sum::<f64>(), 1.0, 1e-9);
    }

    #[test]
    fn cross_entropy_examples() {
        let ce = cross_entropy(&[1.0, 0.0, 0.0], &[0.7, 0.1, 0.2]);
        assert_close(ce, -(0.7f64.ln()), 1e-12);
        assert_close(ce, 0.357, 0.001);
        // perfect one-hot prediction costs nothing
        assert_close(cross_entropy(&[0.0, 1.0], &[0.0, 1.0]), 0.0, 1e-9);
    }

    #[test]
    fn nll_mean_example() {
        let loss = nll_mean(&[0.7, 0.3]);
        assert_close(loss, (-(0.7f64.ln()) - 0.3f64.ln()) / 2.0, 1e-12);
        assert_close(loss, 0.78, 0.005);
        assert_close(nll_mean(&[0.7, 0.6]), 0.43, 0.005);
    }

    #[test]
    fn and_perceptron_with_threshold_weights() {
        // single 2 -> 1 layer with the classic weights (bias -10, w = 6, 6)
        let mut layer = DenseLayer::zeroed(2, 1, Activation::Sigmoid);
        layer.biases[0] = -10.0;
        layer.weights = vec![6.0, 6.0];
        let cases = [((0.0, 0.0), -10.0), ((1.0, 0.0), -4.0), ((0.0, 1.0), -4.0), ((1.0, 1.0), 2.0)];
        for ((x1, x2), pre_expected) in cases {
            let (pre, _) = layer.forward(&[x1, x2]);
            assert_close(pre[0], pre_expected, 1e-12);
            // thresholding the pre-activation reproduces AND
            let thresholded = if pre[0] >= 0.0 { 1.0 } else { 0.0 };
            assert_close(thresholded, if x1 == 1.0 && x2 == 1.0 { 1.0 } else { 0.0 }, 0.0);
        }
    }

    #[test]
    fn zero_two_head_net_outputs_uniform_policy_and_zero_value() {
        let mut net = TwoHeadNet::with_dims(INPUT_SIZE, &[8, 8], POLICY_SIZE, 0);
        for layer in net.trunk.iter_mut().chain([&mut net.policy_head, &mut net.value_head]) {
            layer.weights.iter_mut().for_each(|w| *w = 0.0);
            layer.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        let (policy, value) = net.forward(&[0.5; INPUT_SIZE]);
        for p in &policy {
            assert_close(*p, 1.0 / POLICY_SIZE as f64, 1e-12);
        }
        assert_close(value, 0.0, 1e-15);
    }

    #[test]
    fn forward_perturbation_is_first_order() {
        let net = TwoHeadNet::with_dims(INPUT_SIZE, &[16], POLICY_SIZE, 3);
        let input = [0.3; INPUT_SIZE];
        let (_, v0) = net.forward(&input);
        let mut perturbed = net.clone();
        let eps = 1e-6;
        perturbed.trunk[0].weights[7] += eps;
        let (_, v1) = perturbed.forward(&input);
        assert!((v1 - v0).abs() < 100.0 * eps, "output jumped by {}", v1 - v0);
    }

    #[test]
    fn worked_single_weight_gradient() {
        // The classic one-perceptron chain: output 0.95 on input (1, 0) with
        // weights (1, 2, 3); multiplying the rounded chain factors
        // 0.95 * 0.048 * 2 gives 0.0912, and the update with lr 10 moves
        // w1 from 2 to 1.088.
        let product: f64 = 0.95 * 0.048 * 2.0;
        assert_close(product, 0.0912, 1e-12);
        let mut layer = DenseLayer::zeroed(2, 1, Activation::Sigmoid);
        layer.biases[0] = 1.0;
        layer.weights = vec![2.0, 3.0];
        let (pre, out) = layer.forward(&[1.0, 0.0]);
        assert_close(pre[0], 3.0, 1e-12);
        assert_close(out[0], 0.95, 0.003);

        let grad = LayerGrad {
            weights: vec![0.0912, 0.0],
            biases: vec![0.0],
        };
        sgd_step(&mut layer, &grad, 10.0);
        assert_close(layer.weights[0], 1.088, 1e-12);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut net = Mlp::new(&[2, 3, 1], &[Activation::Sigmoid, Activation::Sigmoid], 5);
        let before = net.clone();
        let grads: Vec<LayerGrad> = net.layers.iter().map(LayerGrad::zeros_like).collect();
        net.sgd_step(&grads, 0.5);
        assert_eq!(net, before);
    }

    #[test]
    fn perfect_prediction_has_zero_loss_and_zero_gradient() {
        // force the net into a state that exactly reproduces a target
        let mut net = TwoHeadNet::with_dims(3, &[4], 2, 9);
        for layer in net.trunk.iter_mut().chain([&mut net.policy_head, &mut net.value_head]) {
            layer.weights.iter_mut().for_each(|w| *w = 0.0);
            layer.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        let sample = TrainSample {
            input: vec![0.0, 0.0, 0.0],
            target_policy: vec![0.5, 0.5],
            target_value: 0.0,
        };
        let (policy, value) = net.forward(&sample.input);
        let loss = combined_loss(&policy, value, &sample, 0.0, 0.0);
        // cross entropy of a matching non-one-hot target is its own entropy
        let entropy = cross_entropy(&sample.target_policy, &sample.target_policy);
        assert_close(loss, entropy, 1e-12);
        let grads = net.backward(&[sample], 0.0);
        for g in grads.policy.weights.iter().chain(&grads.value.weights) {
            assert_close(*g, 0.0, 1e-12);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn mlp_gradients_match_finite_differences() {
        let net = Mlp::new(
            &[4, 10, 10, 3],
            &[Activation::Sigmoid, Activation::Tanh, Activation::Sigmoid],
            17,
        );
        let batch: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.2, -0.4, 0.8, 0.1], vec![1.0, 0.0, 0.5]),
            (vec![-0.6, 0.3, 0.0, 0.9], vec![0.0, 1.0, 0.2]),
        ];
        let grads = net.backward_mse(&batch);
        for li in 0..net.layers.len() {
            for wi in 0..net.layers[li].weights.len() {
                let analytic = grads[li].weights[wi];
                let batch_ref = &batch;
                let mut probe = net.clone();
                let numeric = {
                    let loss_net = &mut probe;
                    let orig = loss_net.layers[li].weights[wi];
                    loss_net.layers[li].weights[wi] = orig + 1e-5;
                    let up = loss_net.mse_loss(batch_ref);
                    loss_net.layers[li].weights[wi] = orig - 1e-5;
                    let down = loss_net.mse_loss(batch_ref);
                    (up - down) / 2e-5
                };
                assert!(
                    rel_err(analytic, numeric) < 1e-4,
                    "layer {li} weight {wi}: {analytic} vs {numeric}"
                );
            }
            for bi in 0..net.layers[li].biases.len() {
                let analytic = grads[li].biases[bi];
                let mut probe = net.clone();
                let numeric = {
                    let orig = probe.layers[li].biases[bi];
                    probe.layers[li].biases[bi] = orig + 1e-5;
                    let up = probe.mse_loss(&batch);
                    probe.layers[li].biases[bi] = orig - 1e-5;
                    let down = probe.mse_loss(&batch);
                    (up - down) / 2e-5
                };
                assert!(rel_err(analytic, numeric) < 1e-4);
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn two_head_gradients_match_finite_differences() {
        let net = TwoHeadNet::with_dims(6, &[8, 8], 5, 23);
        let batch = vec![
            TrainSample {
                input: vec![1.0, 0.0, 0.5, 0.25, 0.0, 1.0],
                target_policy: vec![0.0, 1.0, 0.0, 0.0, 0.0],
                target_value: -1.0,
            },
            TrainSample {
                input: vec![0.0, 1.0, 0.0, 0.75, 0.5, 0.0],
                target_policy: vec![0.2, 0.2, 0.2, 0.2, 0.2],
                target_value: 1.0,
            },
        ];
        let reg_c = 0.01;
        let grads = net.backward(&batch, reg_c);
        let all_params = |n: &TwoHeadNet| -> Vec<f64> {
            let mut v = Vec::new();
            for l in n.trunk.iter().chain([&n.policy_head, &n.value_head]) {
                v.extend(&l.weights);
                v.extend(&l.biases);
            }
            v
        };
        let analytic: Vec<f64> = {
            let mut v = Vec::new();
            for g in grads.trunk.iter().chain([&grads.policy, &grads.value]) {
                v.extend(&g.weights);
                v.extend(&g.biases);
            }
            v
        };
        let n_params = all_params(&net).len();
        for pi in 0..n_params {
            let mut probe = net.clone();
            let numeric = {
                let set = |n: &mut TwoHeadNet, idx: usize, delta: f64| {
                    let mut k = idx;
                    for l in n
                        .trunk
                        .iter_mut()
                        .chain([&mut n.policy_head, &mut n.value_head])
                    {
                        if k < l.weights.len() {
                            l.weights[k] += delta;
                            return;
                        }
                        k -= l.weights.len();
                        if k < l.biases.len() {
                            l.biases[k] += delta;
                            return;
                        }
                        k -= l.biases.len();
                    }
                    unreachable!()
                };
                set(&mut probe, pi, 1e-5);
                let up = probe.batch_loss(&batch, reg_c);
                set(&mut probe, pi, -2e-5);
                let down = probe.batch_loss(&batch, reg_c);
                set(&mut probe, pi, 1e-5);
                (up - down) / 2e-5
            };
            assert!(
                rel_err(analytic[pi], numeric) < 1e-4,
                "param {pi}: {} vs {numeric}",
                analytic[pi]
            );
        }
    }

    #[test]
    fn fit_learns_and() {
        let data: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.0, 0.0], vec![0.0]),
            (vec![0.0, 1.0], vec![0.0]),
            (vec![1.0, 0.0], vec![0.0]),
            (vec![1.0, 1.0], vec![1.0]),
        ];
        let mut net = Mlp::new(&[2, 1], &[Activation::Sigmoid], 42);
        let cfg = SgdConfig { learning_rate: 2.0, batch_size: 4, epochs: 4000, seed: 42 };
        let history = net.fit(&data, &cfg).unwrap();
        assert!(history.last().unwrap() < &0.01, "AND failed to train");
        for (input, target) in &data {
            let out = net.forward(input)[0];
            assert!((out - target[0]).abs() < 0.15, "{input:?} -> {out}");
        }
    }

    #[test]
    fn single_perceptron_cannot_learn_xor() {
        let data: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.0, 0.0], vec![0.0]),
            (vec![0.0, 1.0], vec![1.0]),
            (vec![1.0, 0.0], vec![1.0]),
            (vec![1.0, 1.0], vec![0.0]),
        ];
        let mut net = Mlp::new(&[2, 1], &[Activation::Sigmoid], 7);
        let cfg = SgdConfig { learning_rate: 1.0, batch_size: 4, epochs: 5000, seed: 7 };
        let history = net.fit(&data, &cfg).unwrap();
        assert!(
            history.iter().all(|l| *l >= 0.06),
            "inseparable points should keep the loss high, got {:?}",
            history.last()
        );
    }

    #[test]
    fn hidden_layer_learns_xor() {
        let data: Vec<(Vec<f64>, Vec<f64>)> = vec![
            (vec![0.0, 0.0], vec![0.0]),
            (vec![0.0, 1.0], vec![1.0]),
            (vec![1.0, 0.0], vec![1.0]),
            (vec![1.0, 1.0], vec![0.0]),
        ];
        let mut net = Mlp::new(&[2, 8, 1], &[Activation::Sigmoid, Activation::Sigmoid], 1);
        let cfg = SgdConfig { learning_rate: 2.0, batch_size: 4, epochs: 8000, seed: 1 };
        net.fit(&data, &cfg).unwrap();
        for (input, target) in &data {
            let out = net.forward(input)[0];
            assert!((out - target[0]).abs() < 0.15, "{input:?} -> {out}");
        }
    }

    #[test]
    fn fit_is_deterministic_given_seed() {
        let data: Vec<(Vec<f64>, Vec<f64>)> =
            (0..10).map(|i| (vec![i as f64 / 10.0], vec![(i % 2) as f64])).collect();
        let run = || {
            let mut net = Mlp::new(&[1, 6, 1], &[Activation::Tanh, Activation::Sigmoid], 99);
            let cfg = SgdConfig { learning_rate: 0.3, batch_size: 3, epochs: 50, seed: 99 };
            let history = net.fit(&data, &cfg).unwrap();
            (net, history)
        };
        let (net_a, hist_a) = run();
        let (net_b, hist_b) = run();
        assert_eq!(net_a, net_b);
        assert_eq!(hist_a, hist_b);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let mut net = TwoHeadNet::with_dims(3, &[4], 2, 0);
        let cfg = SgdConfig::default();
        assert!(net.fit(&[], &cfg, 0.0).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.hznet");
        let net = TwoHeadNet::with_dims(INPUT_SIZE, &[32, 32], POLICY_SIZE, 77);
        net.save(&path).unwrap();
        let loaded = TwoHeadNet::load(&path).unwrap();
        assert_eq!(net, loaded);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let input: Vec<f64> = (0..INPUT_SIZE).map(|_| rng.gen_range(0.0..1.0)).collect();
            let (p1, v1) = net.forward(&input);
            let (p2, v2) = loaded.forward(&input);
            assert_eq!(p1, p2);
            assert_eq!(v1, v2);
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.hznet");
        let net = TwoHeadNet::with_dims(4, &[4], 3, 1);
        net.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        std::fs::write(&path, lines[..lines.len() - 2].join("\n")).unwrap();
        match TwoHeadNet::load(&path) {
            Err(ModelError::Corrupt(_)) => {}
            other => panic!("expected corrupt error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.hznet");
        std::fs::write(&path, "NOTNET 1\n0\n").unwrap();
        match TwoHeadNet::load(&path) {
            Err(ModelError::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
        std::fs::write(&path, "HZNET 9\n0\n").unwrap();
        match TwoHeadNet::load(&path) {
            Err(ModelError::Format(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
