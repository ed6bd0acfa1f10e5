//! Floating-point reference network.
//!
//! A fully connected feed-forward net with `tanh` or ReLU hidden layers and
//! a single linear output. The output is a logit; training squashes it
//! through a sigmoid and minimizes binary cross-entropy.

mod gradcheck;
mod train;

pub use gradcheck::{gradient_check, gradient_check_against, RELATIVE_ERROR_FLOOR};
pub use train::{oversample, train_adam, LabeledPair, Loss, TrainConfig, TrainReport};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::substream;

/// Version tag of the floating-point model file.
pub const MLP_FORMAT: &str = "scvs-mlp/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("invalid shape {0:?}: need at least input and output sizes, all nonzero")]
    InvalidShape(Vec<usize>),
    #[error("input has {got} features, network expects {expected}")]
    InputMismatch { expected: usize, got: usize },
    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("data holds a single class; both actives and decoys are required")]
    SingleClass,
    #[error("layer {layer} is malformed: {reason}")]
    MalformedLayer { layer: usize, reason: String },
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative in terms of the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self, NnError> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(NnError::InvalidConfig(format!("unknown activation {other:?}"))),
        }
    }
}

/// One fully connected layer; `weights` is row-major `fan_out x fan_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self { fan_in, fan_out, weights: vec![0.0; fan_in * fan_out], bias: vec![0.0; fan_out] }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.fan_in..(i + 1) * self.fan_in]
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.fan_out).map(|i| {
            self.row(i).iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + self.bias[i]
        }));
    }
}

/// Gradient of the loss with the same layout as [`Mlp`]'s layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    fn zeros_like(mlp: &Mlp) -> Self {
        Self { layers: mlp.layers.iter().map(|l| Dense::zeros(l.fan_in, l.fan_out)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }
}

/// Hidden layer sizes of the named model family: `256` is a single hidden
/// layer, every other size `n` is `[n, n/2]`.
pub fn hidden_layers(first_hidden: usize) -> Vec<usize> {
    if first_hidden == 256 {
        vec![256]
    } else {
        vec![first_hidden, (first_hidden / 2).max(1)]
    }
}

/// Full shape `[24, hidden.., 1]` for the model family named by its first
/// hidden layer.
pub fn family_shape(first_hidden: usize) -> Vec<usize> {
    let mut shape = vec![crate::PAIR_FEATURES];
    shape.extend(hidden_layers(first_hidden));
    shape.push(1);
    shape
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    activation: Activation,
    layers: Vec<Dense>,
    trained: bool,
}

/// Scratch activations of one forward pass.
pub(crate) struct Trace {
    /// Pre-activations per layer.
    pub pre: Vec<Vec<f64>>,
    /// Layer outputs; `post[0]` is the input, the last is the logit.
    pub post: Vec<Vec<f64>>,
}

impl Mlp {
    /// Random initialization: He-uniform for ReLU, Xavier-uniform for tanh.
    pub fn new(shape: &[usize], activation: Activation, seed: u64) -> Result<Self, NnError> {
        check_shape(shape)?;
        let mut rng = substream(seed, "mlp/init");
        let layers = shape
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = match activation {
                    Activation::Relu => (6.0 / fan_in as f64).sqrt(),
                    Activation::Tanh => (6.0 / (fan_in + fan_out) as f64).sqrt(),
                };
                let weights = (0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)).collect();
                Dense { fan_in, fan_out, weights, bias: vec![0.0; fan_out] }
            })
            .collect();
        Ok(Self { activation, layers, trained: false })
    }

    pub fn zeros(shape: &[usize], activation: Activation) -> Result<Self, NnError> {
        check_shape(shape)?;
        let layers = shape.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        Ok(Self { activation, layers, trained: false })
    }

    pub fn from_layers(layers: Vec<Dense>, activation: Activation) -> Result<Self, NnError> {
        let mlp = Self { activation, layers, trained: false };
        mlp.validate()?;
        Ok(mlp)
    }

    fn validate(&self) -> Result<(), NnError> {
        if self.layers.is_empty() {
            return Err(NnError::InvalidShape(vec![]));
        }
        for (i, l) in self.layers.iter().enumerate() {
            let bad = |reason: &str| NnError::MalformedLayer { layer: i, reason: reason.into() };
            if l.fan_in == 0 || l.fan_out == 0 {
                return Err(bad("zero-sized layer"));
            }
            if l.weights.len() != l.fan_in * l.fan_out || l.bias.len() != l.fan_out {
                return Err(bad("parameter count does not match fan_in/fan_out"));
            }
            if i > 0 && self.layers[i - 1].fan_out != l.fan_in {
                return Err(bad("fan_in does not chain with previous layer"));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(bad("non-finite parameter"));
            }
        }
        if self.layers.last().map(|l| l.fan_out) != Some(1) {
            return Err(NnError::MalformedLayer {
                layer: self.layers.len() - 1,
                reason: "output layer must have one neuron".into(),
            });
        }
        Ok(())
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub(crate) fn mark_trained(&mut self) {
        self.trained = true;
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].fan_in).chain(self.layers.iter().map(|l| l.fan_out)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    /// Pre-sigmoid output of the final neuron.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NnError> {
        Ok(self.trace(x)?.post.last().expect("at least one layer")[0])
    }

    /// Hidden-layer outputs followed by the output logit.
    pub fn layer_outputs(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, NnError> {
        let mut trace = self.trace(x)?;
        trace.post.remove(0);
        Ok(trace.post)
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Result<Trace, NnError> {
        if x.len() != self.input_width() {
            return Err(NnError::InputMismatch { expected: self.input_width(), got: x.len() });
        }
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.affine(&post[i], &mut z);
            if z.iter().any(|v| !v.is_finite()) {
                return Err(NnError::NonFinite { layer: i });
            }
            let a = if i == last { z.clone() } else { z.iter().map(|&v| self.activation.apply(v)).collect() };
            pre.push(z);
            post.push(a);
        }
        Ok(Trace { pre, post })
    }

    /// Binary cross-entropy of `sigmoid(forward(x))` against `label`.
    pub fn loss(&self, x: &[f64], label: f64) -> Result<f64, NnError> {
        Ok(bce_with_logit(self.forward(x)?, label))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn backprop(&self, x: &[f64], label: f64) -> Result<(f64, Gradients), NnError> {
        let mut grads = Gradients::zeros_like(self);
        let loss = self.accumulate_gradient(x, label, &mut grads)?;
        Ok((loss, grads))
    }

    /// Adds this sample's gradient into `grads`, returns its loss.
    pub(crate) fn accumulate_gradient(
        &self,
        x: &[f64],
        label: f64,
        grads: &mut Gradients,
    ) -> Result<f64, NnError> {
        let trace = self.trace(x)?;
        let logit = trace.post.last().expect("output")[0];
        let mut delta = vec![sigmoid(logit) - label];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.post[l];
            let g = &mut grads.layers[l];
            for (i, &d) in delta.iter().enumerate() {
                g.bias[i] += d;
                for (gw, &a) in g.weights[i * layer.fan_in..(i + 1) * layer.fan_in].iter_mut().zip(input) {
                    *gw += d * a;
                }
            }
            if l > 0 {
                let z = &trace.pre[l - 1];
                delta = (0..layer.fan_in)
                    .map(|j| {
                        let back: f64 = delta.iter().enumerate().map(|(i, d)| d * layer.weights[i * layer.fan_in + j]).sum();
                        back * self.activation.derivative(z[j], input[j])
                    })
                    .collect();
            }
        }
        Ok(bce_with_logit(logit, label))
    }

    pub fn to_json(&self) -> String {
        let file = MlpFile {
            version: MLP_FORMAT.to_string(),
            activation: self.activation,
            trained: self.trained,
            layers: self.layers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NnError> {
        let file: MlpFile = serde_json::from_str(text).map_err(|e| NnError::Format(e.to_string()))?;
        if file.version != MLP_FORMAT {
            return Err(NnError::Format(format!("unsupported version {:?}", file.version)));
        }
        let mlp = Self { activation: file.activation, layers: file.layers, trained: file.trained };
        mlp.validate()?;
        Ok(mlp)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpFile {
    version: String,
    activation: Activation,
    trained: bool,
    layers: Vec<Dense>,
}

fn check_shape(shape: &[usize]) -> Result<(), NnError> {
    if shape.len() < 2 || shape.contains(&0) || shape.last() != Some(&1) {
        return Err(NnError::InvalidShape(shape.to_vec()));
    }
    Ok(())
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `BCE(sigmoid(z), y)`.
#[inline]
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}
