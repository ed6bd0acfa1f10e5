use super::{default_norm_shift, layer_gain, ScLayerSpec, ScNetwork};
use crate::nn::{Activation, Mlp};
use crate::sc::{FixedWord, LfsrConfig, ScError, DEFAULT_WIDTH};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeOptions {
    pub width: u32,
    pub stream_len: usize,
    /// Quantile of `|w|` per layer that maps to full scale; larger weights
    /// clip. 1.0 uses the maximum.
    pub clip_quantile: f64,
    pub lfsr1: LfsrConfig,
    pub lfsr2: LfsrConfig,
    /// Keep biases as an extra weight against a constant +1 stream.
    pub bias: bool,
}

impl Default for QuantizeOptions {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            stream_len: (1 << DEFAULT_WIDTH) - 1,
            clip_quantile: 1.0,
            lfsr1: LfsrConfig::default_lfsr1(),
            lfsr2: LfsrConfig::default_lfsr2(),
            bias: true,
        }
    }
}

impl QuantizeOptions {
    /// Full-period stream and the default register pair for `width`.
    pub fn for_width(width: u32) -> Result<Self, ScError> {
        let (lfsr1, lfsr2) = LfsrConfig::default_pair(width)?;
        Ok(Self { width, stream_len: (1 << width) - 1, lfsr1, lfsr2, ..Self::default() })
    }
}

fn quantile_abs(values: &[f64], q: f64) -> f64 {
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if mags.is_empty() {
        return 0.0;
    }
    mags.sort_by(f64::total_cmp);
    let idx = ((q * mags.len() as f64).ceil() as usize).clamp(1, mags.len()) - 1;
    mags[idx]
}

/// Post-training quantization of a ReLU network.
///
/// Each layer's weights are divided by the `clip_quantile` quantile of their
/// magnitudes, clipped and rounded to words. Because the stochastic layers
/// also divide their dot product by a known gain, the hardware activation
/// of layer `l` equals the float activation divided by the running product
/// of scales and gains; biases are divided by the same factor so the
/// decision function is kept up to rounding and clipping.
pub fn quantize_weights(mlp: &Mlp, opts: &QuantizeOptions) -> Result<ScNetwork, ScError> {
    if !mlp.is_trained() {
        return Err(ScError::NotQuantizable("model has not been trained".into()));
    }
    quantize_layers(mlp, opts)
}

/// A randomly initialized ReLU network of `shape`, quantized with `opts`.
/// Used for parity sweeps and benchmarks where training is beside the point.
pub fn random_relu_network(shape: &[usize], opts: &QuantizeOptions, seed: u64) -> Result<ScNetwork, ScError> {
    let mlp = Mlp::new(shape, Activation::Relu, seed).map_err(|e| ScError::InvalidNetwork(e.to_string()))?;
    quantize_layers(&mlp, opts)
}

fn quantize_layers(mlp: &Mlp, opts: &QuantizeOptions) -> Result<ScNetwork, ScError> {
    if mlp.activation() != Activation::Relu {
        return Err(ScError::NotQuantizable(
            "hidden activation is tanh; the stochastic network implements ReLU only, retrain with relu".into(),
        ));
    }
    if !(opts.clip_quantile > 0.0 && opts.clip_quantile <= 1.0) {
        return Err(ScError::OutOfRange { name: "clip_quantile", value: opts.clip_quantile });
    }
    let width = opts.width;
    let mut input_gain = 1.0;
    let mut layers = Vec::with_capacity(mlp.layers().len());
    for dense in mlp.layers() {
        let mut scale = quantile_abs(&dense.weights, opts.clip_quantile);
        if !(scale > 0.0) {
            scale = 1.0;
        }
        let weights = dense
            .weights
            .iter()
            .map(|&w| FixedWord::encode(w / scale, width).map(FixedWord::value))
            .collect::<Result<Vec<_>, _>>()?;
        let bias = if opts.bias {
            Some(
                dense
                    .bias
                    .iter()
                    .map(|&b| FixedWord::encode(b / (scale * input_gain), width).map(FixedWord::value))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        } else {
            None
        };
        let apc_inputs = dense.fan_in + usize::from(opts.bias);
        let norm_shift = default_norm_shift(apc_inputs, opts.stream_len, width);
        input_gain *= scale * layer_gain(norm_shift, opts.stream_len, width);
        layers.push(ScLayerSpec { fan_in: dense.fan_in, fan_out: dense.fan_out, norm_shift, scale, weights, bias });
    }
    let net = ScNetwork { width, stream_len: opts.stream_len, lfsr1: opts.lfsr1, lfsr2: opts.lfsr2, layers };
    net.validate()?;
    Ok(net)
}
