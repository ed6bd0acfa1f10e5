//! Stochastic hardware network.
//!
//! Every neuron multiplies its input streams by its weight streams with an
//! XNOR array, sums the products over all inputs and all cycles with an
//! accumulative parallel counter (APC), scales the APC word down by a
//! per-layer right shift and converts it back to a stream. ReLU is one OR
//! gate against a zero stream drawn from the same random words, which makes
//! the OR compute `max(s, 0)`.
//!
//! The whole network uses two LFSRs: LFSR1 converts the inputs, the zero
//! reference and every APC output; LFSR2 converts the weights.

mod engine;
mod quantize;
mod reference;

pub use engine::{relu_via_or, sc_network_infer, sc_neuron_forward, InferOptions, InferenceTrace, NeuronOutput, ScEngine};
pub use quantize::{quantize_weights, random_relu_network, QuantizeOptions};
pub use reference::{reference_forward, ReferenceTrace};

use serde::{Deserialize, Serialize};

use crate::sc::{FixedWord, LfsrConfig, ScError};

/// Version tag of the stochastic model file.
pub const SC_FORMAT: &str = "scvs-sc/1";

/// One layer of the stochastic network. `weights` holds quantized words,
/// row-major `fan_out x fan_in`; `bias`, when present, is one extra weight
/// per neuron applied to a constant +1 stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScLayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Arithmetic right shift applied to the APC word before reconversion.
    pub norm_shift: u32,
    /// Real value of a weight word of magnitude one.
    pub scale: f64,
    pub weights: Vec<i32>,
    pub bias: Option<Vec<i32>>,
}

impl ScLayerSpec {
    /// Inputs seen by the APC, counting the bias column.
    pub fn apc_inputs(&self) -> usize {
        self.fan_in + usize::from(self.bias.is_some())
    }

    pub fn row(&self, i: usize) -> &[i32] {
        &self.weights[i * self.fan_in..(i + 1) * self.fan_in]
    }

    /// Weights mapped back to real values (`word * scale`).
    pub fn dequantized_weights(&self, width: u32) -> Vec<f64> {
        let lsb = 1.0 / f64::from(1u32 << (width - 1));
        self.weights.iter().map(|&w| f64::from(w) * lsb * self.scale).collect()
    }
}

/// Smallest shift for which `fan_in * stream_len` full-scale APC counts
/// still fit a `width`-bit word.
pub fn min_norm_shift(apc_inputs: usize, stream_len: usize, width: u32) -> u32 {
    let peak = (apc_inputs * stream_len) as u128;
    let mut shift = 0u32;
    while (1u128 << (shift + width - 1)) < peak {
        shift += 1;
    }
    shift
}

fn ceil_log2(v: usize) -> u32 {
    usize::BITS - v.saturating_sub(1).leading_zeros()
}

/// Default normalization: divide the dot product by the next power of two
/// at or above the input count, with the stream length rounded up to a
/// power of two. Never below [`min_norm_shift`].
pub fn default_norm_shift(apc_inputs: usize, stream_len: usize, width: u32) -> u32 {
    let total = ceil_log2(apc_inputs) + ceil_log2(stream_len + 1);
    total.saturating_sub(width - 1).max(min_norm_shift(apc_inputs, stream_len, width))
}

/// Factor by which a layer divides its bipolar dot product:
/// `word / 2^(width-1) = dot / gain`.
pub fn layer_gain(norm_shift: u32, stream_len: usize, width: u32) -> f64 {
    2f64.powi((norm_shift + width - 1) as i32) / stream_len as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScNetwork {
    pub width: u32,
    pub stream_len: usize,
    pub lfsr1: LfsrConfig,
    pub lfsr2: LfsrConfig,
    pub layers: Vec<ScLayerSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LfsrFile {
    taps: u32,
    seed: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScNetworkFile {
    version: String,
    width: u32,
    stream_len: usize,
    lfsr1: LfsrFile,
    lfsr2: LfsrFile,
    layers: Vec<ScLayerSpec>,
}

impl ScNetwork {
    pub fn validate(&self) -> Result<(), ScError> {
        let bad = |m: String| Err(ScError::InvalidNetwork(m));
        self.lfsr1.validate()?;
        self.lfsr2.validate()?;
        if self.lfsr1.width != self.width || self.lfsr2.width != self.width {
            return bad("LFSR width differs from word width".into());
        }
        if self.lfsr1.taps == self.lfsr2.taps && self.lfsr1.seed == self.lfsr2.seed {
            return bad("lfsr1 and lfsr2 must differ in polynomial or seed".into());
        }
        if self.stream_len == 0 {
            return bad("stream_len must be at least 1".into());
        }
        if self.layers.is_empty() {
            return bad("network has no layers".into());
        }
        let half = 1i64 << (self.width - 1);
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.fan_in == 0 || layer.fan_out == 0 {
                return bad(format!("layer {l} has a zero dimension"));
            }
            if layer.weights.len() != layer.fan_in * layer.fan_out {
                return bad(format!("layer {l} holds {} weights, expected {}", layer.weights.len(), layer.fan_in * layer.fan_out));
            }
            if let Some(b) = &layer.bias {
                if b.len() != layer.fan_out {
                    return bad(format!("layer {l} bias length {} != fan_out {}", b.len(), layer.fan_out));
                }
            }
            let words = layer.weights.iter().chain(layer.bias.iter().flatten());
            if let Some(&w) = words.clone().find(|&&w| i64::from(w) < -half || i64::from(w) >= half) {
                return Err(ScError::WordOutOfRange { value: w.into(), width: self.width });
            }
            if l > 0 && self.layers[l - 1].fan_out != layer.fan_in {
                return bad(format!("layer {l} fan_in {} does not match previous fan_out", layer.fan_in));
            }
            let min = min_norm_shift(layer.apc_inputs(), self.stream_len, self.width);
            if layer.norm_shift < min {
                return bad(format!("layer {l} norm_shift {} below minimum {min}", layer.norm_shift));
            }
            if !(layer.scale.is_finite() && layer.scale > 0.0) {
                return bad(format!("layer {l} scale must be positive"));
            }
        }
        if self.layers.last().map(|l| l.fan_out) != Some(1) {
            return bad("final layer must have one neuron".into());
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn shape(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].fan_in).chain(self.layers.iter().map(|l| l.fan_out)).collect()
    }

    /// Product of all weight scales and layer gains: the network output
    /// times this factor approximates the floating-point logit.
    pub fn output_gain(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.scale * layer_gain(l.norm_shift, self.stream_len, self.width))
            .product()
    }

    pub(crate) fn word(&self, value: i32) -> FixedWord {
        FixedWord::new(value, self.width).expect("validated network words are in range")
    }

    pub fn to_json(&self) -> String {
        let file = ScNetworkFile {
            version: SC_FORMAT.to_string(),
            width: self.width,
            stream_len: self.stream_len,
            lfsr1: LfsrFile { taps: self.lfsr1.taps, seed: self.lfsr1.seed },
            lfsr2: LfsrFile { taps: self.lfsr2.taps, seed: self.lfsr2.seed },
            layers: self.layers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScError> {
        let file: ScNetworkFile =
            serde_json::from_str(text).map_err(|e| ScError::InvalidNetwork(e.to_string()))?;
        if file.version != SC_FORMAT {
            return Err(ScError::InvalidNetwork(format!("unsupported version {:?}", file.version)));
        }
        let net = Self {
            width: file.width,
            stream_len: file.stream_len,
            lfsr1: LfsrConfig { width: file.width, taps: file.lfsr1.taps, seed: file.lfsr1.seed },
            lfsr2: LfsrConfig { width: file.width, taps: file.lfsr2.taps, seed: file.lfsr2.seed },
            layers: file.layers,
        };
        net.validate()?;
        Ok(net)
    }
}
