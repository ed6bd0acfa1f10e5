use super::{layer_gain, ScNetwork};
use crate::sc::{FixedWord, ScError};

/// Layer outputs of the fixed-point reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrace {
    pub score: f64,
    /// Per layer: post-ReLU values for hidden layers, the raw output last.
    pub outputs: Vec<Vec<f64>>,
}

/// What the stochastic network computes without stochastic noise: the same
/// quantized words, the same per-layer division and saturation, in real
/// arithmetic.
pub fn reference_forward(net: &ScNetwork, input: &[f64]) -> Result<ReferenceTrace, ScError> {
    net.validate()?;
    if input.len() != net.input_width() {
        return Err(ScError::DimensionMismatch { expected: net.input_width(), got: input.len() });
    }
    let lsb = 1.0 / f64::from(1u32 << (net.width - 1));
    let hi = 1.0 - lsb;
    let mut h = input
        .iter()
        .map(|&v| FixedWord::encode(v, net.width).map(FixedWord::decode))
        .collect::<Result<Vec<_>, _>>()?;
    let last = net.layers.len() - 1;
    let mut outputs = Vec::with_capacity(net.layers.len());
    for (l, layer) in net.layers.iter().enumerate() {
        let gain = layer_gain(layer.norm_shift, net.stream_len, net.width);
        let next: Vec<f64> = (0..layer.fan_out)
            .map(|i| {
                let mut dot: f64 = layer.row(i).iter().zip(&h).map(|(&w, x)| f64::from(w) * lsb * x).sum();
                if let Some(b) = &layer.bias {
                    dot += f64::from(b[i]) * lsb;
                }
                let v = (dot / gain).clamp(-1.0, hi);
                if l == last {
                    v
                } else {
                    v.max(0.0)
                }
            })
            .collect();
        outputs.push(next.clone());
        h = next;
    }
    Ok(ReferenceTrace { score: outputs[last][0], outputs })
}
