use rayon::prelude::*;

use super::ScNetwork;
use crate::sc::stream::xnor_ones;
use crate::sc::{gate_eval, to_stochastic, BitStream, FixedWord, GateKind, Lfsr, Lineage, RandomWords, ScError};

/// ReLU as a single OR gate: `OR(s, zero)` equals `max(s, 0)` only when both
/// streams come from the same random words.
pub fn relu_via_or(s: &BitStream, zero: &BitStream) -> Result<BitStream, ScError> {
    match (s.lineage(), zero.lineage()) {
        (Lineage::Rng(a), Lineage::Rng(b)) if a == b => {
            Ok(gate_eval(GateKind::Or, s, zero)?.with_lineage(s.lineage()))
        }
        (left, right) => Err(ScError::CorrelationViolation { left, right }),
    }
}

/// Result of one stochastic neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronOutput {
    /// Post-ReLU stream `a_i(t)`, correlated with `R_x(t)`.
    pub stream: BitStream,
    /// Raw APC count.
    pub apc: i64,
    /// APC count after the right shift and saturation.
    pub word: FixedWord,
    pub saturated: bool,
}

fn accumulate(inputs: &[BitStream], weights: &[BitStream]) -> i64 {
    inputs
        .iter()
        .zip(weights)
        .map(|(x, w)| 2 * xnor_ones(x, w) as i64 - x.len() as i64)
        .sum()
}

fn normalize(apc: i64, norm_shift: u32, width: u32) -> (FixedWord, bool) {
    // `>>` on i64 is an arithmetic shift (floor division by 2^shift).
    FixedWord::saturating(apc >> norm_shift, width).expect("network width validated")
}

/// The output neuron is never reconverted, so its APC count is read out in
/// full: the same scaling as the shifted word, without dropping the low
/// bits, saturated to the word range.
fn readout(apc: i64, norm_shift: u32, width: u32) -> f64 {
    let unit = f64::from(1u32 << (width - 1));
    let v = apc as f64 / (2f64.powi(norm_shift as i32) * unit);
    v.clamp(-1.0, 1.0 - 1.0 / unit)
}

/// One stochastic neuron: XNOR array, APC, right shift with saturation,
/// reconversion against `rx` and OR with the zero stream.
///
/// `x` must already be converted with `rx`; the weight words are converted
/// here with `rw`, which must be a different sequence.
pub fn sc_neuron_forward(
    x: &[BitStream],
    w_row: &[FixedWord],
    rx: &RandomWords,
    rw: &RandomWords,
    norm_shift: u32,
) -> Result<NeuronOutput, ScError> {
    if x.len() != w_row.len() {
        return Err(ScError::DimensionMismatch { expected: w_row.len(), got: x.len() });
    }
    if x.is_empty() {
        return Err(ScError::NoColumns);
    }
    let len = x[0].len();
    if rx.tag() == rw.tag() {
        return Err(ScError::CorrelationViolation { left: Lineage::Rng(rx.tag()), right: Lineage::Rng(rw.tag()) });
    }
    if let Some(s) = x.iter().find(|s| s.lineage() == Lineage::Rng(rw.tag())) {
        return Err(ScError::CorrelationViolation { left: s.lineage(), right: Lineage::Rng(rw.tag()) });
    }
    if let Some(s) = x.iter().find(|s| s.len() != len) {
        return Err(ScError::LengthMismatch { left: len, right: s.len() });
    }
    let weights = w_row.iter().map(|&w| to_stochastic(w, rw, len)).collect::<Result<Vec<_>, _>>()?;
    let width = rx.width();
    let apc = accumulate(x, &weights);
    let (word, saturated) = normalize(apc, norm_shift, width);
    let s = to_stochastic(word, rx, len)?;
    let zero = to_stochastic(FixedWord::new(0, width)?, rx, len)?;
    let stream = relu_via_or(&s, &zero)?;
    Ok(NeuronOutput { stream, apc, word, saturated })
}

/// Runtime knobs that are not part of the network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InferOptions {
    /// Offset, in LFSR1 words, of the window used for APC reconversion and
    /// zero(t) relative to the input-conversion window. Zero means lockstep.
    pub reconvert_phase: usize,
}

/// Everything one inference produced, for diagnostics and invariant checks.
#[derive(Debug, Clone)]
pub struct InferenceTrace {
    pub score: f64,
    /// Streams entering each layer.
    pub inputs: Vec<Vec<BitStream>>,
    /// Reconverted APC streams `s(t)` before the ReLU, per layer. Empty for
    /// the output layer, whose word is read out directly.
    pub pre_relu: Vec<Vec<BitStream>>,
    /// Normalized APC words per layer.
    pub words: Vec<Vec<FixedWord>>,
    /// Decoded outputs per layer: post-ReLU streams for hidden layers, the
    /// full-precision APC readout for the output neuron.
    pub outputs: Vec<Vec<f64>>,
    pub saturations: usize,
}

/// A network with its random sequences and weight streams materialized.
///
/// Weight streams do not depend on the input, so they are generated once.
/// Construction instantiates exactly two LFSRs.
#[derive(Debug, Clone)]
pub struct ScEngine {
    net: ScNetwork,
    rx_in: RandomWords,
    rx_out: RandomWords,
    zero: BitStream,
    ones: BitStream,
    /// Per layer, row-major `fan_out x apc_inputs`.
    weights: Vec<Vec<BitStream>>,
    rng_instances: usize,
}

impl ScEngine {
    pub fn new(net: ScNetwork) -> Result<Self, ScError> {
        Self::with_options(net, InferOptions::default())
    }

    pub fn with_options(net: ScNetwork, opts: InferOptions) -> Result<Self, ScError> {
        net.validate()?;
        let n = net.stream_len;
        let mut rng_instances = 0;

        let mut lfsr1 = Lfsr::new(net.lfsr1)?;
        rng_instances += 1;
        let words = lfsr1.take_words(n + opts.reconvert_phase);
        let rx_in = words.window(0, n)?;
        let rx_out = words.window(opts.reconvert_phase, n)?;

        let mut lfsr2 = Lfsr::new(net.lfsr2)?;
        rng_instances += 1;
        let mut weights = Vec::with_capacity(net.layers.len());
        for layer in &net.layers {
            let rw = lfsr2.take_words(n);
            let mut streams = Vec::with_capacity(layer.fan_out * layer.apc_inputs());
            for i in 0..layer.fan_out {
                for &w in layer.row(i) {
                    streams.push(to_stochastic(net.word(w), &rw, n)?);
                }
                if let Some(bias) = &layer.bias {
                    streams.push(to_stochastic(net.word(bias[i]), &rw, n)?);
                }
            }
            weights.push(streams);
        }

        let zero = to_stochastic(FixedWord::new(0, net.width)?, &rx_out, n)?;
        let ones = BitStream::constant(true, n)?;
        Ok(Self { net, rx_in, rx_out, zero, ones, weights, rng_instances })
    }

    pub fn network(&self) -> &ScNetwork {
        &self.net
    }

    /// Number of LFSRs instantiated to build this engine.
    pub fn rng_instances(&self) -> usize {
        self.rng_instances
    }

    pub fn zero_stream(&self) -> &BitStream {
        &self.zero
    }

    pub fn weight_stream(&self, layer: usize, neuron: usize, input: usize) -> Option<&BitStream> {
        let l = self.net.layers.get(layer)?;
        if neuron >= l.fan_out || input >= l.apc_inputs() {
            return None;
        }
        self.weights[layer].get(neuron * l.apc_inputs() + input)
    }

    fn convert_inputs(&self, input: &[f64]) -> Result<Vec<BitStream>, ScError> {
        if input.len() != self.net.input_width() {
            return Err(ScError::DimensionMismatch { expected: self.net.input_width(), got: input.len() });
        }
        input
            .iter()
            .map(|&v| {
                if !(v.is_finite() && (-1.0..=1.0).contains(&v)) {
                    return Err(ScError::OutOfRange { name: "input", value: v });
                }
                to_stochastic(FixedWord::encode(v, self.net.width)?, &self.rx_in, self.net.stream_len)
            })
            .collect()
    }

    /// Decoded output of the final neuron.
    pub fn infer(&self, input: &[f64]) -> Result<f64, ScError> {
        let mut streams = self.convert_inputs(input)?;
        let last = self.net.layers.len() - 1;
        for (l, layer) in self.net.layers.iter().enumerate() {
            let bank = &self.weights[l];
            let k = layer.apc_inputs();
            if layer.bias.is_some() {
                streams.push(self.ones.clone());
            }
            if l == last {
                let apc = accumulate(&streams, &bank[..k]);
                return Ok(readout(apc, layer.norm_shift, self.net.width));
            }
            streams = (0..layer.fan_out)
                .map(|i| {
                    let apc = accumulate(&streams, &bank[i * k..(i + 1) * k]);
                    let (word, _) = normalize(apc, layer.norm_shift, self.net.width);
                    let s = to_stochastic(word, &self.rx_out, self.net.stream_len)?;
                    relu_via_or(&s, &self.zero)
                })
                .collect::<Result<_, _>>()?;
        }
        unreachable!("network has at least one layer")
    }

    /// Same computation as [`infer`](Self::infer), keeping every
    /// intermediate stream and word.
    pub fn infer_traced(&self, input: &[f64]) -> Result<InferenceTrace, ScError> {
        let mut streams = self.convert_inputs(input)?;
        let last = self.net.layers.len() - 1;
        let mut trace = InferenceTrace {
            score: 0.0,
            inputs: Vec::new(),
            pre_relu: Vec::new(),
            words: Vec::new(),
            outputs: Vec::new(),
            saturations: 0,
        };
        for (l, layer) in self.net.layers.iter().enumerate() {
            let bank = &self.weights[l];
            let k = layer.apc_inputs();
            if layer.bias.is_some() {
                streams.push(self.ones.clone());
            }
            let mut words = Vec::with_capacity(layer.fan_out);
            let mut readouts = Vec::new();
            let mut pre = Vec::new();
            let mut next = Vec::new();
            for i in 0..layer.fan_out {
                let apc = accumulate(&streams, &bank[i * k..(i + 1) * k]);
                let (word, saturated) = normalize(apc, layer.norm_shift, self.net.width);
                trace.saturations += usize::from(saturated);
                words.push(word);
                if l == last {
                    readouts.push(readout(apc, layer.norm_shift, self.net.width));
                } else {
                    let s = to_stochastic(word, &self.rx_out, self.net.stream_len)?;
                    next.push(relu_via_or(&s, &self.zero)?);
                    pre.push(s);
                }
            }
            trace.inputs.push(streams);
            if l == last {
                trace.score = readouts[0];
                trace.outputs.push(readouts);
            } else {
                trace.outputs.push(next.iter().map(BitStream::decode).collect());
            }
            trace.words.push(words);
            trace.pre_relu.push(pre);
            streams = next;
        }
        Ok(trace)
    }

    /// Scores a batch in parallel; output order matches input order.
    pub fn infer_batch(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>, ScError> {
        inputs.par_iter().map(|x| self.infer(x)).collect()
    }
}

/// One-shot inference. Builds an [`ScEngine`]; reuse an engine when scoring
/// more than one input.
pub fn sc_network_infer(net: &ScNetwork, input: &[f64]) -> Result<f64, ScError> {
    ScEngine::new(net.clone())?.infer(input)
}
