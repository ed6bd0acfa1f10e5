use std::fmt;
use std::str::FromStr;

use super::lfsr::{RandomWords, RngTag};
use super::word::FixedWord;
use super::ScError;

/// Where a stream's bits came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lineage {
    /// Comparator output against the given word sequence.
    Rng(RngTag),
    /// Output of a gate.
    Derived,
    /// Built directly from bits or a constant.
    External,
}

/// Fixed-length boolean sequence packed into 64-bit words, bit `t` of the
/// stream at bit `t % 64` of word `t / 64`. Bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
    lineage: Lineage,
}

impl BitStream {
    pub fn from_bits(bits: &[bool]) -> Result<Self, ScError> {
        if bits.is_empty() {
            return Err(ScError::EmptyStream);
        }
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (t, &b) in bits.iter().enumerate() {
            if b {
                words[t / 64] |= 1 << (t % 64);
            }
        }
        Ok(Self { words, len: bits.len(), lineage: Lineage::External })
    }

    pub fn constant(value: bool, len: usize) -> Result<Self, ScError> {
        if len == 0 {
            return Err(ScError::EmptyStream);
        }
        let mut s = Self { words: vec![if value { u64::MAX } else { 0 }; len.div_ceil(64)], len, lineage: Lineage::External };
        s.clear_tail();
        Ok(s)
    }

    pub fn with_lineage(mut self, lineage: Lineage) -> Self {
        self.lineage = lineage;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; construction rejects empty streams.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lineage(&self) -> Lineage {
        self.lineage
    }

    pub fn get(&self, t: usize) -> Option<bool> {
        (t < self.len).then(|| self.words[t / 64] >> (t % 64) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |t| self.words[t / 64] >> (t % 64) & 1 == 1)
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn zeros(&self) -> usize {
        self.len - self.ones()
    }

    /// `N1 - N0`, the value held by a signed up/down counter after the
    /// whole stream has been clocked through it.
    pub fn counter_value(&self) -> i64 {
        2 * self.ones() as i64 - self.len as i64
    }

    /// Bipolar value `(N1 - N0) / (N0 + N1)`.
    pub fn decode(&self) -> f64 {
        self.counter_value() as f64 / self.len as f64
    }

    /// Counter contents after each clock, starting from zero.
    pub fn counter_trace(&self) -> CounterTrace {
        let mut count = 0i64;
        let steps = self
            .iter()
            .map(|b| {
                count += if b { 1 } else { -1 };
                count
            })
            .collect();
        CounterTrace { steps }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses strings like `"0110 1010"`; whitespace and `_` are ignored.
impl FromStr for BitStream {
    type Err = ScError;

    fn from_str(s: &str) -> Result<Self, ScError> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ScError::BadStreamChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(&bits)
    }
}

/// Per-clock contents of the up/down counter; the last entry is what the
/// output register latches when its enable fires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterTrace {
    pub steps: Vec<i64>,
}

impl CounterTrace {
    pub fn register(&self) -> i64 {
        self.steps.last().copied().unwrap_or(0)
    }

    /// Counter contents as `width`-bit words in `s.fff` notation.
    pub fn render(&self, width: u32) -> Result<Vec<String>, ScError> {
        self.steps
            .iter()
            .map(|&c| {
                let w = i32::try_from(c).map_err(|_| ScError::WordOutOfRange { value: c, width })?;
                Ok(FixedWord::new(w, width)?.to_string())
            })
            .collect()
    }
}

/// Comparator conversion: bit `t` is `x > R(t)`.
pub fn to_stochastic(x: FixedWord, rng: &RandomWords, len: usize) -> Result<BitStream, ScError> {
    to_stochastic_at(x, rng, 0, len)
}

/// Comparator conversion against the window `R(start .. start + len)`.
pub fn to_stochastic_at(
    x: FixedWord,
    rng: &RandomWords,
    start: usize,
    len: usize,
) -> Result<BitStream, ScError> {
    if x.width() != rng.width() {
        return Err(ScError::WidthMismatch { expected: rng.width(), found: x.width() });
    }
    if len == 0 {
        return Err(ScError::EmptyStream);
    }
    let needed = start + len;
    let window = rng
        .raw()
        .get(start..needed)
        .ok_or(ScError::NotEnoughRandomWords { needed, available: rng.len() })?;
    let threshold = x.value();
    let words = window
        .chunks(64)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &r)| acc | (u64::from(threshold > r) << i))
        })
        .collect();
    Ok(BitStream { words, len, lineage: Lineage::Rng(rng.tag().offset(start)) })
}

/// Bipolar value of a stream.
pub fn from_stochastic(s: &BitStream) -> f64 {
    s.decode()
}

/// Two-input gates used by the stochastic data path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Xnor,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::And, GateKind::Or, GateKind::Xnor];

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Xnor => a == b,
        }
    }

    fn apply_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xnor => !(a ^ b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xnor => "xnor",
        }
    }
}

/// Bitwise gate over two equal-length streams.
pub fn gate_eval(kind: GateKind, a: &BitStream, b: &BitStream) -> Result<BitStream, ScError> {
    if a.len != b.len {
        return Err(ScError::LengthMismatch { left: a.len, right: b.len });
    }
    let words = a.words.iter().zip(&b.words).map(|(&x, &y)| kind.apply_word(x, y)).collect();
    let mut out = BitStream { words, len: a.len, lineage: Lineage::Derived };
    out.clear_tail();
    Ok(out)
}

/// Accumulative parallel counter: +1 for every one and -1 for every zero
/// across all input streams and all clock cycles.
pub fn apc_accumulate<'a, I>(columns: I) -> Result<i64, ScError>
where
    I: IntoIterator<Item = &'a BitStream>,
{
    let mut iter = columns.into_iter();
    let first = iter.next().ok_or(ScError::NoColumns)?;
    let len = first.len;
    let mut total = first.counter_value();
    for s in iter {
        if s.len != len {
            return Err(ScError::LengthMismatch { left: len, right: s.len });
        }
        total += s.counter_value();
    }
    Ok(total)
}

/// Popcount of `XNOR(a, b)` without materializing the gate output.
pub(crate) fn xnor_ones(a: &BitStream, b: &BitStream) -> usize {
    let zeros: usize = a.words.iter().zip(&b.words).map(|(&x, &y)| (x ^ y).count_ones() as usize).sum();
    a.len - zeros
}
