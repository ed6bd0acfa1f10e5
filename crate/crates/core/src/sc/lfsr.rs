use serde::{Deserialize, Serialize};

use super::word::check_width;
use super::{FixedWord, ScError};

/// Fibonacci LFSR configuration.
///
/// `taps` has bit `k-1` set for every term `x^k` of the feedback polynomial
/// (the constant term is implicit). Each step shifts left by one and feeds
/// the parity of `state & taps` into bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LfsrConfig {
    pub width: u32,
    pub taps: u32,
    pub seed: u32,
}

impl LfsrConfig {
    pub fn new(width: u32, taps: u32, seed: u32) -> Result<Self, ScError> {
        let cfg = Self { width, taps, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build from the exponents of the feedback polynomial, e.g. `[4, 3]`
    /// for `x^4 + x^3 + 1`.
    pub fn from_polynomial(width: u32, exponents: &[u32], seed: u32) -> Result<Self, ScError> {
        let mut taps = 0u32;
        for &e in exponents {
            if e == 0 || e > width {
                return Err(ScError::InvalidTaps { taps: e, width });
            }
            taps |= 1 << (e - 1);
        }
        Self::new(width, taps, seed)
    }

    /// x^12 + x^11 + x^10 + x^4 + 1: drives inputs, zero(t) and APC
    /// reconversion.
    pub fn default_lfsr1() -> Self {
        Self { width: 12, taps: 0b1110_0000_1000, seed: 0x001 }
    }

    /// x^12 + x^6 + x^4 + x + 1: drives the weight streams.
    pub fn default_lfsr2() -> Self {
        Self { width: 12, taps: 0b1000_0010_1001, seed: 0x001 }
    }

    /// Two decorrelated maximal registers for `width`: the defaults above for
    /// 12 bits, otherwise the two numerically smallest maximal tap masks.
    pub fn default_pair(width: u32) -> Result<(Self, Self), ScError> {
        if width == super::DEFAULT_WIDTH {
            return Ok((Self::default_lfsr1(), Self::default_lfsr2()));
        }
        check_width(width)?;
        let top = 1u32 << (width - 1);
        let mut found = Vec::with_capacity(2);
        for low in 0..top {
            let cfg = Self { width, taps: top | low, seed: 1 };
            if cfg.measure_period()? == cfg.maximal_period() {
                found.push(cfg);
                if found.len() == 2 {
                    break;
                }
            }
        }
        match found.as_slice() {
            [a, b] => Ok((*a, *b)),
            // Width 2 has a single primitive polynomial; fall back to a
            // second seed.
            [a] => Ok((*a, Self { seed: 2, ..*a })),
            _ => Err(ScError::InvalidTaps { taps: 0, width }),
        }
    }

    pub fn validate(&self) -> Result<(), ScError> {
        check_width(self.width)?;
        let mask = self.mask();
        // The top tap must be present or the register degenerates into a
        // shorter one.
        if self.taps & !mask != 0 || self.taps >> (self.width - 1) & 1 == 0 {
            return Err(ScError::InvalidTaps { taps: self.taps, width: self.width });
        }
        if self.seed & mask == 0 || self.seed & !mask != 0 {
            return Err(ScError::ZeroLfsrState);
        }
        Ok(())
    }

    pub fn mask(&self) -> u32 {
        (1u32 << self.width) - 1
    }

    /// Period of a maximal-length register of this width.
    pub fn maximal_period(&self) -> usize {
        (1usize << self.width) - 1
    }

    /// Period measured by iterating from the seed.
    pub fn measure_period(&self) -> Result<usize, ScError> {
        self.validate()?;
        let mut state = step(self.seed, self.taps, self.mask());
        let mut n = 1;
        while state != self.seed {
            state = step(state, self.taps, self.mask());
            n += 1;
        }
        Ok(n)
    }
}

#[inline]
fn step(state: u32, taps: u32, mask: u32) -> u32 {
    let feedback = (state & taps).count_ones() & 1;
    ((state << 1) | feedback) & mask
}

/// Emit the current state as a signed word, then advance one step.
///
/// The state is reinterpreted as two's complement, so a maximal register
/// visits every word except zero once per period.
pub fn lfsr_next(config: &LfsrConfig, state: u32) -> Result<(FixedWord, u32), ScError> {
    if state & config.mask() == 0 {
        return Err(ScError::ZeroLfsrState);
    }
    let word = FixedWord::from_raw_bits(state, config.width)?;
    Ok((word, step(state, config.taps, config.mask())))
}

/// A running register.
#[derive(Debug, Clone)]
pub struct Lfsr {
    config: LfsrConfig,
    state: u32,
    emitted: u64,
}

impl Lfsr {
    pub fn new(config: LfsrConfig) -> Result<Self, ScError> {
        config.validate()?;
        Ok(Self { config, state: config.seed, emitted: 0 })
    }

    pub fn config(&self) -> &LfsrConfig {
        &self.config
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_word(&mut self) -> FixedWord {
        let (word, next) =
            lfsr_next(&self.config, self.state).expect("validated register never reaches zero");
        self.state = next;
        self.emitted += 1;
        word
    }

    pub fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.state = step(self.state, self.config.taps, self.config.mask());
        }
        self.emitted += n as u64;
    }

    /// Take the next `len` words as a tagged sequence.
    pub fn take_words(&mut self, len: usize) -> RandomWords {
        let tag = RngTag::Lfsr { taps: self.config.taps, seed: self.config.seed, start: self.emitted };
        let words = (0..len).map(|_| self.next_word().value()).collect();
        RandomWords { tag, width: self.config.width, words }
    }
}

impl Iterator for Lfsr {
    type Item = FixedWord;

    fn next(&mut self) -> Option<FixedWord> {
        Some(self.next_word())
    }
}

/// Identity of a random word sequence, used to track which streams are
/// mutually correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RngTag {
    /// Window of an LFSR sequence starting `start` words after the seed.
    Lfsr { taps: u32, seed: u32, start: u64 },
    /// Window of a caller-supplied sequence.
    External { id: u32, start: u64 },
}

impl RngTag {
    pub fn external(id: u32) -> Self {
        RngTag::External { id, start: 0 }
    }

    /// Tag of the window that begins `by` words later.
    pub fn offset(self, by: usize) -> Self {
        match self {
            RngTag::Lfsr { taps, seed, start } => RngTag::Lfsr { taps, seed, start: start + by as u64 },
            RngTag::External { id, start } => RngTag::External { id, start: start + by as u64 },
        }
    }
}

/// A materialized sequence `R(t)` of random words.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWords {
    tag: RngTag,
    width: u32,
    words: Vec<i32>,
}

impl RandomWords {
    pub fn from_words(tag: RngTag, words: &[FixedWord]) -> Result<Self, ScError> {
        let width = words.first().map(|w| w.width()).ok_or(ScError::EmptyStream)?;
        if let Some(bad) = words.iter().find(|w| w.width() != width) {
            return Err(ScError::WidthMismatch { expected: width, found: bad.width() });
        }
        Ok(Self { tag, width, words: words.iter().map(|w| w.value()).collect() })
    }

    pub fn tag(&self) -> RngTag {
        self.tag
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<FixedWord> {
        self.words.get(t).map(|&v| FixedWord::new(v, self.width).expect("stored words are in range"))
    }

    /// Sub-sequence `start .. start + len`, tagged with its own offset.
    pub fn window(&self, start: usize, len: usize) -> Result<Self, ScError> {
        let needed = start + len;
        let words = self
            .words
            .get(start..needed)
            .ok_or(ScError::NotEnoughRandomWords { needed, available: self.words.len() })?
            .to_vec();
        Ok(Self { tag: self.tag.offset(start), width: self.width, words })
    }

    pub(crate) fn raw(&self) -> &[i32] {
        &self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn four_bit_register_has_full_period() {
        let cfg = LfsrConfig::from_polynomial(4, &[4, 3], 0b0001).unwrap();
        let mut state = cfg.seed;
        let mut seen = Vec::new();
        for _ in 0..15 {
            let (_, next) = lfsr_next(&cfg, state).unwrap();
            seen.push(state);
            state = next;
        }
        let distinct: HashSet<u32> = seen.iter().copied().collect();
        assert_eq!(distinct.len(), 15);
        assert!(!distinct.contains(&0));
        assert_eq!(state, cfg.seed);
    }

    #[test]
    fn default_registers_are_maximal() {
        for cfg in [LfsrConfig::default_lfsr1(), LfsrConfig::default_lfsr2()] {
            assert_eq!(cfg.measure_period().unwrap(), 4095);
            let mut lfsr = Lfsr::new(cfg).unwrap();
            lfsr.advance(4095);
            assert_eq!(lfsr.state(), cfg.seed);
        }
        assert_eq!(
            LfsrConfig::from_polynomial(12, &[12, 11, 10, 4], 1).unwrap(),
            LfsrConfig::default_lfsr1()
        );
        assert_eq!(
            LfsrConfig::from_polynomial(12, &[12, 6, 4, 1], 1).unwrap(),
            LfsrConfig::default_lfsr2()
        );
    }

    #[test]
    fn full_period_hits_every_nonzero_word_once() {
        let mut lfsr = Lfsr::new(LfsrConfig::default_lfsr1()).unwrap();
        let mut hits = vec![0u32; 4096];
        for _ in 0..4095 {
            hits[(lfsr.next_word().value() + 2048) as usize] += 1;
        }
        for (i, &h) in hits.iter().enumerate() {
            let word = i as i32 - 2048;
            assert_eq!(h, u32::from(word != 0), "word {word}");
        }
    }

    #[test]
    fn default_pairs_are_maximal_and_distinct() {
        for width in 3..=16 {
            let (a, b) = LfsrConfig::default_pair(width).unwrap();
            assert_ne!(a.taps, b.taps, "width {width}");
            assert_eq!(a.measure_period().unwrap(), a.maximal_period());
            assert_eq!(b.measure_period().unwrap(), b.maximal_period());
        }
    }

    #[test]
    fn zero_state_is_rejected() {
        let cfg = LfsrConfig::default_lfsr1();
        assert_eq!(lfsr_next(&cfg, 0), Err(ScError::ZeroLfsrState));
        assert_eq!(LfsrConfig::new(12, cfg.taps, 0), Err(ScError::ZeroLfsrState));
        assert!(LfsrConfig::new(12, 0b11, 1).is_err());
    }

    #[test]
    fn windows_carry_their_start() {
        let mut lfsr = Lfsr::new(LfsrConfig::default_lfsr2()).unwrap();
        let a = lfsr.take_words(10);
        let b = lfsr.take_words(10);
        assert_ne!(a.tag(), b.tag());
        assert_eq!(a.len(), 10);
    }
}
