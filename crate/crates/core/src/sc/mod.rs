//! Stochastic-computing primitives.
//!
//! Values are carried in bipolar coding: a stream with `N1` ones and `N0`
//! zeros stands for `(N1 - N0) / (N0 + N1)`. Binary words enter the
//! stochastic domain through a comparator against a pseudo-random word
//! sequence and leave it through a signed up/down counter.

mod correlation;
mod lfsr;
pub(crate) mod stream;
mod word;

pub use correlation::{expected_gate_output, sc_correlation, UNDEFINED_EPS};
pub use lfsr::{lfsr_next, Lfsr, LfsrConfig, RandomWords, RngTag};
pub use stream::{
    apc_accumulate, from_stochastic, gate_eval, to_stochastic, to_stochastic_at, BitStream,
    CounterTrace, GateKind, Lineage,
};
pub use word::{FixedWord, DEFAULT_WIDTH, MAX_WIDTH, MIN_WIDTH};

use thiserror::Error;

/// Errors raised by the stochastic primitives and the stochastic network.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScError {
    #[error("word width {0} outside supported range {MIN_WIDTH}..={MAX_WIDTH}")]
    InvalidWidth(u32),
    #[error("value {value} does not fit a {width}-bit two's-complement word")]
    WordOutOfRange { value: i64, width: u32 },
    #[error("word width mismatch: expected {expected} bits, found {found}")]
    WidthMismatch { expected: u32, found: u32 },
    #[error("stream length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("bitstream must contain at least one bit")]
    EmptyStream,
    #[error("invalid bitstream character {0:?}")]
    BadStreamChar(char),
    #[error("LFSR state is zero; the register would lock")]
    ZeroLfsrState,
    #[error("LFSR tap mask {taps:#x} is invalid for width {width}")]
    InvalidTaps { taps: u32, width: u32 },
    #[error("need {needed} random words, sequence holds {available}")]
    NotEnoughRandomWords { needed: usize, available: usize },
    #[error("correlation undefined for stream means x={x}, y={y}")]
    CorrelationUndefined { x: f64, y: f64 },
    #[error("{name}={value} outside its valid range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("accumulative parallel counter needs at least one input stream")]
    NoColumns,
    #[error("streams do not share an RNG lineage ({left:?} vs {right:?})")]
    CorrelationViolation { left: Lineage, right: Lineage },
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid stochastic network: {0}")]
    InvalidNetwork(String),
    #[error("model cannot be quantized: {0}")]
    NotQuantizable(String),
}
