//! Bit-exact model of a stochastic-computing neural accelerator for
//! ligand-based virtual screening.
//!
//! The crate is split along the data path:
//!
//! - [`sc`]: fixed-point words, LFSR generators, packed bitstreams, gate
//!   algebra, the accumulative parallel counter and the correlation metric.
//! - [`sc_nn`]: the two-LFSR stochastic network (quantization, XNOR/APC
//!   neurons, OR-gate ReLU, whole-network inference).
//! - [`nn`]: the floating-point reference network and its Adam trainer.
//! - [`mpe`]: molecular pairing-energy descriptors, parsers and scaling.
//! - [`screening`]: splits, ranking, AUC / enrichment metrics and reports.
//! - [`synth`]: seeded synthetic screening benchmark.

pub mod mpe;
pub mod nn;
pub mod rng;
pub mod sc;
pub mod sc_nn;
pub mod screening;
pub mod synth;

/// Number of network inputs: two 12-value descriptors side by side.
pub const PAIR_FEATURES: usize = 2 * mpe::DESCRIPTOR_LEN;
