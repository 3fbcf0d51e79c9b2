//! CTC decoding toolkit for grapheme-based speech recognizers.
//!
//! - [`alphabet`] and [`emissions`]: model output inventory and the binary
//!   emission matrix format consumed by the decoders.
//! - [`decoder`]: greedy CTC, prefix beam search with word-level n-gram
//!   shallow fusion, and an exhaustive oracle for verification.
//! - [`lm`]: n-gram counting, count pruning, modified Kneser-Ney estimation,
//!   ARPA I/O and backoff scoring (orders up to 4 by default).
//! - [`textnorm`]: transcript normalization for LM training and scoring.
//! - [`segmenter`]: slicing long utterances at pauses under a length cap.
//! - [`eval`]: word error rate and corpus-level aggregation.
//! - [`manifest`]: dataset statistics and fine-tuning schedule bookkeeping.
//! - [`cli`]: the `ctcfuse` command line.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod alphabet;
pub mod cli;
pub mod decoder;
pub mod emissions;
pub mod eval;
pub mod lm;
pub mod manifest;
pub mod segmenter;
pub mod textnorm;

pub use alphabet::Alphabet;
pub use decoder::{
    beam_search_decode, decode_batch, greedy_decode, oracle_decode, DecodeResult, DecoderConfig,
};
pub use emissions::{load_emissions, save_emissions, EmissionMatrix};
pub use eval::{aggregate, wer, WerReport};
pub use lm::NGramModel;
pub use textnorm::{normalize, NormalizationConfig, NormalizedTranscript};
