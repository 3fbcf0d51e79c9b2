//! CTC decoding: greedy best-path, prefix beam search with word-level
//! n-gram shallow fusion, and an exhaustive oracle for small inputs.

mod beam;
mod greedy;
mod oracle;

pub use beam::beam_search_decode;
pub use greedy::{collapse, greedy_decode, greedy_labels};
pub use oracle::{oracle_decode, OracleEntry, ORACLE_MAX_FRAMES, ORACLE_MAX_VOCAB};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::alphabet::Alphabet;
use crate::emissions::{EmissionMatrix, Sample};
use crate::lm::{NGramModel, WordId};
use crate::textnorm::NormalizedTranscript;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("every token of frame {frame} fell below token_min_logp; beam is empty")]
    EmptyBeam { frame: usize },
    #[error("emission vocab {found} does not match alphabet size {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid decoder config: {0}")]
    InvalidConfig(String),
    #[error("oracle limited to T <= {ORACLE_MAX_FRAMES}, V <= {ORACLE_MAX_VOCAB}; got T={frames}, V={vocab}")]
    InstanceTooLarge { frames: usize, vocab: usize },
    #[error("batch item {index}: {source}")]
    Item {
        index: usize,
        #[source]
        source: Box<DecodeError>,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderConfig<'lm> {
    pub beam_width: usize,
    /// Weight of the LM score (log10 scale, converted to natural log).
    pub alpha: f64,
    /// Bonus per completed word.
    pub beta: f64,
    /// Tokens with a per-frame natural-log probability below this are not
    /// expanded.
    pub token_min_logp: f64,
    /// Number of ranked hypotheses to return.
    pub nbest: usize,
    pub lm: Option<&'lm NGramModel>,
}

impl Default for DecoderConfig<'_> {
    fn default() -> Self {
        Self {
            beam_width: 100,
            alpha: 0.5,
            beta: 1.5,
            token_min_logp: -5.0,
            nbest: 1,
            lm: None,
        }
    }
}

impl<'lm> DecoderConfig<'lm> {
    /// Pure CTC search with pruning disabled.
    pub fn exhaustive(beam_width: usize) -> Self {
        Self {
            beam_width,
            alpha: 0.0,
            beta: 0.0,
            token_min_logp: f64::NEG_INFINITY,
            nbest: 1,
            lm: None,
        }
    }

    pub fn with_lm(mut self, lm: &'lm NGramModel) -> Self {
        self.lm = Some(lm);
        self
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if self.beam_width == 0 {
            return Err(DecodeError::InvalidConfig("beam_width must be >= 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(DecodeError::InvalidConfig("alpha must be >= 0".into()));
        }
        if self.beta.is_nan() {
            return Err(DecodeError::InvalidConfig("beta is NaN".into()));
        }
        if self.token_min_logp.is_nan() || self.token_min_logp > 0.0 {
            return Err(DecodeError::InvalidConfig(
                "token_min_logp must be <= 0".into(),
            ));
        }
        Ok(())
    }
}

/// One ranked prefix at the end of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamHypothesis {
    /// Collapsed label sequence (blanks removed, repeats merged).
    pub prefix: Vec<usize>,
    pub text: String,
    pub logp_blank: f64,
    pub logp_nonblank: f64,
    /// Last `order - 1` completed words, as LM ids. Empty without an LM.
    pub lm_state: Vec<WordId>,
    pub lm_log10: f64,
    pub completed_words: usize,
    /// `acoustic + alpha·ln(10)·lm_log10 + beta·completed_words`.
    pub fused_score: f64,
}

impl BeamHypothesis {
    pub fn acoustic_logp(&self) -> f64 {
        logaddexp(self.logp_blank, self.logp_nonblank)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub transcript: NormalizedTranscript,
    pub score: f64,
    /// Best first; holds at least the top hypothesis.
    pub nbest: Vec<BeamHypothesis>,
}

impl DecodeResult {
    pub fn best(&self) -> &BeamHypothesis {
        &self.nbest[0]
    }
}

/// Decodes each matrix independently on the rayon pool. Results are in
/// input order and identical to sequential [`beam_search_decode`] calls.
pub fn decode_batch<S: Sample>(
    emissions: &[EmissionMatrix<S>],
    alphabet: &Alphabet,
    cfg: &DecoderConfig<'_>,
) -> Result<Vec<DecodeResult>, DecodeError> {
    emissions
        .par_iter()
        .enumerate()
        .map(|(index, e)| {
            beam_search_decode(e, alphabet, cfg).map_err(|source| DecodeError::Item {
                index,
                source: Box::new(source),
            })
        })
        .collect()
}

/// Splits rendered label text into words.
pub(crate) fn to_transcript(text: &str) -> NormalizedTranscript {
    NormalizedTranscript::from_normalized_text(text)
}

pub(crate) fn check_dims<S: Sample>(
    e: &EmissionMatrix<S>,
    alphabet: &Alphabet,
) -> Result<(), DecodeError> {
    if e.vocab() != alphabet.len() {
        return Err(DecodeError::DimensionMismatch {
            expected: alphabet.len(),
            found: e.vocab(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
