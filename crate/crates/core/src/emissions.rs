//! Frame-level log-probability matrices and their binary file format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size   field
//! 0       8      magic "CTCEMIT1"
//! 8       4      u32 frames (T)
//! 12      4      u32 vocab (V)
//! 16      1      u8 normalized flag (0 or 1)
//! 17      8      f64 frame duration in seconds
//! 25      4·T·V  f32 natural-log probabilities, frame-major
//! ```
//!
//! `-inf` is stored as `f32::MIN`, which is therefore reserved: it never
//! appears as a finite value in memory.

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::alphabet::Alphabet;

pub const MAGIC: &[u8; 8] = b"CTCEMIT1";
pub const HEADER_LEN: usize = 25;
/// On-disk encoding of `-inf`.
pub const NEG_INF_SENTINEL: f32 = f32::MIN;
/// Row log-sum-exp tolerance for the normalized flag.
pub const NORMALIZATION_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum EmissionError {
    #[error("bad magic header")]
    BadMagic,
    #[error("emission vocab {found} does not match alphabet size {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value at frame {frame}, token {token}")]
    NonFiniteValue { frame: usize, token: usize },
    #[error("positive log-probability at frame {frame}, token {token}")]
    PositiveValue { frame: usize, token: usize },
    #[error("file truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingData(usize),
    #[error("matrix flagged normalized but frame {0} does not sum to one")]
    NotNormalized(usize),
    #[error("{values} values do not fill a {frames}x{vocab} matrix")]
    ShapeMismatch {
        frames: usize,
        vocab: usize,
        values: usize,
    },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Storage type of emission values. The file format uses `f32`; `f64`
/// matrices exist for exact in-memory computations.
pub trait Sample: Copy + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Sample for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Sample for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// `T×V` matrix of natural-log probabilities, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix<S: Sample = f32> {
    frames: usize,
    vocab: usize,
    values: Vec<S>,
    normalized: bool,
    frame_duration: f64,
}

impl<S: Sample> EmissionMatrix<S> {
    /// Validates values and sets the normalized flag from the data itself.
    /// Values at or below `f32::MIN` are stored as `-inf`.
    pub fn new(
        frames: usize,
        vocab: usize,
        mut values: Vec<S>,
        frame_duration: f64,
    ) -> Result<Self, EmissionError> {
        if values.len() != frames * vocab {
            return Err(EmissionError::ShapeMismatch {
                frames,
                vocab,
                values: values.len(),
            });
        }
        for (i, v) in values.iter_mut().enumerate() {
            if v.to_f64() <= NEG_INF_SENTINEL as f64 {
                *v = S::from_f64(f64::NEG_INFINITY);
            }
            check_value(v.to_f64(), i, vocab)?;
        }
        let mut m = Self {
            frames,
            vocab,
            values,
            normalized: false,
            frame_duration,
        };
        m.normalized = m.first_unnormalized_row().is_none();
        Ok(m)
    }

    /// Builds a matrix from per-frame probabilities (not logs).
    pub fn from_probs(rows: &[Vec<f64>], frame_duration: f64) -> Result<Self, EmissionError> {
        let vocab = rows.first().map_or(0, Vec::len);
        let values = rows
            .iter()
            .flat_map(|r| r.iter().map(|&p| S::from_f64(p.ln())))
            .collect();
        Self::new(rows.len(), vocab, values, frame_duration)
    }

    /// Overrides the normalized flag without checking it. `save` re-checks.
    pub fn with_normalized_flag(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_duration
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn row(&self, frame: usize) -> &[S] {
        &self.values[frame * self.vocab..(frame + 1) * self.vocab]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        // chunks_exact panics on a zero chunk size
        self.values
            .chunks_exact(self.vocab.max(1))
            .take(self.frames)
    }

    /// Log-probability as `f64`.
    #[inline]
    pub fn logp(&self, frame: usize, token: usize) -> f64 {
        self.values[frame * self.vocab + token].to_f64()
    }

    fn first_unnormalized_row(&self) -> Option<usize> {
        self.rows()
            .position(|row| row.is_empty() || log_sum_exp(row).abs() > NORMALIZATION_TOL)
    }

    pub fn check_alphabet(&self, alphabet: &Alphabet) -> Result<(), EmissionError> {
        if self.vocab != alphabet.len() {
            return Err(EmissionError::DimensionMismatch {
                expected: alphabet.len(),
                found: self.vocab,
            });
        }
        Ok(())
    }
}

impl EmissionMatrix<f32> {
    /// Serializes to the binary format. A normalized flag that the data does
    /// not honor is cleared.
    pub fn to_bytes(&self) -> Vec<u8> {
        let normalized = self.normalized && self.first_unnormalized_row().is_none();
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.frames as u32).to_le_bytes());
        out.extend_from_slice(&(self.vocab as u32).to_le_bytes());
        out.push(normalized as u8);
        out.extend_from_slice(&self.frame_duration.to_le_bytes());
        for &v in &self.values {
            let stored = if v == f32::NEG_INFINITY {
                NEG_INF_SENTINEL
            } else {
                v
            };
            out.extend_from_slice(&stored.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmissionError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(EmissionError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(EmissionError::TruncatedFile {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let frames = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let vocab = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let flag = bytes[16] != 0;
        let frame_duration = f64::from_le_bytes(bytes[17..25].try_into().unwrap());
        let expected = HEADER_LEN + 4 * frames * vocab;
        if bytes.len() < expected {
            return Err(EmissionError::TruncatedFile {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(EmissionError::TrailingData(bytes.len() - expected));
        }
        let values = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let m = Self::new(frames, vocab, values, frame_duration)?;
        if flag {
            if let Some(row) = m.first_unnormalized_row() {
                return Err(EmissionError::NotNormalized(row));
            }
        }
        Ok(m.with_normalized_flag(flag))
    }
}

fn check_value(v: f64, index: usize, vocab: usize) -> Result<(), EmissionError> {
    let (frame, token) = (index / vocab.max(1), index % vocab.max(1));
    if v.is_nan() || v == f64::INFINITY {
        Err(EmissionError::NonFiniteValue { frame, token })
    } else if v > 0.0 {
        Err(EmissionError::PositiveValue { frame, token })
    } else {
        Ok(())
    }
}

/// Numerically stable `ln Σ exp(x)`, accumulated in `f64`.
pub fn log_sum_exp<S: Sample>(row: &[S]) -> f64 {
    let max = row
        .iter()
        .map(|v| v.to_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + row
        .iter()
        .map(|&v| (v.to_f64() - max).exp())
        .sum::<f64>()
        .ln()
}

pub fn load_emissions(
    path: impl AsRef<Path>,
    alphabet: &Alphabet,
) -> Result<EmissionMatrix, EmissionError> {
    let m = EmissionMatrix::from_bytes(&fs::read(path)?)?;
    m.check_alphabet(alphabet)?;
    Ok(m)
}

pub fn save_emissions(
    matrix: &EmissionMatrix,
    path: impl AsRef<Path>,
) -> Result<(), EmissionError> {
    fs::write(path, matrix.to_bytes())?;
    Ok(())
}
