//! Cuts long utterances at speech pauses so that no segment exceeds a maximum
//! length. Utterances with a pause-free stretch longer than the limit are
//! discarded.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_LEN: f64 = 30.0;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("duplicate utterance id {0:?}")]
    DuplicateId(String),
    #[error("utterance {id:?}: {reason}")]
    InvalidUtterance { id: String, reason: String },
    #[error("max_len must be positive, got {0}")]
    BadMaxLen(f64),
    #[error("manifest line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Pauses are midpoints of silences, strictly inside `(0, duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub duration: f64,
    #[serde(default)]
    pub pauses: Vec<f64>,
}

impl Utterance {
    /// Reduces `(start, end)` silence intervals to their midpoints.
    pub fn from_silences(id: impl Into<String>, duration: f64, silences: &[(f64, f64)]) -> Self {
        Self {
            id: id.into(),
            duration,
            pauses: silences.iter().map(|(s, e)| 0.5 * (s + e)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        let bad = |reason: &str| SegmentError::InvalidUtterance {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(bad("duration must be positive and finite"));
        }
        let mut prev = 0.0;
        for &p in &self.pauses {
            if !(p > prev && p < self.duration) {
                return Err(bad(
                    "pauses must be strictly increasing inside (0, duration)",
                ));
            }
            prev = p;
        }
        Ok(())
    }
}

/// `id` equals the utterance id when the utterance was not cut, and
/// `<utterance_id>_<index>` (zero-padded to three digits) otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub utterance_id: String,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SliceOutcome {
    Segments(Vec<Segment>),
    Discarded,
}

/// Greedy farthest-reach slicing: from each segment start, cut at the last
/// pause within `max_len`, or finish if the utterance end is within reach.
pub fn slice(u: &Utterance, max_len: f64) -> Result<SliceOutcome, SegmentError> {
    if max_len.is_nan() || max_len <= 0.0 {
        return Err(SegmentError::BadMaxLen(max_len));
    }
    u.validate()?;
    let mut segments = Vec::new();
    let mut start = 0.0;
    let mut next = 0;
    loop {
        if u.duration - start <= max_len {
            segments.push(Segment {
                id: String::new(),
                utterance_id: u.id.clone(),
                start,
                end: u.duration,
            });
            break;
        }
        let mut cut = None;
        while next < u.pauses.len() && u.pauses[next] - start <= max_len {
            cut = Some(u.pauses[next]);
            next += 1;
        }
        match cut {
            Some(c) => {
                segments.push(Segment {
                    id: String::new(),
                    utterance_id: u.id.clone(),
                    start,
                    end: c,
                });
                start = c;
            }
            None => return Ok(SliceOutcome::Discarded),
        }
    }
    debug_assert!(segments.iter().all(|s| s.duration() <= max_len));
    let single = segments.len() == 1;
    for (i, s) in segments.iter_mut().enumerate() {
        s.id = if single {
            u.id.clone()
        } else {
            format!("{}_{i:03}", u.id)
        };
    }
    Ok(SliceOutcome::Segments(segments))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlicedCorpus {
    pub segments: Vec<Segment>,
    pub discarded_ids: Vec<String>,
}

/// Slices every utterance in parallel; output order follows input order.
pub fn slice_corpus(utterances: &[Utterance], max_len: f64) -> Result<SlicedCorpus, SegmentError> {
    let mut seen = HashSet::with_capacity(utterances.len());
    for u in utterances {
        if !seen.insert(u.id.as_str()) {
            return Err(SegmentError::DuplicateId(u.id.clone()));
        }
    }
    let outcomes = utterances
        .par_iter()
        .map(|u| slice(u, max_len))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = SlicedCorpus::default();
    for (u, outcome) in utterances.iter().zip(outcomes) {
        match outcome {
            SliceOutcome::Segments(s) => out.segments.extend(s),
            SliceOutcome::Discarded => out.discarded_ids.push(u.id.clone()),
        }
    }
    Ok(out)
}

/// Reads a JSON Lines manifest of utterances. Blank lines are skipped.
pub fn read_utterances(reader: impl BufRead) -> Result<Vec<Utterance>, SegmentError> {
    read_jsonl(reader)
}

pub fn read_segments(reader: impl BufRead) -> Result<Vec<Segment>, SegmentError> {
    read_jsonl(reader)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(reader: impl BufRead) -> Result<Vec<T>, SegmentError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| SegmentError::Json {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

pub fn write_segments(mut writer: impl Write, segments: &[Segment]) -> Result<(), SegmentError> {
    for s in segments {
        serde_json::to_writer(&mut writer, s).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
