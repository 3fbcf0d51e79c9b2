//! Dataset statistics (hours, words, average record length) and fine-tuning
//! schedule bookkeeping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmenter::Segment;
use crate::textnorm::NormalizedTranscript;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("{segments} segments but {transcripts} transcripts")]
    LengthMismatch { segments: usize, transcripts: usize },
    #[error("schedule multipliers must be at least 1")]
    BadMultiplier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total_hours: f64,
    pub word_count: usize,
    /// Seconds.
    pub avg_len: f64,
    pub segment_count: usize,
}

impl DatasetStats {
    pub fn total_seconds(&self) -> f64 {
        self.total_hours * 3600.0
    }

    /// Statistics of the union of two datasets.
    pub fn merge(&self, other: &DatasetStats) -> DatasetStats {
        let seconds = self.total_seconds() + other.total_seconds();
        let count = self.segment_count + other.segment_count;
        DatasetStats {
            total_hours: seconds / 3600.0,
            word_count: self.word_count + other.word_count,
            avg_len: seconds / count as f64,
            segment_count: count,
        }
    }

    /// Three-column text line: hours, words, average length.
    pub fn table_row(&self, name: &str) -> String {
        format!(
            "{name}\t{:.2} h\t{} words\t{:.2} s",
            self.total_hours, self.word_count, self.avg_len
        )
    }
}

/// `segments[i]` and `transcripts[i]` describe the same record.
pub fn stats(
    segments: &[Segment],
    transcripts: &[NormalizedTranscript],
) -> Result<DatasetStats, ManifestError> {
    if segments.len() != transcripts.len() {
        return Err(ManifestError::LengthMismatch {
            segments: segments.len(),
            transcripts: transcripts.len(),
        });
    }
    if segments.is_empty() {
        return Err(ManifestError::EmptyDataset);
    }
    let seconds: f64 = segments.iter().map(Segment::duration).sum();
    Ok(DatasetStats {
        total_hours: seconds / 3600.0,
        word_count: transcripts.iter().map(NormalizedTranscript::len).sum(),
        avg_len: seconds / segments.len() as f64,
        segment_count: segments.len(),
    })
}

/// Fine-tuning run expressed as multiples of a default schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub base_epochs: u32,
    pub batch_multiplier: u32,
    pub update_multiplier: u32,
}

impl ScheduleSpec {
    pub fn new(
        base_epochs: u32,
        batch_multiplier: u32,
        update_multiplier: u32,
    ) -> Result<Self, ManifestError> {
        if batch_multiplier == 0 || update_multiplier == 0 {
            return Err(ManifestError::BadMultiplier);
        }
        Ok(Self {
            base_epochs,
            batch_multiplier,
            update_multiplier,
        })
    }

    /// Row label such as `"40 epochs (4xBS, 2xUP)"` or `"5 epochs (default)"`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.batch_multiplier > 1 {
            parts.push(format!("{}xBS", self.batch_multiplier));
        }
        if self.update_multiplier > 1 {
            parts.push(format!("{}xUP", self.update_multiplier));
        }
        let detail = if parts.is_empty() {
            "default".to_string()
        } else {
            parts.join(", ")
        };
        format!("{} epochs ({detail})", effective_epochs(self))
    }
}

/// Scaling either the batch or the number of updates scales the passes over
/// the data by the same factor.
pub fn effective_epochs(s: &ScheduleSpec) -> u32 {
    s.base_epochs * s.batch_multiplier * s.update_multiplier
}
