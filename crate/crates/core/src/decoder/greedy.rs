use crate::alphabet::Alphabet;
use crate::emissions::{EmissionMatrix, Sample};
use crate::textnorm::NormalizedTranscript;

use super::to_transcript;

/// Per-frame argmax path; ties go to the lowest token index.
pub fn greedy_labels<S: Sample>(e: &EmissionMatrix<S>) -> Vec<usize> {
    e.rows()
        .map(|row| {
            let mut best = 0;
            for (k, v) in row.iter().enumerate().skip(1) {
                if v.to_f64() > row[best].to_f64() {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// CTC collapse: merge consecutive repeats, then delete blanks.
pub fn collapse(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(path.len());
    let mut prev = None;
    for &k in path {
        if Some(k) != prev && k != blank {
            out.push(k);
        }
        prev = Some(k);
    }
    out
}

/// Best-path decoding: argmax per frame, collapse, split on the delimiter.
///
/// # Panics
/// If the emission vocabulary differs from the alphabet size.
pub fn greedy_decode<S: Sample>(e: &EmissionMatrix<S>, a: &Alphabet) -> NormalizedTranscript {
    assert_eq!(e.vocab(), a.len(), "emission vocab does not match alphabet");
    let labels = collapse(&greedy_labels(e), a.blank());
    to_transcript(&a.render(&labels))
}
